#include "wreath/io.hpp"

#include <png.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wreath/errors.hpp"

namespace wreath {

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

double parse_number(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{})
    throw IoError(IoCode::malformed_record, "bad number: '" + s + "'");
  return v;
}

std::string digest_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// PNG

Raster read_png(const std::string& path) {
  if (std::FILE* f = std::fopen(path.c_str(), "rb")) {
    std::fclose(f);
  } else {
    throw IoError(IoCode::missing_file, "no such file: " + path);
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError(IoCode::malformed_image,
                  "not a readable PNG: " + path + " (" + image.message + ")");
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
    throw IoError(IoCode::malformed_image,
                  "failed to decode PNG: " + path + " (" + image.message + ")");
  Raster out(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const double r = buf[3 * i + 0], g = buf[3 * i + 1], b = buf[3 * i + 2];
    out.pixels[i] = (0.2126 * r + 0.7152 * g + 0.0722 * b) / 255.0;
  }
  return out;
}

void write_png(const std::string& path, const Raster& img) {
  std::vector<std::uint8_t> buf(img.pixels.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double v = std::clamp(img.pixels[i], 0.0, 1.0);
    buf[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr))
    throw IoError(IoCode::unwritable_path,
                  "cannot write PNG: " + path + " (" + image.message + ")");
}

void write_png(const std::string& path, const BinaryImage& img) {
  Raster r(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    r.pixels[i] = img.pixels[i] ? 1.0 : 0.0;
  write_png(path, r);
}

// ---------------------------------------------------------------------------
// Text files

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoCode::missing_file, "no such file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoCode::unwritable_path, "cannot write: " + path);
  out << data;
  if (!out) throw IoError(IoCode::unwritable_path, "short write: " + path);
}

}  // namespace

Shape read_shape_file(const std::string& path, int max_levels) {
  return parse_shape(slurp(path), max_levels);
}

void write_shape_file(const std::string& path, const Shape& s) {
  spit(path, serialize_shape(s) + "\n");
}

KeyValues read_key_values(const std::string& path) {
  const std::string text = slurp(path);
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos || line[i] == '#') continue;
    const std::size_t eq = line.find('=', i);
    if (eq == std::string::npos)
      throw IoError(IoCode::malformed_record,
                    path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(i, eq - i);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    std::string value = line.substr(eq + 1);
    const std::size_t vs = value.find_first_not_of(" \t");
    value = vs == std::string::npos ? std::string() : value.substr(vs);
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

void write_key_values(const std::string& path, const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  spit(path, out);
}

std::optional<std::string> kv_find(const KeyValues& kv, const std::string& key) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Sample records

namespace {

void append_noise(std::string& out,
                  const std::vector<std::vector<std::vector<double>>>& noise) {
  out += '[';
  for (std::size_t l = 0; l < noise.size(); ++l) {
    if (l) out += ',';
    out += '[';
    for (std::size_t e = 0; e < noise[l].size(); ++e) {
      if (e) out += ',';
      out += '[';
      for (std::size_t k = 0; k < noise[l][e].size(); ++k) {
        if (k) out += ',';
        out += format_number(noise[l][e][k]);
      }
      out += ']';
    }
    out += ']';
  }
  out += ']';
}

struct ArrayCursor {
  const std::string& s;
  std::size_t p = 0;

  void skip() {
    while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
  }
  void expect(char c) {
    skip();
    if (p >= s.size() || s[p] != c)
      throw IoError(IoCode::malformed_record,
                    std::string("expected '") + c + "' in array");
    ++p;
  }
  bool try_eat(char c) {
    skip();
    if (p < s.size() && s[p] == c) {
      ++p;
      return true;
    }
    return false;
  }
  double number() {
    skip();
    double v = 0.0;
    auto [q, ec] = std::from_chars(s.data() + p, s.data() + s.size(), v);
    if (ec != std::errc{})
      throw IoError(IoCode::malformed_record, "bad number in array");
    p = static_cast<std::size_t>(q - s.data());
    return v;
  }
};

std::vector<double> parse_array1(ArrayCursor& c) {
  std::vector<double> v;
  c.expect('[');
  if (c.try_eat(']')) return v;
  do {
    v.push_back(c.number());
  } while (c.try_eat(','));
  c.expect(']');
  return v;
}

template <class Inner>
auto parse_array_of(ArrayCursor& c, Inner&& inner) {
  std::vector<decltype(inner(c))> v;
  c.expect('[');
  if (c.try_eat(']')) return v;
  do {
    v.push_back(inner(c));
  } while (c.try_eat(','));
  c.expect(']');
  return v;
}

}  // namespace

void write_samples(const std::string& path, const std::vector<SampleRecord>& v) {
  std::string out = "# wreath samples v1\n";
  for (const SampleRecord& r : v) {
    out += "iteration=" + std::to_string(r.iteration) + "\n";
    out += "shape=" + r.shape + "\n";
    out += "lambda=" + format_number(r.lambda) + "\n";
    out += "blur_w=" + std::to_string(r.blur_half_width) + "\n";
    out += "blur_sigma=" + format_number(r.blur_sigma) + "\n";
    out += "log_posterior=" + format_number(r.log_posterior) + "\n";
    out += "log_likelihood=" + format_number(r.log_likelihood) + "\n";
    out += "sigma=[";
    for (std::size_t i = 0; i < r.sigma.size(); ++i) {
      if (i) out += ',';
      out += r.sigma[i] ? format_number(*r.sigma[i]) : std::string("-");
    }
    out += "]\n";
    if (r.noise) {
      out += "noise=";
      append_noise(out, *r.noise);
      out += "\n";
    }
    out += "---\n";
  }
  spit(path, out);
}

std::vector<SampleRecord> read_samples(const std::string& path) {
  const std::string text = slurp(path);
  std::vector<SampleRecord> out;
  SampleRecord cur;
  bool any = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "---") {
      out.push_back(std::move(cur));
      cur = SampleRecord{};
      any = false;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError(IoCode::malformed_record, path + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    any = true;
    if (key == "iteration") {
      cur.iteration = static_cast<long long>(parse_number(value));
    } else if (key == "shape") {
      cur.shape = value;
    } else if (key == "lambda") {
      cur.lambda = parse_number(value);
    } else if (key == "blur_w") {
      cur.blur_half_width = static_cast<int>(parse_number(value));
    } else if (key == "blur_sigma") {
      cur.blur_sigma = parse_number(value);
    } else if (key == "log_posterior") {
      cur.log_posterior = parse_number(value);
    } else if (key == "log_likelihood") {
      cur.log_likelihood = parse_number(value);
    } else if (key == "sigma") {
      ArrayCursor c{value};
      c.expect('[');
      cur.sigma.clear();
      if (!c.try_eat(']')) {
        do {
          c.skip();
          if (c.p < value.size() && value[c.p] == '-' &&
              (c.p + 1 >= value.size() || value[c.p + 1] == ',' ||
               value[c.p + 1] == ']')) {
            ++c.p;
            cur.sigma.push_back(std::nullopt);
          } else {
            cur.sigma.push_back(c.number());
          }
        } while (c.try_eat(','));
        c.expect(']');
      }
    } else if (key == "noise") {
      ArrayCursor c{value};
      cur.noise = parse_array_of(
          c, [](ArrayCursor& c2) { return parse_array_of(c2, parse_array1); });
    } else {
      throw IoError(IoCode::malformed_record, path + ": unknown key " + key);
    }
  }
  if (any)
    throw IoError(IoCode::malformed_record, path + ": unterminated record");
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

void write_manifest(const std::string& path, const RunManifest& m) {
  KeyValues kv;
  kv.emplace_back("seed", std::to_string(m.seed));
  kv.emplace_back("chains", std::to_string(m.chains));
  kv.emplace_back("iterations", std::to_string(m.iterations));
  kv.emplace_back("thin", std::to_string(m.thin));
  kv.emplace_back("config_digest", m.config_digest);
  kv.emplace_back("library_version", m.library_version);
  for (const auto& [name, rate] : m.acceptance_rates)
    kv.emplace_back("accept_" + name, format_number(rate));
  for (const auto& [k, v] : m.extra) kv.emplace_back(k, v);
  write_key_values(path, kv);
}

RunManifest read_manifest(const std::string& path) {
  RunManifest m;
  for (const auto& [k, v] : read_key_values(path)) {
    if (k == "seed")
      m.seed = static_cast<std::uint64_t>(std::stoull(v));
    else if (k == "chains")
      m.chains = static_cast<int>(parse_number(v));
    else if (k == "iterations")
      m.iterations = static_cast<long long>(parse_number(v));
    else if (k == "thin")
      m.thin = static_cast<int>(parse_number(v));
    else if (k == "config_digest")
      m.config_digest = v;
    else if (k == "library_version")
      m.library_version = v;
    else if (k.rfind("accept_", 0) == 0)
      m.acceptance_rates.emplace_back(k.substr(7), parse_number(v));
    else
      m.extra.emplace_back(k, v);
  }
  return m;
}

}  // namespace wreath

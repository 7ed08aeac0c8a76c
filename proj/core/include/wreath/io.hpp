#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wreath/grammar.hpp"
#include "wreath/likelihood.hpp"
#include "wreath/renderer.hpp"
#include "wreath/wreath_process.hpp"

namespace wreath {

/// Read a PNG as grayscale intensities in [0,1]. Color images collapse by
/// Rec. 709 luminance (0.2126 R + 0.7152 G + 0.0722 B). Throws IoError with
/// code missing_file or malformed_image.
Raster read_png(const std::string& path);

/// Write 8-bit grayscale (values clamped to [0,1], rounded to 0..255).
void write_png(const std::string& path, const Raster& img);
void write_png(const std::string& path, const BinaryImage& img);

/// Shape files: whole-file DSL text, '#' comments allowed.
Shape read_shape_file(const std::string& path, int max_levels = kMaxLevels);
void write_shape_file(const std::string& path, const Shape& s);

/// One thinned MCMC draw as recorded on disk.
struct SampleRecord {
  long long iteration = 0;
  std::string shape;  // serialized DSL
  double lambda = 0.0;
  int blur_half_width = 0;
  double blur_sigma = 0.0;
  double log_posterior = 0.0;
  double log_likelihood = 0.0;
  std::vector<std::optional<double>> sigma;  // per level
  std::optional<std::vector<std::vector<std::vector<double>>>> noise;
};

/// Text records, one block of key=value lines per sample, "---" separated.
/// Numbers round-trip exactly (shortest-form scientific/decimal).
void write_samples(const std::string& path, const std::vector<SampleRecord>& v);
std::vector<SampleRecord> read_samples(const std::string& path);

/// Ordered key=value pairs ('#' comments, blank lines skipped on read).
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues read_key_values(const std::string& path);
void write_key_values(const std::string& path, const KeyValues& kv);
std::optional<std::string> kv_find(const KeyValues& kv, const std::string& key);

/// Everything needed to rerun and audit an inference invocation. Wall-clock
/// time is deliberately absent: reruns with one seed must be byte-identical.
struct RunManifest {
  std::uint64_t seed = 0;
  int chains = 0;
  long long iterations = 0;
  int thin = 1;
  std::string config_digest;
  std::string library_version;
  std::vector<std::pair<std::string, double>> acceptance_rates;
  std::vector<std::pair<std::string, std::string>> extra;
};

void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

/// FNV-1a 64-bit digest, hex-encoded; used for config fingerprints.
std::string digest_hex(const std::string& data);

/// Exact decimal text for doubles (shortest round-trip form).
std::string format_number(double v);
double parse_number(const std::string& s);

}  // namespace wreath

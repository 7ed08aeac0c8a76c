// wreath: command-line driver for the shape toolkit.
//
// Subcommands: render, sample, dataset, infer, eval.
// Exit codes: 0 success, 1 runtime failure, 2 usage/input error.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "wreath/errors.hpp"
#include "wreath/eval.hpp"
#include "wreath/inference.hpp"
#include "wreath/io.hpp"

namespace fs = std::filesystem;
using namespace wreath;

namespace {

constexpr const char* kVersion = "wreath 0.1.0";

/// Bad user input outside the flag parser (config files, directory layouts).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AppConfig {
  PriorConfig prior;
  RenderConfig render;
  ChainConfig chain;
  double binarize_threshold = 0.5;
};

long long parse_int_value(const std::string& key, const std::string& value) {
  const double d = [&] {
    try {
      return parse_number(value);
    } catch (const std::exception&) {
      throw UsageError("config key '" + key + "': not a number: " + value);
    }
  }();
  if (d != std::floor(d))
    throw UsageError("config key '" + key + "': expected an integer");
  return static_cast<long long>(d);
}

double parse_real_value(const std::string& key, const std::string& value) {
  try {
    return parse_number(value);
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': not a number: " + value);
  }
}

bool parse_bool_value(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw UsageError("config key '" + key + "': expected a boolean, got " + value);
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& value) {
  std::vector<int> out;
  std::string item;
  for (std::size_t i = 0; i <= value.size(); ++i) {
    if (i == value.size() || value[i] == ',') {
      if (!item.empty()) {
        out.push_back(static_cast<int>(parse_int_value(key, item)));
        item.clear();
      }
    } else if (!std::isspace(static_cast<unsigned char>(value[i]))) {
      item += value[i];
    }
  }
  if (out.empty()) throw UsageError("config key '" + key + "': empty list");
  return out;
}

void apply_config_entry(AppConfig& cfg, const std::string& key,
                        const std::string& value) {
  // prior
  if (key == "max_levels")
    cfg.prior.max_levels = static_cast<int>(parse_int_value(key, value));
  else if (key == "p_single")
    cfg.prior.p_single = parse_real_value(key, value);
  else if (key == "p_full")
    cfg.prior.p_full = parse_real_value(key, value);
  else if (key == "b_max")
    cfg.prior.b_max = static_cast<int>(parse_int_value(key, value));
  else if (key == "rot_orders")
    cfg.prior.rot_orders = parse_int_list(key, value);
  else if (key == "rot_continuous")
    cfg.prior.rot_continuous = parse_bool_value(key, value);
  else if (key == "rotfull_special_max")
    cfg.prior.rotfull_special_max = static_cast<int>(parse_int_value(key, value));
  else if (key == "b_w")
    cfg.prior.b_w = parse_real_value(key, value);
  else if (key == "b_sigma")
    cfg.prior.b_sigma = parse_real_value(key, value);
  else if (key == "lambda_min")
    cfg.prior.lambda_min = parse_real_value(key, value);
  else if (key == "lambda_max")
    cfg.prior.lambda_max = parse_real_value(key, value);
  // noise hyper-prior
  else if (key == "gamma_parametrization") {
    if (value == "rate")
      cfg.prior.noise.gamma_by_rate = true;
    else if (value == "scale")
      cfg.prior.noise.gamma_by_rate = false;
    else
      throw UsageError("config key 'gamma_parametrization': rate or scale");
  } else if (key == "rotfull_noise_order")
    cfg.prior.noise.rotfull_order = static_cast<int>(parse_int_value(key, value));
  // render
  else if (key == "width")
    cfg.render.width = static_cast<int>(parse_int_value(key, value));
  else if (key == "height")
    cfg.render.height = static_cast<int>(parse_int_value(key, value));
  else if (key == "stroke_width")
    cfg.render.stroke_width = parse_real_value(key, value);
  else if (key == "supersample")
    cfg.render.supersample = static_cast<int>(parse_int_value(key, value));
  else if (key == "control_points")
    cfg.render.control_points = static_cast<int>(parse_int_value(key, value));
  // chain
  else if (key == "iterations")
    cfg.chain.iterations = parse_int_value(key, value);
  else if (key == "thin")
    cfg.chain.thin = static_cast<int>(parse_int_value(key, value));
  else if (key == "level_decay")
    cfg.chain.level_decay = parse_real_value(key, value);
  else if (key == "p_min")
    cfg.chain.p_min = parse_real_value(key, value);
  else if (key == "freeze_below_level")
    cfg.chain.freeze_below_level = static_cast<int>(parse_int_value(key, value));
  else if (key == "keep_noise")
    cfg.chain.keep_noise_in_samples = parse_bool_value(key, value);
  else if (key == "w_noise")
    cfg.chain.weights.noise = parse_real_value(key, value);
  else if (key == "w_blur")
    cfg.chain.weights.blur = parse_real_value(key, value);
  else if (key == "w_lambda")
    cfg.chain.weights.lambda = parse_real_value(key, value);
  else if (key == "w_shape_within")
    cfg.chain.weights.shape_within = parse_real_value(key, value);
  else if (key == "w_shape_transdim")
    cfg.chain.weights.shape_transdim = parse_real_value(key, value);
  // likelihood ingest
  else if (key == "binarize_threshold")
    cfg.binarize_threshold = parse_real_value(key, value);
  else
    throw UsageError("unknown config key: " + key);
}

/// Load --config (or $WREATHE_CONFIG when the flag is absent) on top of the
/// defaults.
AppConfig load_config(const std::string& config_flag) {
  AppConfig cfg;
  std::string path = config_flag;
  if (path.empty()) {
    if (const char* env = std::getenv("WREATHE_CONFIG")) path = env;
  }
  if (path.empty()) return cfg;
  KeyValues kv;
  try {
    kv = read_key_values(path);
  } catch (const IoError& e) {
    throw UsageError(std::string("config file: ") + e.what());
  }
  for (const auto& [key, value] : kv) apply_config_entry(cfg, key, value);
  return cfg;
}

/// Deterministic fingerprint of the effective configuration.
std::string config_digest(const AppConfig& cfg) {
  std::string text;
  const auto add = [&text](const std::string& k, const std::string& v) {
    text += k;
    text += '=';
    text += v;
    text += '\n';
  };
  add("max_levels", std::to_string(cfg.prior.max_levels));
  add("p_single", format_number(cfg.prior.p_single));
  add("p_full", format_number(cfg.prior.p_full));
  add("b_max", std::to_string(cfg.prior.b_max));
  {
    std::string orders;
    for (const int n : cfg.prior.rot_orders) {
      if (!orders.empty()) orders += ',';
      orders += std::to_string(n);
    }
    add("rot_orders", orders);
  }
  add("rot_continuous", cfg.prior.rot_continuous ? "1" : "0");
  add("rotfull_special_max", std::to_string(cfg.prior.rotfull_special_max));
  add("b_w", format_number(cfg.prior.b_w));
  add("b_sigma", format_number(cfg.prior.b_sigma));
  add("lambda_min", format_number(cfg.prior.lambda_min));
  add("lambda_max", format_number(cfg.prior.lambda_max));
  add("gamma_parametrization", cfg.prior.noise.gamma_by_rate ? "rate" : "scale");
  add("rotfull_noise_order", std::to_string(cfg.prior.noise.rotfull_order));
  add("width", std::to_string(cfg.render.width));
  add("height", std::to_string(cfg.render.height));
  add("stroke_width", format_number(cfg.render.stroke_width));
  add("supersample", std::to_string(cfg.render.supersample));
  add("control_points", std::to_string(cfg.render.control_points));
  add("iterations", std::to_string(cfg.chain.iterations));
  add("thin", std::to_string(cfg.chain.thin));
  add("level_decay", format_number(cfg.chain.level_decay));
  add("p_min", format_number(cfg.chain.p_min));
  add("freeze_below_level", std::to_string(cfg.chain.freeze_below_level));
  add("keep_noise", cfg.chain.keep_noise_in_samples ? "1" : "0");
  add("w_noise", format_number(cfg.chain.weights.noise));
  add("w_blur", format_number(cfg.chain.weights.blur));
  add("w_lambda", format_number(cfg.chain.weights.lambda));
  add("w_shape_within", format_number(cfg.chain.weights.shape_within));
  add("w_shape_transdim", format_number(cfg.chain.weights.shape_transdim));
  add("binarize_threshold", format_number(cfg.binarize_threshold));
  return digest_hex(text);
}

std::string item_name(int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "item_%04d%s", index, ext);
  return buf;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec && !fs::is_directory(path))
    throw IoError(IoCode::unwritable_path, "cannot create directory: " + path);
}

std::vector<SampleRecord> to_records(const ChainResult& res) {
  std::vector<SampleRecord> records;
  records.reserve(res.samples.size());
  for (const PosteriorSample& s : res.samples) {
    SampleRecord r;
    r.iteration = s.iteration;
    r.shape = serialize_shape(s.shape);
    r.lambda = s.lambda;
    r.blur_half_width = s.blur.half_width;
    r.blur_sigma = s.blur.sigma;
    r.log_posterior = s.log_posterior;
    r.log_likelihood = s.log_likelihood;
    r.sigma = s.hyper.sigma;
    if (s.noise) r.noise = s.noise->levels;
    records.push_back(std::move(r));
  }
  return records;
}

void write_state_outputs(const std::string& dir, const std::string& stem,
                         const ModelState& st, const RenderConfig& render) {
  write_shape_file(dir + "/" + stem + ".wreath", st.shape);
  RenderConfig rc = render;
  rc.scale = st.lambda;
  const Raster img =
      wreath::render(st.shape, &st.noise, st.blur, rc);
  write_png(dir + "/" + stem + ".png", img);
}

// ---------------------------------------------------------------------------

int cmd_render(const std::string& shape_file, const std::string& out_png,
               bool noisy, std::uint64_t seed, double lambda, int size,
               const std::vector<double>& blur_flag,
               const std::string& config_flag) {
  AppConfig cfg = load_config(config_flag);
  RenderConfig rc = cfg.render;
  if (size > 0) {
    rc.width = size;
    rc.height = size;
  }
  if (lambda > 0) rc.scale = lambda;
  BlurParams blur;  // identity unless requested
  if (!blur_flag.empty()) {
    blur.half_width = static_cast<int>(blur_flag[0]);
    blur.sigma = blur_flag.size() > 1 ? blur_flag[1] : 1.0;
  }
  const Shape s = read_shape_file(shape_file, cfg.prior.max_levels);
  std::unique_ptr<NoiseTree> noise;
  if (noisy) {
    Rng rng(seed);
    const NoiseHyper hyper = sample_hyper(s, rng, cfg.prior.noise);
    noise = std::make_unique<NoiseTree>(
        sample_noise(s, hyper, rng, rc.control_points));
  }
  write_png(out_png, wreath::render(s, noise.get(), blur, rc));
  return 0;
}

int cmd_sample(const std::string& out_dir, int n, std::uint64_t seed,
               const std::string& config_flag) {
  AppConfig cfg = load_config(config_flag);
  ensure_dir(out_dir);
  for (int i = 0; i < n; ++i) {
    Rng rng(seed + static_cast<std::uint64_t>(i));
    const Shape s = sample_shape_prior(rng, cfg.prior);
    const NoiseHyper h = sample_hyper(s, rng, cfg.prior.noise);
    const NoiseTree t = sample_noise(s, h, rng, cfg.render.control_points);
    const BlurParams b = sample_blur(rng, cfg.prior);
    const double lambda = sample_lambda(rng, cfg.prior);
    RenderConfig rc = cfg.render;
    rc.scale = lambda;
    write_shape_file(out_dir + "/" + item_name(i, ".wreath"), s);
    write_png(out_dir + "/" + item_name(i, ".png"),
              wreath::render(s, &t, b, rc));
  }
  RunManifest m;
  m.seed = seed;
  m.config_digest = config_digest(cfg);
  m.library_version = kVersion;
  m.extra.emplace_back("command", "sample");
  m.extra.emplace_back("count", std::to_string(n));
  write_manifest(out_dir + "/manifest.txt", m);
  return 0;
}

int cmd_dataset(const std::string& out_dir, int n, std::uint64_t seed,
                int restrict_levels, const std::string& config_flag) {
  AppConfig cfg = load_config(config_flag);
  if (restrict_levels > 0) cfg.prior.max_levels = restrict_levels;
  ensure_dir(out_dir);
  const std::vector<DatasetItem> items =
      make_dataset(n, seed, cfg.prior, cfg.render);
  for (int i = 0; i < n; ++i) {
    const DatasetItem& item = items[static_cast<std::size_t>(i)];
    write_shape_file(out_dir + "/" + item_name(i, ".wreath"), item.shape);
    write_png(out_dir + "/" + item_name(i, ".png"), item.rendered);
    KeyValues meta;
    meta.emplace_back("lambda", format_number(item.lambda));
    meta.emplace_back("blur_half_width",
                      std::to_string(item.blur.half_width));
    meta.emplace_back("blur_sigma", format_number(item.blur.sigma));
    meta.emplace_back("levels", std::to_string(item.shape.level_count()));
    write_key_values(out_dir + "/" + item_name(i, ".meta"), meta);
  }
  RunManifest m;
  m.seed = seed;
  m.config_digest = config_digest(cfg);
  m.library_version = kVersion;
  m.extra.emplace_back("command", "dataset");
  m.extra.emplace_back("count", std::to_string(n));
  if (restrict_levels > 0)
    m.extra.emplace_back("restrict_levels", std::to_string(restrict_levels));
  write_manifest(out_dir + "/manifest.txt", m);
  return 0;
}

int cmd_infer(const std::string& in_png, const std::string& out_dir,
              long long iterations, int chains, std::uint64_t seed,
              int restrict_levels, int thin, bool keep_noise, bool verbose,
              const std::string& config_flag) {
  AppConfig cfg = load_config(config_flag);
  if (restrict_levels > 0) cfg.prior.max_levels = restrict_levels;
  if (iterations > 0) cfg.chain.iterations = iterations;
  if (thin > 0) cfg.chain.thin = thin;
  cfg.chain.keep_noise_in_samples =
      cfg.chain.keep_noise_in_samples || keep_noise;
  cfg.chain.verbose = verbose;
  ensure_dir(out_dir);

  const Raster obs_raster = read_png(in_png);
  const BinaryImage obs = binarize(obs_raster, cfg.binarize_threshold);
  RenderConfig rc = cfg.render;
  rc.width = obs.width;
  rc.height = obs.height;

  std::vector<ChainResult> results(static_cast<std::size_t>(chains));
  std::vector<std::string> failures(static_cast<std::size_t>(chains));
  {
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(chains));
    for (int c = 0; c < chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          ChainConfig cc = cfg.chain;
          cc.seed = seed + static_cast<std::uint64_t>(c);
          results[static_cast<std::size_t>(c)] =
              run_chain(&obs, cfg.prior, rc, cc);
        } catch (const std::exception& e) {
          failures[static_cast<std::size_t>(c)] = e.what();
        }
      });
    }
    for (std::thread& w : workers) w.join();
  }
  for (int c = 0; c < chains; ++c)
    if (!failures[static_cast<std::size_t>(c)].empty())
      throw Error("chain " + std::to_string(c) + " failed: " +
                  failures[static_cast<std::size_t>(c)]);

  int best = 0;
  for (int c = 1; c < chains; ++c) {
    if (results[static_cast<std::size_t>(c)].map_state.log_posterior() >
        results[static_cast<std::size_t>(best)].map_state.log_posterior())
      best = c;
  }

  for (int c = 0; c < chains; ++c) {
    const ChainResult& res = results[static_cast<std::size_t>(c)];
    char stem[32];
    std::snprintf(stem, sizeof(stem), "chain_%02d", c);
    write_samples(out_dir + "/" + stem + ".samples", to_records(res));
    write_state_outputs(out_dir, std::string(stem) + "_map", res.map_state, rc);
    write_state_outputs(out_dir, std::string(stem) + "_ml", res.ml_state, rc);
    RunManifest m;
    m.seed = seed + static_cast<std::uint64_t>(c);
    m.chains = 1;
    m.iterations = cfg.chain.iterations;
    m.thin = cfg.chain.thin;
    m.config_digest = config_digest(cfg);
    m.library_version = kVersion;
    m.acceptance_rates = res.acceptance_rates;
    m.extra.emplace_back("command", "infer");
    m.extra.emplace_back("input", fs::path(in_png).filename().string());
    m.extra.emplace_back("chain_index", std::to_string(c));
    m.extra.emplace_back(
        "map_log_posterior",
        format_number(res.map_state.log_posterior()));
    write_manifest(out_dir + "/" + stem + "_manifest.txt", m);
  }

  // Cross-chain winners, for downstream evaluation.
  const ModelState& map_state =
      results[static_cast<std::size_t>(best)].map_state;
  int best_ml = 0;
  for (int c = 1; c < chains; ++c) {
    if (results[static_cast<std::size_t>(c)].ml_state.log_lik >
        results[static_cast<std::size_t>(best_ml)].ml_state.log_lik)
      best_ml = c;
  }
  write_state_outputs(out_dir, "map", map_state, rc);
  write_state_outputs(out_dir, "ml",
                      results[static_cast<std::size_t>(best_ml)].ml_state, rc);
  RunManifest m;
  m.seed = seed;
  m.chains = chains;
  m.iterations = cfg.chain.iterations;
  m.thin = cfg.chain.thin;
  m.config_digest = config_digest(cfg);
  m.library_version = kVersion;
  m.extra.emplace_back("command", "infer");
  m.extra.emplace_back("input", fs::path(in_png).filename().string());
  m.extra.emplace_back("best_chain", std::to_string(best));
  m.extra.emplace_back("map_lambda", format_number(map_state.lambda));
  m.extra.emplace_back("map_log_posterior",
                       format_number(map_state.log_posterior()));
  write_manifest(out_dir + "/manifest.txt", m);
  return 0;
}

/// The inferred shape for item i: either item_%04d.wreath (flat layout) or
/// item_%04d/map.wreath (one infer output directory per item).
struct InferredItem {
  Shape shape;
  double lambda;
};

InferredItem load_inferred(const std::string& dir, int index, double fallback,
                           int max_levels) {
  const std::string flat = dir + "/" + item_name(index, ".wreath");
  const std::string sub = dir + "/" + item_name(index, "");
  InferredItem item{{}, fallback};
  if (fs::exists(flat)) {
    item.shape = read_shape_file(flat, max_levels);
    const std::string meta = dir + "/" + item_name(index, ".meta");
    if (fs::exists(meta)) {
      if (const auto v = kv_find(read_key_values(meta), "lambda"))
        item.lambda = parse_number(*v);
    }
    return item;
  }
  if (fs::exists(sub + "/map.wreath")) {
    item.shape = read_shape_file(sub + "/map.wreath", max_levels);
    if (fs::exists(sub + "/manifest.txt")) {
      const RunManifest m = read_manifest(sub + "/manifest.txt");
      for (const auto& [k, v] : m.extra)
        if (k == "map_lambda") item.lambda = parse_number(v);
    }
    return item;
  }
  throw UsageError("no inferred shape for item " + std::to_string(index) +
                   " in " + dir);
}

int cmd_eval(const std::string& dataset_dir, const std::string& inferred_dir,
             const std::string& report_flag, const std::string& config_flag) {
  AppConfig cfg = load_config(config_flag);
  std::vector<EvalResult> verdicts;
  for (int i = 0;; ++i) {
    const std::string truth_path = dataset_dir + "/" + item_name(i, ".wreath");
    if (!fs::exists(truth_path)) {
      // The inferred side must not have extra items.
      if (fs::exists(inferred_dir + "/" + item_name(i, ".wreath")) ||
          fs::exists(inferred_dir + "/" + item_name(i, "") + "/map.wreath"))
        throw UsageError("inferred directory has more items than the dataset");
      break;
    }
    const Shape truth = read_shape_file(truth_path, 1 << 10);
    double truth_lambda = cfg.render.scale;
    const std::string meta = dataset_dir + "/" + item_name(i, ".meta");
    if (fs::exists(meta)) {
      if (const auto v = kv_find(read_key_values(meta), "lambda"))
        truth_lambda = parse_number(*v);
    }
    const InferredItem inferred =
        load_inferred(inferred_dir, i, cfg.render.scale, 1 << 10);
    verdicts.push_back(recoverability(inferred.shape, truth, inferred.lambda,
                                      truth_lambda, cfg.render));
  }
  if (verdicts.empty()) throw UsageError("dataset directory has no items");
  const EvalSummary s = batch_evaluate(verdicts);

  KeyValues report;
  report.emplace_back("count", std::to_string(s.count));
  report.emplace_back("full_fraction", format_number(s.full_fraction));
  report.emplace_back("up_to_occupancy_fraction",
                      format_number(s.up_to_occupancy_fraction));
  report.emplace_back("mean_render_iou", format_number(s.mean_render_iou));
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const EvalResult& r = verdicts[i];
    report.emplace_back(
        "item_" + std::to_string(i),
        std::string(r.full_recoverability ? "full" : r.up_to_occupancy
                                                         ? "occupancy"
                                                         : "miss") +
            "," + format_number(r.render_iou));
  }
  std::string report_path = report_flag;
  if (report_path.empty()) report_path = inferred_dir + "/report.txt";
  write_key_values(report_path, report);
  for (const auto& [k, v] : report) std::printf("%s=%s\n", k.c_str(), v.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-theoretic generative shapes: render, sample, and infer "
               "generative histories from binarized images."};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.fallthrough();

  std::string config_flag;
  app.add_option("--config", config_flag,
                 "key=value configuration file (falls back to $WREATHE_CONFIG)");

  // render
  auto* render_cmd =
      app.add_subcommand("render", "Render a shape file to a PNG");
  std::string shape_file, out_png;
  bool noisy = false;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  int size = 0;
  std::vector<double> blur_flag;
  render_cmd->add_option("shape", shape_file, "input .wreath file")->required();
  render_cmd->add_option("out", out_png, "output .png path")->required();
  render_cmd->add_flag("--noisy", noisy, "draw noise scales and noise");
  render_cmd->add_option("--seed", seed, "noise seed (with --noisy)");
  render_cmd->add_option("--lambda", lambda, "pixels per model unit");
  render_cmd->add_option("--size", size, "square canvas side, pixels");
  render_cmd->add_option("--blur", blur_flag, "half-width and sigma")
      ->expected(1, 2);

  // sample
  auto* sample_cmd =
      app.add_subcommand("sample", "Draw prior shapes and their noisy renders");
  std::string out_dir;
  int n_items = 10;
  sample_cmd->add_option("out_dir", out_dir, "output directory")->required();
  sample_cmd->add_option("--n", n_items, "number of draws");
  sample_cmd->add_option("--seed", seed, "base seed (item i uses seed+i)");

  // dataset
  auto* dataset_cmd = app.add_subcommand(
      "dataset", "Generate an evaluation dataset (inked renders + truth)");
  int restrict_levels = 0;
  dataset_cmd->add_option("out_dir", out_dir, "output directory")->required();
  dataset_cmd->add_option("--n", n_items, "number of items");
  dataset_cmd->add_option("--seed", seed, "base seed (item i uses seed+i)");
  dataset_cmd->add_option("--restrict-levels", restrict_levels,
                          "cap on levels per shape");

  // infer
  auto* infer_cmd = app.add_subcommand(
      "infer", "Recover generative histories from a binarized image");
  std::string in_png;
  long long iterations = 0;
  int chains = 1, thin = 0;
  bool keep_noise = false, verbose = false;
  infer_cmd->add_option("image", in_png, "input PNG")->required();
  infer_cmd->add_option("out_dir", out_dir, "output directory")->required();
  infer_cmd->add_option("--iterations", iterations, "steps per chain");
  infer_cmd->add_option("--chains", chains, "parallel chains");
  infer_cmd->add_option("--seed", seed, "base seed (chain c uses seed+c)");
  infer_cmd->add_option("--restrict-levels", restrict_levels,
                        "cap on levels per shape");
  infer_cmd->add_option("--thin", thin, "record every k-th iteration");
  infer_cmd->add_flag("--keep-noise", keep_noise,
                      "include noise trees in sample records");
  infer_cmd->add_flag("--verbose", verbose, "progress to stderr");

  // eval
  auto* eval_cmd = app.add_subcommand(
      "eval", "Score inferred shapes against a dataset's ground truth");
  std::string dataset_dir, inferred_dir, report_flag;
  eval_cmd->add_option("dataset_dir", dataset_dir, "dataset directory")
      ->required();
  eval_cmd->add_option("inferred_dir", inferred_dir,
                       "directory of inferred shapes (flat or per-item)")
      ->required();
  eval_cmd->add_option("--report", report_flag,
                       "report path (default: inferred_dir/report.txt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors are exit 2; --help/--version 0
  }

  try {
    if (render_cmd->parsed())
      return cmd_render(shape_file, out_png, noisy, seed, lambda, size,
                        blur_flag, config_flag);
    if (sample_cmd->parsed())
      return cmd_sample(out_dir, n_items, seed, config_flag);
    if (dataset_cmd->parsed())
      return cmd_dataset(out_dir, n_items, seed, restrict_levels, config_flag);
    if (infer_cmd->parsed())
      return cmd_infer(in_png, out_dir, iterations, chains, seed,
                       restrict_levels, thin, keep_noise, verbose, config_flag);
    if (eval_cmd->parsed())
      return cmd_eval(dataset_dir, inferred_dir, report_flag, config_flag);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code == IoCode::missing_file || e.code == IoCode::malformed_image ||
                   e.code == IoCode::malformed_record
               ? 2
               : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

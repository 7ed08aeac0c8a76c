#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wreath/likelihood.hpp"
#include "wreath/priors.hpp"

namespace wreath {

/// Full latent state of one chain, with cached derived quantities. The caches
/// are functions of the other fields; make_state recomputes them from scratch
/// and every proposal goes through it, so they can never drift.
struct ModelState {
  Shape shape;
  NoiseHyper hyper;
  NoiseTree noise;
  BlurParams blur;
  double lambda = 10.0;

  Raster raster;           // pre-blur rasterization (empty when unobserved)
  Raster rendered;         // post-blur
  double log_lik = 0.0;    // 0 when running against no observation
  double log_prior = 0.0;  // shape + hyper + noise + blur + lambda
  double log_posterior() const { return log_prior + log_lik; }
};

struct MoveWeights {
  double noise = 0.40;
  double blur = 0.10;
  double lambda = 0.05;
  double shape_within = 0.30;
  double shape_transdim = 0.15;
};

struct ChainConfig {
  long long iterations = 10000;
  std::uint64_t seed = 0;
  int thin = 10;
  MoveWeights weights;
  double level_decay = 0.5;    // geometric bias toward inner levels
  double p_min = 1e-4;         // likelihood probability clamp
  int freeze_below_level = 0;  // test knob: levels <= this are never mutated
                               // (disables trans-dimensional moves when > 0)
  bool keep_noise_in_samples = false;
  bool verbose = false;
};

struct PosteriorSample {
  long long iteration = 0;
  Shape shape;
  BlurParams blur;
  double lambda = 0.0;
  double log_posterior = 0.0;
  double log_likelihood = 0.0;
  NoiseHyper hyper;
  std::optional<NoiseTree> noise;
};

/// A proposed move. correction = log q(reverse) - log q(forward); the
/// Metropolis-Hastings ratio is exp(delta log posterior + correction).
struct Proposal {
  ModelState state;
  double correction = 0.0;
  bool valid = true;  // false: auto-rejected (empty menu, broken structure...)
};

struct ChainResult {
  std::vector<PosteriorSample> samples;
  ModelState map_state;  // highest posterior
  ModelState ml_state;   // highest likelihood
  std::vector<std::pair<std::string, double>> acceptance_rates;
  long long iterations = 0;
};

double acceptance_probability(const ModelState& current, const Proposal& p);

/// Shared proposal/evaluation machinery for one observation (or none: pass
/// nullptr to sample the prior — the likelihood is identically zero and no
/// rendering happens). Holds a small LRU of pre-blur rasters keyed by
/// (shape, noise, lambda).
class Sampler {
 public:
  Sampler(const BinaryImage* obs, PriorConfig prior, RenderConfig render,
          ChainConfig chain);

  /// Assemble a state and (re)compute all caches.
  ModelState make_state(Shape s, NoiseHyper h, NoiseTree n, BlurParams b,
                        double lambda);
  /// Draw a full state from the prior.
  ModelState init_state(Rng& rng);

  Proposal propose_noise(const ModelState& cur, Rng& rng);
  Proposal propose_blur(const ModelState& cur, Rng& rng);
  Proposal propose_lambda(const ModelState& cur, Rng& rng);
  Proposal propose_shape_within(const ModelState& cur, Rng& rng);
  Proposal propose_shape_transdim(const ModelState& cur, Rng& rng);

  ChainResult run(Rng& rng);

  const PriorConfig& prior() const { return prior_; }
  const RenderConfig& render_config() const { return render_; }
  const ChainConfig& chain_config() const { return chain_; }
  const BinaryImage* observation() const { return obs_; }

 private:
  double rerender(ModelState& st);  // fills raster/rendered/log_lik
  double cached_raster(const ModelState& st, Raster* out);

  const BinaryImage* obs_;
  PriorConfig prior_;
  RenderConfig render_;
  ChainConfig chain_;

  struct CacheEntry {
    std::string key;
    Raster raster;
    bool overflow = false;  // unfold blew the point budget
  };
  std::list<CacheEntry> lru_;
  std::unordered_map<std::string, std::list<CacheEntry>::iterator> lru_index_;
};

/// Convenience wrapper: construct a Sampler, run one chain seeded from
/// cfg.seed, return its samples and best states.
ChainResult run_chain(const BinaryImage* obs, const PriorConfig& prior,
                      const RenderConfig& render, const ChainConfig& chain);

}  // namespace wreath

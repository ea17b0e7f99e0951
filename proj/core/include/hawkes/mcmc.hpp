#pragma once

#include "hawkes/bmds.hpp"
#include "hawkes/geometry.hpp"
#include "hawkes/gradients.hpp"
#include "hawkes/likelihood_cache.hpp"
#include "hawkes/math.hpp"
#include "hawkes/model.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hawkes {

enum class ModelMode : std::uint8_t { Grouped, Bmds };

/// Hawkes: the real likelihood. Flat: a constant, used to check stationary marginals.
enum class LikelihoodKind : std::uint8_t { Hawkes, Flat };

struct SamplerConfig {
  std::uint64_t iterations = 10000;  ///< one random-scan move per iteration
  std::uint64_t burn_in = 2000;      ///< adaptation runs only during burn-in
  std::uint64_t thin = 10;
  std::size_t block_size = 10;
  int leapfrog_steps = 20;
  double step_size = 0.01;
  double hmc_target_acceptance = 0.65;
  std::size_t hmc_block_size = 0;  ///< 0 = update all latent locations jointly
  double param_move_prob = 0.2;
  double location_move_prob = 0.8;
  double sigma2_move_prob = 0.0;
  std::uint64_t seed = 1;
  ExecutionPlan plan{};

  static SamplerConfig grouped_defaults();
  static SamplerConfig bmds_defaults();
  void validate() const;
};

/// Everything the chain conditions on.
struct ModelSpec {
  explicit ModelSpec(EventCatalog observed_events) : observed(std::move(observed_events)) {}

  EventCatalog observed;                     ///< observed (coarsened) locations and times
  ModelMode mode = ModelMode::Grouped;
  LikelihoodKind likelihood = LikelihoodKind::Hawkes;
  std::vector<UncertaintyRegion> regions;    ///< grouped mode, one per event
  const DistanceMatrix* distances = nullptr; ///< BMDS mode
  const PairMask* observed_pairs = nullptr;  ///< BMDS training mask (cross-validation)
  ParamPriors priors{};
  double log_sigma2_prior_mean = 0.0;
  double log_sigma2_prior_sd = 2.0;
};

struct MoveCounter {
  std::uint64_t attempted = 0;
  std::uint64_t accepted = 0;
  double rate() const {
    return attempted == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempted);
  }
};

struct ChainState {
  HawkesParams params;
  LocationMatrix locations;
  std::optional<double> sigma2;
  std::vector<ProposalTuning> location_tuning;
  std::array<ProposalTuning, HawkesParams::kCount> param_tuning{};
  ProposalTuning sigma2_tuning{};
  double hmc_step_size = 0.01;
  std::uint64_t hmc_adapt_updates = 0;
  std::uint64_t iteration = 0;
  Rng rng{1};
  MoveCounter param_moves;
  MoveCounter location_moves;
  MoveCounter hmc_moves;
  MoveCounter sigma2_moves;
};

struct Snapshot {
  std::uint64_t iteration = 0;
  HawkesParams params;
  std::optional<double> sigma2;
  double log_likelihood = 0.0;
  LocationMatrix locations;
};

/// Prior medians of the half-normal priors, adjusted to satisfy 1/omega < tau_t and h < tau_x.
HawkesParams initial_params(const ParamPriors& priors);

/// Owns one chain: state plus the incremental likelihood cache.
class Sampler {
 public:
  Sampler(const ModelSpec& model, const SamplerConfig& config);
  /// Starts from explicit parameters and locations instead of the default initialization.
  Sampler(const ModelSpec& model, const SamplerConfig& config, const HawkesParams& params,
          const LocationMatrix& locations, std::optional<double> sigma2 = std::nullopt);

  const ChainState& state() const { return state_; }
  ChainState& mutable_state() { return state_; }
  const ModelSpec& model() const { return model_; }
  const SamplerConfig& config() const { return config_; }

  double hawkes_log_likelihood() const;
  double bmds_log_likelihood() const { return bmds_log_lik_; }
  double log_posterior() const;

  /// Random-walk MH on one uniformly chosen log-parameter.
  bool step_params(bool adapt);
  /// Joint proposal for the given events from their region kernels.
  bool step_locations_block(std::span<const std::size_t> block, bool adapt);
  /// Draws a block of config.block_size movable events and calls step_locations_block.
  bool step_locations_random_block(bool adapt);
  /// Leapfrog HMC over latent locations (BMDS mode).
  bool hmc_step_locations(bool adapt);
  /// Random walk on log sigma^2 (BMDS mode).
  bool step_sigma2(bool adapt);
  /// One random-scan iteration; adaptation while iteration < burn_in.
  void step();

  Snapshot snapshot() const;

  /// Potential energy U(X) = -(Hawkes ell + BMDS log density) and its gradient.
  double potential(const LocationMatrix& x) const;
  LocationMatrix potential_gradient(const LocationMatrix& x) const;

 private:
  void initialise(const HawkesParams& params, const LocationMatrix& locations,
                  std::optional<double> sigma2);
  double bmds_density_at(const LocationMatrix& x, double sigma2) const;

  ModelSpec model_;
  SamplerConfig config_;
  ChainState state_;
  std::optional<LikelihoodCache> cache_;
  double bmds_log_lik_ = 0.0;
  std::vector<std::size_t> movable_;
};

/// Leapfrog trajectory of L steps with unit mass. grad_u returns dU/dx.
/// Returns false if a non-finite gradient or position appears.
bool leapfrog(LocationMatrix& x, LocationMatrix& p, double step_size, int steps,
              const std::function<LocationMatrix(const LocationMatrix&)>& grad_u);

using SnapshotSink = std::function<void(const Snapshot&)>;

struct ChainResult {
  std::vector<Snapshot> snapshots;
  ChainState final_state;
};

/// Runs config.iterations random-scan moves; snapshots every `thin` iterations after burn-in.
/// When a sink is supplied snapshots are streamed to it and not retained.
ChainResult run_chain(const SamplerConfig& config, const ModelSpec& model,
                      const SnapshotSink& sink = {});

// --- diagnostics ---------------------------------------------------------------------------

enum class EssFlag : std::uint8_t { Ok, Antithetic, Constant };

struct EssResult {
  double value = 0.0;
  EssFlag flag = EssFlag::Ok;
};

/// Initial-positive-sequence estimator: ESS = S / (1 + 2 sum_k rho_k), capped at S log10 S.
EssResult ess(std::span<const double> samples);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double prob);

struct QuantitySummary {
  std::string name;
  std::string unit;
  double mean = 0.0;
  double median = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double ess = 0.0;  ///< clamped to (0, S]; see ess_flag for antithetic or constant series
  EssFlag ess_flag = EssFlag::Ok;
};

QuantitySummary summarize_quantity(std::string name, std::string unit, std::span<const double> values);

struct PosteriorSummary {
  std::vector<QuantitySummary> quantities;
  std::vector<double> displacement;             ///< |mean_s x_n^(s) - observed_n|
  std::vector<double> self_excitation_probability;  ///< mean_s xi_n / (xi_n + mu_n)
};

/// Per-parameter summaries plus per-event displacement and self-excitation probability.
PosteriorSummary posterior_diagnostics(std::span<const Snapshot> snapshots, const EventCatalog& observed);

}  // namespace hawkes

#include "hawkes/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hawkes {

namespace {

constexpr double kHalfNormalMedian = 0.6744897501960817;  // Phi^{-1}(0.75)

// Parameters whose prior is placed on the reciprocal.
constexpr std::array<bool, HawkesParams::kCount> kPriorOnInverse = {false, true, true,
                                                                     false, false, true};

// log |d u / d log v| where u is the prior variable (v or 1/v); equals log u.
double log_jacobian(const HawkesParams& p, std::size_t k) {
  const double v = p.get(k);
  return kPriorOnInverse[k] ? -std::log(v) : std::log(v);
}

ProposalTuning param_tuning_default() {
  ProposalTuning t;
  t.epsilon = 0.1;
  t.min_epsilon = 1e-6;
  t.max_epsilon = 5.0;
  return t;
}

}  // namespace

SamplerConfig SamplerConfig::grouped_defaults() { return SamplerConfig{}; }

SamplerConfig SamplerConfig::bmds_defaults() {
  SamplerConfig c;
  c.param_move_prob = 0.3;
  c.location_move_prob = 0.6;
  c.sigma2_move_prob = 0.1;
  return c;
}

void SamplerConfig::validate() const {
  if (thin < 1) throw std::invalid_argument("sampler: thin must be >= 1");
  if (burn_in > iterations) throw std::invalid_argument("sampler: burn-in exceeds iterations");
  if (block_size < 1) throw std::invalid_argument("sampler: block size must be >= 1");
  if (leapfrog_steps < 1) throw std::invalid_argument("sampler: leapfrog steps must be >= 1");
  if (!(step_size > 0.0)) throw std::invalid_argument("sampler: step size must be positive");
  const double probs[] = {param_move_prob, location_move_prob, sigma2_move_prob};
  for (double p : probs) {
    if (!(p >= 0.0) || p > 1.0) throw std::invalid_argument("sampler: move probabilities must be in [0, 1]");
  }
  if (std::abs(param_move_prob + location_move_prob + sigma2_move_prob - 1.0) > 1e-9) {
    throw std::invalid_argument("sampler: move probabilities must sum to 1");
  }
  plan.validate();
}

HawkesParams initial_params(const ParamPriors& priors) {
  HawkesParams p;
  p.mu0 = kHalfNormalMedian * priors.mu0_sd;
  p.theta = kHalfNormalMedian * priors.theta_sd;
  p.tau_x = 1.0 / (kHalfNormalMedian * priors.inv_tau_x_sd);
  p.tau_t = 1.0 / (kHalfNormalMedian * priors.inv_tau_t_sd);
  p.omega = kHalfNormalMedian * priors.omega_sd;
  p.h = 1.0 / (kHalfNormalMedian * priors.inv_h_sd);
  if (!(1.0 / p.omega < p.tau_t)) p.tau_t = 2.0 / p.omega;
  if (!(p.h < p.tau_x)) p.tau_x = 2.0 * p.h;
  return p;
}

Sampler::Sampler(const ModelSpec& model, const SamplerConfig& config)
    : model_(model), config_(config) {
  config_.validate();
  const HawkesParams params = initial_params(model_.priors);
  if (model_.mode == ModelMode::Bmds) {
    if (model_.distances == nullptr) throw std::invalid_argument("sampler: BMDS mode needs distances");
    auto mds = classical_mds_init(*model_.distances, model_.observed.dimension());
    LocationMatrix x = mds.coordinates;
    // Separate coincident points so the BMDS gradient is defined.
    Rng jitter(config_.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> norm(0.0, 1e-6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += norm(jitter);
    double ss = 0.0;
    std::size_t pairs = 0;
    for (Eigen::Index i = 1; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        if (model_.observed_pairs && !(*model_.observed_pairs)(i, j)) continue;
        const double r = (*model_.distances)(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) -
                         (x.row(i) - x.row(j)).norm();
        ss += r * r;
        ++pairs;
      }
    }
    const double sigma2 = std::max(pairs > 0 ? ss / static_cast<double>(pairs) : 1.0, 1e-4);
    initialise(params, x, sigma2);
  } else {
    initialise(params, model_.observed.locations(), std::nullopt);
  }
}

Sampler::Sampler(const ModelSpec& model, const SamplerConfig& config, const HawkesParams& params,
                 const LocationMatrix& locations, std::optional<double> sigma2)
    : model_(model), config_(config) {
  config_.validate();
  if (model_.mode == ModelMode::Bmds && !sigma2) sigma2 = 1.0;
  initialise(params, locations, sigma2);
}

void Sampler::initialise(const HawkesParams& params, const LocationMatrix& locations,
                         std::optional<double> sigma2) {
  const std::size_t n_events = model_.observed.size();
  if (static_cast<std::size_t>(locations.rows()) != n_events ||
      locations.cols() != model_.observed.dimension()) {
    throw std::invalid_argument("sampler: initial locations have the wrong shape");
  }
  validate_params(params);
  if (log_prior_params(params, model_.priors) == kNegInf) {
    throw std::invalid_argument("sampler: initial parameters violate 1/omega < tau_t or h < tau_x");
  }
  if (model_.mode == ModelMode::Grouped) {
    if (config_.sigma2_move_prob > 0.0) {
      throw std::invalid_argument("sampler: sigma^2 moves require BMDS mode");
    }
    if (model_.regions.empty()) {
      model_.regions.reserve(n_events);
      for (std::size_t n = 0; n < n_events; ++n) {
        model_.regions.push_back(UncertaintyRegion::point(model_.observed.locations().row(
            static_cast<Eigen::Index>(n)).transpose()));
      }
    }
    if (model_.regions.size() != n_events) {
      throw std::invalid_argument("sampler: one region per event required");
    }
  } else {
    if (model_.distances == nullptr || model_.distances->size() != n_events) {
      throw std::invalid_argument("sampler: distance matrix size must match event count");
    }
  }

  state_ = ChainState{};
  state_.params = params;
  state_.locations = locations;
  state_.sigma2 = sigma2;
  state_.rng.seed(config_.seed);
  state_.hmc_step_size = config_.step_size;
  state_.param_tuning.fill(param_tuning_default());
  state_.sigma2_tuning = param_tuning_default();

  movable_.clear();
  if (model_.mode == ModelMode::Grouped) {
    state_.location_tuning.reserve(n_events);
    for (std::size_t n = 0; n < n_events; ++n) {
      const auto& region = model_.regions[n];
      if (!region.contains(locations.row(static_cast<Eigen::Index>(n)).transpose())) {
        throw std::invalid_argument("sampler: initial location of event " + std::to_string(n) +
                                    " lies outside its region");
      }
      state_.location_tuning.push_back(default_tuning(region));
      if (region.kind != RegionKind::Point) movable_.push_back(n);
    }
  }

  if (model_.likelihood == LikelihoodKind::Hawkes) {
    cache_.emplace(model_.observed.with_locations(locations), params);
  }
  if (model_.mode == ModelMode::Bmds) {
    bmds_log_lik_ = bmds_density_at(locations, *sigma2);
  }
}

double Sampler::hawkes_log_likelihood() const {
  return cache_ ? cache_->log_likelihood() : 0.0;
}

double Sampler::log_posterior() const {
  double lp = hawkes_log_likelihood() + log_prior_params(state_.params, model_.priors);
  if (model_.mode == ModelMode::Bmds) {
    const double z = (std::log(*state_.sigma2) - model_.log_sigma2_prior_mean) / model_.log_sigma2_prior_sd;
    lp += bmds_log_lik_ + normal_log_pdf(z);
  }
  return lp;
}

double Sampler::bmds_density_at(const LocationMatrix& x, double sigma2) const {
  return bmds_log_density(*model_.distances, LatentConfiguration{x, sigma2}, model_.observed_pairs);
}

bool Sampler::step_params(bool adapt) {
  auto& rng = state_.rng;
  std::uniform_int_distribution<std::size_t> pick(0, HawkesParams::kCount - 1);
  const std::size_t k = pick(rng);
  std::normal_distribution<double> norm(0.0, 1.0);
  const double z = norm(rng);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  ProposalTuning& tuning = state_.param_tuning[k];

  HawkesParams candidate = state_.params;
  candidate.set(k, state_.params.get(k) * std::exp(tuning.epsilon * z));

  bool accepted = false;
  const double prior_new = log_prior_params(candidate, model_.priors);
  if (prior_new != kNegInf) {
    const double prior_old = log_prior_params(state_.params, model_.priors);
    const double ll_old = hawkes_log_likelihood();
    const double ll_new = cache_ ? cache_->propose_params(candidate) : 0.0;
    const double log_ratio = (ll_new - ll_old) + (prior_new - prior_old) +
                             (log_jacobian(candidate, k) - log_jacobian(state_.params, k));
    if (ll_new != kNegInf && std::log(u) < log_ratio) {
      accepted = true;
      if (cache_) cache_->commit();
      state_.params = candidate;
    }
  }
  ++state_.param_moves.attempted;
  ++tuning.attempts;
  if (accepted) {
    ++state_.param_moves.accepted;
    ++tuning.accepts;
  }
  if (adapt) tuning = adapt_epsilon(tuning, accepted);
  return accepted;
}

bool Sampler::step_locations_block(std::span<const std::size_t> block, bool adapt) {
  if (model_.mode != ModelMode::Grouped) {
    throw std::logic_error("block location moves apply to grouped mode");
  }
  std::vector<std::size_t> moving;
  moving.reserve(block.size());
  for (std::size_t n : block) {
    if (n >= model_.regions.size()) throw std::out_of_range("location block index");
    if (model_.regions[n].kind != RegionKind::Point) moving.push_back(n);
  }
  if (moving.empty()) {
    return true;
  }
  const int dim = static_cast<int>(state_.locations.cols());
  LocationMatrix proposed(static_cast<Eigen::Index>(moving.size()), dim);
  double log_hastings = 0.0;
  for (std::size_t b = 0; b < moving.size(); ++b) {
    const std::size_t n = moving[b];
    const Eigen::VectorXd current = state_.locations.row(static_cast<Eigen::Index>(n)).transpose();
    auto prop = propose_in_region(current, model_.regions[n], state_.location_tuning[n], state_.rng);
    proposed.row(static_cast<Eigen::Index>(b)) = prop.location.transpose();
    log_hastings += prop.log_hastings;
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(state_.rng);
  const double ll_old = hawkes_log_likelihood();
  const double ll_new = cache_ ? cache_->propose_locations(moving, proposed) : 0.0;
  const bool accepted = ll_new != kNegInf && std::log(u) < (ll_new - ll_old) + log_hastings;
  if (accepted) {
    if (cache_) cache_->commit();
    for (std::size_t b = 0; b < moving.size(); ++b) {
      state_.locations.row(static_cast<Eigen::Index>(moving[b])) = proposed.row(static_cast<Eigen::Index>(b));
    }
  }
  ++state_.location_moves.attempted;
  if (accepted) ++state_.location_moves.accepted;
  for (std::size_t n : moving) {
    auto& t = state_.location_tuning[n];
    ++t.attempts;
    if (accepted) ++t.accepts;
    if (adapt) t = adapt_epsilon(t, accepted);
  }
  return accepted;
}

bool Sampler::step_locations_random_block(bool adapt) {
  if (model_.mode != ModelMode::Grouped) {
    throw std::logic_error("block location moves apply to grouped mode");
  }
  if (movable_.empty()) return true;
  const std::size_t k = std::min(config_.block_size, movable_.size());
  // Partial Fisher-Yates: first k entries become a uniform sample without replacement.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, movable_.size() - 1);
    std::swap(movable_[i], movable_[pick(state_.rng)]);
  }
  std::vector<std::size_t> block(movable_.begin(), movable_.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(block.begin(), block.end());
  return step_locations_block(block, adapt);
}

double Sampler::potential(const LocationMatrix& x) const {
  double ll = 0.0;
  if (model_.likelihood == LikelihoodKind::Hawkes) {
    ll = log_likelihood_parallel(model_.observed.with_locations(x), state_.params, config_.plan);
  }
  if (model_.mode == ModelMode::Bmds) {
    ll += bmds_density_at(x, *state_.sigma2);
  }
  return -ll;
}

LocationMatrix Sampler::potential_gradient(const LocationMatrix& x) const {
  LocationMatrix grad = LocationMatrix::Zero(x.rows(), x.cols());
  if (model_.likelihood == LikelihoodKind::Hawkes) {
    grad += grad_locations_parallel(model_.observed.with_locations(x), state_.params, config_.plan);
  }
  if (model_.mode == ModelMode::Bmds) {
    grad += bmds_grad_locations(*model_.distances, LatentConfiguration{x, *state_.sigma2},
                                model_.observed_pairs);
  }
  return -grad;
}

bool leapfrog(LocationMatrix& x, LocationMatrix& p, double step_size, int steps,
              const std::function<LocationMatrix(const LocationMatrix&)>& grad_u) {
  LocationMatrix g = grad_u(x);
  if (!g.allFinite()) return false;
  p -= 0.5 * step_size * g;
  for (int s = 0; s < steps; ++s) {
    x += step_size * p;
    g = grad_u(x);
    if (!g.allFinite() || !x.allFinite()) return false;
    if (s + 1 < steps) {
      p -= step_size * g;
    }
  }
  p -= 0.5 * step_size * g;
  return p.allFinite();
}

bool Sampler::hmc_step_locations(bool adapt) {
  if (model_.mode != ModelMode::Bmds) {
    throw std::logic_error("HMC location moves apply to BMDS mode");
  }
  auto& rng = state_.rng;
  const Eigen::Index n = state_.locations.rows();
  const Eigen::Index dim = state_.locations.cols();

  // Rows outside the optional block keep zero momentum and ignore their gradient.
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  if (config_.hmc_block_size > 0 && config_.hmc_block_size < static_cast<std::size_t>(n)) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::fill(active.begin(), active.end(), 0);
    for (std::size_t i = 0; i < config_.hmc_block_size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      active[idx[i]] = 1;
    }
  }

  std::normal_distribution<double> norm(0.0, 1.0);
  LocationMatrix p(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      p(i, d) = active[static_cast<std::size_t>(i)] ? norm(rng) : 0.0;
    }
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);

  const double u0 = -(hawkes_log_likelihood() + bmds_log_lik_);
  const double h0 = u0 + 0.5 * p.squaredNorm();
  LocationMatrix x = state_.locations;

  auto grad_u = [&](const LocationMatrix& at) {
    LocationMatrix g = potential_gradient(at);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) g.row(i).setZero();
    }
    return g;
  };

  double accept_prob = 0.0;
  double u1 = kNegInf;
  try {
    if (leapfrog(x, p, state_.hmc_step_size, config_.leapfrog_steps, grad_u)) {
      u1 = potential(x);
      const double h1 = u1 + 0.5 * p.squaredNorm();
      if (std::isfinite(h1)) {
        accept_prob = std::min(1.0, std::exp(h0 - h1));
      }
    }
  } catch (const std::domain_error&) {
    accept_prob = 0.0;  // singular gradient or vanishing intensity along the trajectory
  }
  if (std::isnan(accept_prob)) accept_prob = 0.0;

  const bool accepted = u < accept_prob;
  if (accepted) {
    state_.locations = x;
    if (cache_) cache_->reset(x, state_.params);
    bmds_log_lik_ = bmds_density_at(x, *state_.sigma2);
  }
  ++state_.hmc_moves.attempted;
  if (accepted) ++state_.hmc_moves.accepted;
  if (adapt) {
    ++state_.hmc_adapt_updates;
    const double gain = std::pow(static_cast<double>(state_.hmc_adapt_updates), -kAdaptationExponent);
    state_.hmc_step_size = std::clamp(
        state_.hmc_step_size * std::exp(gain * (accept_prob - config_.hmc_target_acceptance)), 1e-8, 10.0);
  }
  return accepted;
}

bool Sampler::step_sigma2(bool adapt) {
  if (model_.mode != ModelMode::Bmds) {
    throw std::logic_error("sigma^2 moves apply to BMDS mode");
  }
  auto& rng = state_.rng;
  ProposalTuning& tuning = state_.sigma2_tuning;
  const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double log_old = std::log(*state_.sigma2);
  const double log_new = log_old + tuning.epsilon * z;
  const double sigma2_new = std::exp(log_new);
  const double dens_new = bmds_density_at(state_.locations, sigma2_new);
  const double prior_old = normal_log_pdf((log_old - model_.log_sigma2_prior_mean) / model_.log_sigma2_prior_sd);
  const double prior_new = normal_log_pdf((log_new - model_.log_sigma2_prior_mean) / model_.log_sigma2_prior_sd);
  const bool accepted = std::log(u) < (dens_new - bmds_log_lik_) + (prior_new - prior_old);
  if (accepted) {
    state_.sigma2 = sigma2_new;
    bmds_log_lik_ = dens_new;
  }
  ++state_.sigma2_moves.attempted;
  ++tuning.attempts;
  if (accepted) {
    ++state_.sigma2_moves.accepted;
    ++tuning.accepts;
  }
  if (adapt) tuning = adapt_epsilon(tuning, accepted);
  return accepted;
}

void Sampler::step() {
  const bool adapt = state_.iteration < config_.burn_in;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(state_.rng);
  if (u < config_.param_move_prob) {
    step_params(adapt);
  } else if (u < config_.param_move_prob + config_.location_move_prob) {
    if (model_.mode == ModelMode::Bmds) {
      hmc_step_locations(adapt);
    } else {
      step_locations_random_block(adapt);
    }
  } else {
    step_sigma2(adapt);
  }
  ++state_.iteration;
}

Snapshot Sampler::snapshot() const {
  return Snapshot{state_.iteration, state_.params, state_.sigma2, hawkes_log_likelihood(),
                  state_.locations};
}

ChainResult run_chain(const SamplerConfig& config, const ModelSpec& model, const SnapshotSink& sink) {
  Sampler sampler(model, config);
  ChainResult result;
  if (!sink) {
    result.snapshots.reserve(static_cast<std::size_t>((config.iterations - config.burn_in) / config.thin));
  }
  for (std::uint64_t it = 0; it < config.iterations; ++it) {
    try {
      sampler.step();
    } catch (const std::exception& e) {
      const auto& s = sampler.state();
      std::ostringstream msg;
      msg << "chain aborted at iteration " << s.iteration << ": " << e.what() << " [state:";
      for (std::size_t k = 0; k < HawkesParams::kCount; ++k) {
        msg << ' ' << param_name(k) << '=' << s.params.get(k);
      }
      if (s.sigma2) msg << " sigma2=" << *s.sigma2;
      msg << " loglik=" << sampler.hawkes_log_likelihood() << ']';
      throw std::runtime_error(msg.str());
    }
    const std::uint64_t done = it + 1;
    if (done > config.burn_in && (done - config.burn_in) % config.thin == 0) {
      if (sink) {
        sink(sampler.snapshot());
      } else {
        result.snapshots.push_back(sampler.snapshot());
      }
    }
  }
  result.final_state = sampler.state();
  return result;
}

}  // namespace hawkes

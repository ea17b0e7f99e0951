#include "hawkes/likelihood_cache.hpp"

#include "kernels.hpp"

#include <stdexcept>

namespace hawkes {

namespace {

constexpr std::size_t kRefreshInterval = 100;
// A running sum that fell below this fraction of its previous value is recomputed exactly.
constexpr double kCancellationRatio = 1e-6;

}  // namespace

LikelihoodCache::LikelihoodCache(const EventCatalog& catalog, const HawkesParams& params)
    : x_(catalog.locations()), t_(catalog.times().begin(), catalog.times().end()), params_(params) {
  validate_params(params_);
  refresh();
}

void LikelihoodCache::reset(const LocationMatrix& locations, const HawkesParams& params) {
  if (locations.rows() != x_.rows() || locations.cols() != x_.cols()) {
    throw std::invalid_argument("likelihood cache: location shape mismatch");
  }
  validate_params(params);
  x_ = locations;
  params_ = params;
  refresh();
}

void LikelihoodCache::refresh() {
  full_sums(x_, params_, true, true, s_mu_, s_xi_);
  log_lik_ = evaluate(params_, s_mu_, s_xi_, x_);
  pending_ = Pending::None;
  moves_since_refresh_ = 0;
}

void LikelihoodCache::full_sums(const LocationMatrix& x, const HawkesParams& p, bool mu, bool xi,
                                std::vector<double>& s_mu, std::vector<double>& s_xi) const {
  const std::size_t n_events = t_.size();
  const int dim = static_cast<int>(x.cols());
  const detail::PairKernel k(p, dim);
  if (mu) s_mu.assign(n_events, 0.0);
  if (xi) s_xi.assign(n_events, 0.0);
  const double* xd = x.data();
  for (std::size_t i = 1; i < n_events; ++i) {
    const double* xi_row = xd + i * dim;
    const double ti = t_[i];
    for (std::size_t j = 0; j < i; ++j) {
      const double tj = t_[j];
      if (ti == tj) continue;
      const double d2 = detail::squared_distance<0>(xi_row, xd + j * dim, dim);
      const double dt = ti - tj;
      if (mu) {
        const double e = std::exp(-d2 * k.inv_two_tau_x2 - dt * dt * k.inv_two_tau_t2);
        s_mu[i] += e;
        s_mu[j] += e;
      }
      if (xi) {
        const double e = std::exp(-k.omega * std::abs(dt) - d2 * k.inv_two_h2);
        s_xi[dt > 0.0 ? i : j] += e;
      }
    }
  }
}

void LikelihoodCache::row_sums(const LocationMatrix& x, const HawkesParams& p, std::size_t n,
                               double& mu, double& xi) const {
  const int dim = static_cast<int>(x.cols());
  const detail::PairKernel k(p, dim);
  const double* xn = x.data() + n * dim;
  const double tn = t_[n];
  mu = 0.0;
  xi = 0.0;
  for (std::size_t m = 0; m < t_.size(); ++m) {
    const double tm = t_[m];
    if (tm == tn) continue;
    const double d2 = detail::squared_distance<0>(xn, x.data() + m * dim, dim);
    const double dt = tn - tm;
    mu += std::exp(-d2 * k.inv_two_tau_x2 - dt * dt * k.inv_two_tau_t2);
    if (tm < tn) xi += std::exp(-k.omega * dt - d2 * k.inv_two_h2);
  }
}

double LikelihoodCache::integrated_total(const HawkesParams& p) const {
  const double t_last = t_.back();
  double total = 0.0;
  for (double tn : t_) total += integrated_intensity_term(tn, t_last, p);
  return total;
}

double LikelihoodCache::evaluate(const HawkesParams& p, const std::vector<double>& s_mu,
                                 const std::vector<double>& s_xi, const LocationMatrix& x) const {
  const detail::PairKernel k(p, static_cast<int>(x.cols()));
  double sum_log = 0.0;
  for (std::size_t n = 0; n < t_.size(); ++n) {
    const double lambda = k.mu_scale * s_mu[n] + k.xi_scale * s_xi[n];
    if (!(lambda > 1e-280) || !std::isfinite(lambda)) {
      // Out of the linear range: fall back to the stable evaluator.
      return hawkes::log_likelihood(EventCatalog(x, t_), p);
    }
    sum_log += std::log(lambda);
  }
  return sum_log - integrated_total(p);
}

double LikelihoodCache::propose_params(const HawkesParams& candidate) {
  validate_params(candidate);
  const bool mu_changed = candidate.tau_x != params_.tau_x || candidate.tau_t != params_.tau_t;
  const bool xi_changed = candidate.omega != params_.omega || candidate.h != params_.h;
  if (mu_changed || xi_changed) {
    full_sums(x_, candidate, mu_changed, xi_changed, cand_mu_, cand_xi_);
  }
  if (!mu_changed) cand_mu_ = s_mu_;
  if (!xi_changed) cand_xi_ = s_xi_;
  cand_params_ = candidate;
  cand_log_lik_ = evaluate(candidate, cand_mu_, cand_xi_, x_);
  pending_ = Pending::Params;
  return cand_log_lik_;
}

double LikelihoodCache::propose_locations(std::span<const std::size_t> indices,
                                          const LocationMatrix& new_locations) {
  if (static_cast<std::size_t>(new_locations.rows()) != indices.size() ||
      new_locations.cols() != x_.cols()) {
    throw std::invalid_argument("likelihood cache: proposal shape mismatch");
  }
  const std::size_t n_events = t_.size();
  const int dim = static_cast<int>(x_.cols());
  const detail::PairKernel k(params_, dim);
  cand_mu_ = s_mu_;
  cand_xi_ = s_xi_;
  cand_x_ = x_;
  std::vector<char> recompute(n_events, 0);

  auto bump = [&](double& slot, double delta, std::size_t row) {
    const double before = slot;
    slot += delta;
    if (delta < 0.0 && slot < kCancellationRatio * before) recompute[row] = 1;
  };

  for (std::size_t b = 0; b < indices.size(); ++b) {
    const std::size_t kk = indices[b];
    if (kk >= n_events) throw std::out_of_range("likelihood cache: event index");
    const double tk = t_[kk];
    const double* old_row = cand_x_.data() + kk * dim;
    const double* new_row = new_locations.data() + b * dim;
    for (std::size_t m = 0; m < n_events; ++m) {
      const double tm = t_[m];
      if (tm == tk) continue;
      const double* xm = cand_x_.data() + m * dim;
      const double d2_old = detail::squared_distance<0>(old_row, xm, dim);
      const double d2_new = detail::squared_distance<0>(new_row, xm, dim);
      const double dt = tk - tm;
      const double time_part = dt * dt * k.inv_two_tau_t2;
      const double dmu = std::exp(-d2_new * k.inv_two_tau_x2 - time_part) -
                         std::exp(-d2_old * k.inv_two_tau_x2 - time_part);
      bump(cand_mu_[kk], dmu, kk);
      bump(cand_mu_[m], dmu, m);
      const double decay = k.omega * std::abs(dt);
      const double dxi = std::exp(-decay - d2_new * k.inv_two_h2) - std::exp(-decay - d2_old * k.inv_two_h2);
      const std::size_t target = dt > 0.0 ? kk : m;
      bump(cand_xi_[target], dxi, target);
    }
    for (int d = 0; d < dim; ++d) cand_x_(static_cast<Eigen::Index>(kk), d) = new_row[d];
  }
  for (std::size_t n = 0; n < n_events; ++n) {
    if (recompute[n] || cand_mu_[n] < 0.0 || cand_xi_[n] < 0.0) {
      row_sums(cand_x_, params_, n, cand_mu_[n], cand_xi_[n]);
    }
  }
  cand_params_ = params_;
  cand_log_lik_ = evaluate(params_, cand_mu_, cand_xi_, cand_x_);
  pending_ = Pending::Locations;
  return cand_log_lik_;
}

void LikelihoodCache::commit() {
  switch (pending_) {
    case Pending::None:
      throw std::logic_error("likelihood cache: nothing to commit");
    case Pending::Params:
      params_ = cand_params_;
      break;
    case Pending::Locations:
      x_.swap(cand_x_);
      ++moves_since_refresh_;
      break;
  }
  s_mu_.swap(cand_mu_);
  s_xi_.swap(cand_xi_);
  log_lik_ = cand_log_lik_;
  pending_ = Pending::None;
  if (moves_since_refresh_ >= kRefreshInterval) {
    refresh();
  }
}

}  // namespace hawkes

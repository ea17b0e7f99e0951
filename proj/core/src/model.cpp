#include "hawkes/model.hpp"

#include "kernels.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hawkes {

EventCatalog::EventCatalog(LocationMatrix locations, std::vector<double> times)
    : locations_(std::move(locations)), times_(std::move(times)) {
  if (static_cast<std::size_t>(locations_.rows()) != times_.size()) {
    throw std::invalid_argument("catalog: location rows and times differ in length");
  }
  if (times_.empty()) {
    throw std::invalid_argument("catalog: no events");
  }
  if (locations_.cols() < 1 || locations_.cols() > kMaxDimension) {
    throw std::invalid_argument("catalog: dimension must be in 1.." + std::to_string(kMaxDimension));
  }
  if (!locations_.allFinite()) {
    throw std::invalid_argument("catalog: non-finite location");
  }
  for (std::size_t n = 0; n < times_.size(); ++n) {
    if (!std::isfinite(times_[n]) || times_[n] < 0.0) {
      throw std::invalid_argument("catalog: time of event " + std::to_string(n) +
                                  " must be finite and >= 0");
    }
    if (n > 0 && times_[n] < times_[n - 1]) {
      throw std::invalid_argument("catalog: times must be nondecreasing");
    }
  }
}

EventCatalog EventCatalog::from_events(std::span<const Event> events) {
  if (events.empty()) {
    throw std::invalid_argument("catalog: no events");
  }
  const auto dim = events.front().location.size();
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return events[a].time < events[b].time; });
  LocationMatrix x(static_cast<Eigen::Index>(events.size()), dim);
  std::vector<double> t(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Event& e = events[order[i]];
    if (e.location.size() != dim) {
      throw std::invalid_argument("catalog: dimension mismatch at event " + std::to_string(order[i]));
    }
    x.row(static_cast<Eigen::Index>(i)) = e.location.transpose();
    t[i] = e.time;
  }
  return EventCatalog(std::move(x), std::move(t));
}

Event EventCatalog::event(std::size_t n) const {
  if (n >= size()) {
    throw std::out_of_range("catalog: event index out of range");
  }
  return Event{locations_.row(static_cast<Eigen::Index>(n)).transpose(), times_[n]};
}

EventCatalog EventCatalog::with_locations(LocationMatrix locations) const {
  if (locations.rows() != locations_.rows() || locations.cols() != locations_.cols()) {
    throw std::invalid_argument("catalog: replacement locations have the wrong shape");
  }
  return EventCatalog(std::move(locations), times_);
}

double HawkesParams::get(std::size_t i) const {
  switch (i) {
    case 0: return mu0;
    case 1: return tau_x;
    case 2: return tau_t;
    case 3: return theta;
    case 4: return omega;
    case 5: return h;
  }
  throw std::out_of_range("HawkesParams index");
}

void HawkesParams::set(std::size_t i, double value) {
  switch (i) {
    case 0: mu0 = value; return;
    case 1: tau_x = value; return;
    case 2: tau_t = value; return;
    case 3: theta = value; return;
    case 4: omega = value; return;
    case 5: h = value; return;
  }
  throw std::out_of_range("HawkesParams index");
}

bool HawkesParams::positive() const {
  for (std::size_t i = 0; i < kCount; ++i) {
    const double v = get(i);
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  }
  return true;
}

bool HawkesParams::admissible() const {
  return positive() && 1.0 / omega < tau_t && h < tau_x;
}

const char* param_name(std::size_t i) {
  static constexpr const char* names[] = {"mu0", "tau_x", "tau_t", "theta", "omega", "h"};
  if (i >= HawkesParams::kCount) throw std::out_of_range("param_name");
  return names[i];
}

ParamPriors ParamPriors::from_base_sd(double self_excitatory_sd, double background_ratio) {
  if (!(self_excitatory_sd > 0.0) || !(background_ratio > 0.0)) {
    throw std::invalid_argument("prior scales must be positive");
  }
  ParamPriors p;
  p.omega_sd = self_excitatory_sd;
  p.inv_h_sd = self_excitatory_sd;
  p.inv_tau_t_sd = background_ratio * self_excitatory_sd;
  p.inv_tau_x_sd = background_ratio * self_excitatory_sd;
  return p;
}

void validate_params(const HawkesParams& params) {
  if (!params.positive()) {
    throw std::invalid_argument("Hawkes parameters must be finite and strictly positive");
  }
}

PairRate pairwise_components(std::size_t n, std::size_t nprime, const EventCatalog& catalog,
                             const HawkesParams& params) {
  if (n >= catalog.size() || nprime >= catalog.size()) {
    throw std::out_of_range("pairwise_rate: event index out of range");
  }
  validate_params(params);
  const detail::PairKernel k(params, catalog.dimension());
  const auto v = detail::view_of(catalog);
  const double tn = v.t[n];
  const double tm = v.t[nprime];
  PairRate out;
  if (tm == tn) {
    return out;
  }
  const double d2 = detail::squared_distance<0>(v.x + n * v.dim, v.x + nprime * v.dim, v.dim);
  const double dt = tn - tm;
  out.background = std::exp(k.log_mu_scale - d2 * k.inv_two_tau_x2 - dt * dt * k.inv_two_tau_t2);
  if (tm < tn) {
    out.excitation = std::exp(k.log_xi_scale - k.omega * dt - d2 * k.inv_two_h2);
  }
  return out;
}

double pairwise_rate(std::size_t n, std::size_t nprime, const EventCatalog& catalog,
                     const HawkesParams& params) {
  return pairwise_components(n, nprime, catalog, params).total();
}

double integrated_intensity_term(double t_n, double t_last, const HawkesParams& params) {
  const double background =
      params.mu0 * normal_cdf_diff(-t_n / params.tau_t, (t_last - t_n) / params.tau_t);
  const double excitation = -params.theta * std::expm1(-params.omega * (t_last - t_n));
  return background + excitation;
}

EventRateBreakdown rate_breakdown(const EventCatalog& catalog, const HawkesParams& params) {
  validate_params(params);
  const detail::PairKernel k(params, catalog.dimension());
  const auto v = detail::view_of(catalog);
  const std::size_t n_events = catalog.size();
  const double t_last = v.t[n_events - 1];

  EventRateBreakdown out;
  out.mu.resize(n_events);
  out.xi.resize(n_events);
  out.lambda.resize(n_events);
  out.log_lambda.resize(n_events);
  out.integrated.resize(n_events);
  out.ell.resize(n_events);
  std::vector<double> scratch;
  for (std::size_t n = 0; n < n_events; ++n) {
    const auto r = detail::row_rates_dispatch(k, v, n, 1, scratch);
    out.mu[n] = r.mu;
    out.xi[n] = r.xi;
    out.lambda[n] = r.mu + r.xi;
    out.log_lambda[n] = r.log_lambda;
    out.integrated[n] = integrated_intensity_term(v.t[n], t_last, params);
    out.ell[n] = r.log_lambda - out.integrated[n];
  }
  return out;
}

double log_likelihood(const EventCatalog& catalog, const HawkesParams& params) {
  const auto b = rate_breakdown(catalog, params);
  double total = 0.0;
  for (double e : b.ell) {
    total += e;
  }
  return total;
}

double log_prior_params(const HawkesParams& params, const ParamPriors& priors) {
  if (!params.admissible()) {
    return kNegInf;
  }
  return half_normal_log_pdf(params.mu0, priors.mu0_sd) +
         half_normal_log_pdf(params.theta, priors.theta_sd) +
         half_normal_log_pdf(1.0 / params.tau_x, priors.inv_tau_x_sd) +
         half_normal_log_pdf(1.0 / params.tau_t, priors.inv_tau_t_sd) +
         half_normal_log_pdf(params.omega, priors.omega_sd) +
         half_normal_log_pdf(1.0 / params.h, priors.inv_h_sd);
}

double normalized_se_weight(const HawkesParams& params) {
  return params.theta / (params.theta + params.mu0);
}

}  // namespace hawkes

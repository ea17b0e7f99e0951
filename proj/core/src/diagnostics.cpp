#include "hawkes/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hawkes {

EssResult ess(std::span<const double> samples) {
  const std::size_t s = samples.size();
  if (s < 10) {
    throw std::invalid_argument("ess: need at least 10 samples");
  }
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(s);
  std::vector<double> c(s);
  for (std::size_t i = 0; i < s; ++i) c[i] = samples[i] - mean;
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < s; ++i) acc += c[i] * c[i + lag];
    return acc / static_cast<double>(s);
  };
  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) {
    return {std::numeric_limits<double>::quiet_NaN(), EssFlag::Constant};
  }
  // Geyer's initial positive sequence over pairs Gamma_m = rho_{2m} + rho_{2m+1}.
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < s; ++m) {
    const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / gamma0;
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  const double sd = static_cast<double>(s);
  const double cap = sd * std::log10(sd);
  EssResult out;
  out.value = tau > 0.0 ? std::min(sd / tau, cap) : cap;
  out.flag = out.value > sd ? EssFlag::Antithetic : EssFlag::Ok;
  return out;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile probability outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

QuantitySummary summarize_quantity(std::string name, std::string unit, std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summary of empty sample");
  QuantitySummary q;
  q.name = std::move(name);
  q.unit = std::move(unit);
  std::vector<double> v(values.begin(), values.end());
  q.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  q.median = quantile(v, 0.5);
  q.q025 = quantile(v, 0.025);
  q.q975 = quantile(v, 0.975);
  const double s = static_cast<double>(v.size());
  if (v.size() >= 10) {
    const auto e = ess(v);
    q.ess_flag = e.flag;
    q.ess = e.flag == EssFlag::Constant ? s : std::min(e.value, s);
  } else {
    q.ess = s;
  }
  return q;
}

PosteriorSummary posterior_diagnostics(std::span<const Snapshot> snapshots, const EventCatalog& observed) {
  if (snapshots.empty()) throw std::invalid_argument("posterior diagnostics need at least one snapshot");
  const std::size_t n_snap = snapshots.size();
  const std::size_t n_events = observed.size();

  PosteriorSummary out;
  static constexpr const char* units[] = {"events", "space", "time", "events", "1/time", "space"};
  std::vector<double> series(n_snap);
  for (std::size_t k = 0; k < HawkesParams::kCount; ++k) {
    for (std::size_t s = 0; s < n_snap; ++s) series[s] = snapshots[s].params.get(k);
    out.quantities.push_back(summarize_quantity(param_name(k), units[k], series));
  }
  for (std::size_t s = 0; s < n_snap; ++s) series[s] = normalized_se_weight(snapshots[s].params);
  out.quantities.push_back(summarize_quantity("se_weight", "fraction", series));
  if (snapshots.front().sigma2) {
    for (std::size_t s = 0; s < n_snap; ++s) series[s] = snapshots[s].sigma2.value_or(0.0);
    out.quantities.push_back(summarize_quantity("sigma2", "latent^2", series));
  }
  for (std::size_t s = 0; s < n_snap; ++s) series[s] = snapshots[s].log_likelihood;
  out.quantities.push_back(summarize_quantity("log_likelihood", "nats", series));

  LocationMatrix mean_x = LocationMatrix::Zero(observed.locations().rows(), observed.locations().cols());
  out.self_excitation_probability.assign(n_events, 0.0);
  for (const auto& snap : snapshots) {
    mean_x += snap.locations;
    const auto rates = rate_breakdown(observed.with_locations(snap.locations), snap.params);
    for (std::size_t n = 0; n < n_events; ++n) {
      const double total = rates.mu[n] + rates.xi[n];
      if (total > 0.0) out.self_excitation_probability[n] += rates.xi[n] / total;
    }
  }
  mean_x /= static_cast<double>(n_snap);
  out.displacement.resize(n_events);
  for (std::size_t n = 0; n < n_events; ++n) {
    const auto row = static_cast<Eigen::Index>(n);
    out.displacement[n] = (mean_x.row(row) - observed.locations().row(row)).norm();
    out.self_excitation_probability[n] /= static_cast<double>(n_snap);
  }
  return out;
}

}  // namespace hawkes

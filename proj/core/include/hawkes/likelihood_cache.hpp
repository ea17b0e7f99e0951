#pragma once

#include "hawkes/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hawkes {

/// Hawkes log-likelihood with per-event unscaled kernel sums held between MCMC moves.
///
/// For each event n the cache stores
///   S_mu[n] = sum_{n': t_n' != t_n} exp(-|dx|^2 / (2 tau_x^2) - dt^2 / (2 tau_t^2))
///   S_xi[n] = sum_{n': t_n' <  t_n} exp(-omega dt - |dx|^2 / (2 h^2))
/// so that lambda_n = c_mu S_mu[n] + c_xi S_xi[n]. Weight moves (mu0, theta) cost O(N),
/// lengthscale moves O(N^2), and moving K locations O(K N).
///
/// Moves are two-phase: propose_*() returns the candidate log-likelihood and commit()
/// adopts it; any other call discards the pending candidate.
class LikelihoodCache {
 public:
  LikelihoodCache(const EventCatalog& catalog, const HawkesParams& params);

  double log_likelihood() const { return log_lik_; }
  const HawkesParams& params() const { return params_; }
  const LocationMatrix& locations() const { return x_; }
  std::span<const double> times() const { return t_; }

  double propose_params(const HawkesParams& candidate);
  /// New coordinates for events `indices` (rows of `new_locations`, same order).
  double propose_locations(std::span<const std::size_t> indices, const LocationMatrix& new_locations);
  void commit();

  /// Full O(N^2) recomputation from the committed state.
  void refresh();

  /// Replaces all locations and recomputes.
  void reset(const LocationMatrix& locations, const HawkesParams& params);

 private:
  enum class Pending { None, Params, Locations };

  void full_sums(const LocationMatrix& x, const HawkesParams& p, bool mu, bool xi,
                 std::vector<double>& s_mu, std::vector<double>& s_xi) const;
  double evaluate(const HawkesParams& p, const std::vector<double>& s_mu,
                  const std::vector<double>& s_xi, const LocationMatrix& x) const;
  double integrated_total(const HawkesParams& p) const;
  void row_sums(const LocationMatrix& x, const HawkesParams& p, std::size_t n, double& mu,
                double& xi) const;

  LocationMatrix x_;
  std::vector<double> t_;
  HawkesParams params_;
  std::vector<double> s_mu_;
  std::vector<double> s_xi_;
  double log_lik_ = 0.0;

  Pending pending_ = Pending::None;
  HawkesParams cand_params_;
  std::vector<double> cand_mu_;
  std::vector<double> cand_xi_;
  LocationMatrix cand_x_;
  double cand_log_lik_ = 0.0;
  std::size_t moves_since_refresh_ = 0;
};

}  // namespace hawkes

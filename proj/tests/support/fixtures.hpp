#pragma once

#include "hawkes/model.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace fixtures {

/// N events with standard-normal coordinates scaled by `spread` and sorted uniform times.
inline hawkes::EventCatalog random_catalog(std::size_t n, int dim, std::mt19937_64& rng, double spread = 1.0,
                                           double horizon = 10.0) {
  std::normal_distribution<double> z(0.0, spread);
  std::uniform_real_distribution<double> u(0.0, horizon);
  hawkes::LocationMatrix x(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(rng);
  std::vector<double> t(n);
  for (auto& v : t) v = u(rng);
  std::sort(t.begin(), t.end());
  return {std::move(x), std::move(t)};
}

/// Admissible parameters with every component of order one.
inline hawkes::HawkesParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.3, 1.5);
  hawkes::HawkesParams p;
  p.mu0 = u(rng);
  p.theta = u(rng);
  p.h = u(rng) * 0.5;
  p.tau_x = p.h + u(rng);
  p.omega = u(rng);
  p.tau_t = 1.0 / p.omega + u(rng);
  return p;
}

}  // namespace fixtures

#pragma once

#include "hawkes/geometry.hpp"
#include "hawkes/math.hpp"
#include "hawkes/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hawkes {

struct GaussianMode {
  Eigen::VectorXd mean;
  double sd = 1.0;
  double weight = 1.0;
};

/// Cluster (branching) simulation settings. Defaults: three unit-sd modes at (-5, 0),
/// (0, 5), (5, 0) with equal weights, 200 expected background events on [0, 100],
/// 0.5 expected children, child offsets N(0, 0.5^2) per coordinate, child gaps Exp(1).
struct SimConfig {
  std::vector<GaussianMode> modes = default_modes();
  double expected_background = 200.0;
  double horizon = 100.0;
  double expected_children = 0.5;
  double child_spatial_sd = 0.5;  ///< true h
  double child_rate = 1.0;        ///< true omega

  static std::vector<GaussianMode> default_modes();
  int dimension() const;
  void validate() const;
};

struct SimulatedCatalog {
  EventCatalog catalog;
  std::vector<int> generation;  ///< 0 for background events
  std::vector<long> parent;     ///< index into catalog, -1 for background events
};

/// Background events first, then successive generations until extinction; children past
/// the horizon are dropped. Output is sorted by time with parents remapped.
SimulatedCatalog simulate_catalog(const SimConfig& config, Rng& rng);

struct CoarseningSpec {
  double precision = 1.0;
};

struct CoarsenedData {
  EventCatalog catalog;
  std::vector<UncertaintyRegion> regions;  ///< squares of half-width precision / 2
};

/// Nearest multiple of precision, ties away from zero.
double round_to_grid(double value, double precision);

CoarsenedData coarsen(const EventCatalog& catalog, const CoarseningSpec& spec);

}  // namespace hawkes

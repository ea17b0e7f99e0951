#pragma once

#include "hawkes/mcmc.hpp"
#include "hawkes/simulator.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hawkes {

enum class LocationMode : std::uint8_t { Fixed, Sampled };
const char* to_string(LocationMode mode);

struct CoverageConfig {
  std::size_t replicates = 100;
  SimConfig simulation{};
  std::vector<double> precisions{0.1, 0.5, 1.0};
  std::vector<double> ci_levels{0.5, 0.8, 0.95};
  SamplerConfig sampled_chain = SamplerConfig::grouped_defaults();
  SamplerConfig fixed_chain = fixed_chain_defaults();
  ParamPriors priors{};
  std::uint64_t seed = 2024;
  std::size_t workers = 1;  ///< replicates run concurrently, merged by index

  static SamplerConfig fixed_chain_defaults();
};

/// One chain's outcome within a replicate.
struct ReplicateRecord {
  std::size_t replicate = 0;
  double precision = 0.0;
  LocationMode mode = LocationMode::Sampled;
  std::size_t n_events = 0;
  double h_median = 0.0;
  std::vector<double> h_lower;   ///< per ci level
  std::vector<double> h_upper;
  std::vector<bool> covered;     ///< per ci level
  double location_coverage = 0.0;  ///< fraction of true coordinates inside 95% marginal CIs
  double seconds = 0.0;
  std::string error;             ///< non-empty for failed chains
};

struct CoverageRow {
  double precision;
  double ci_level;
  LocationMode mode;
  double covered_fraction;
  std::size_t replicates;  ///< successful replicates contributing
  std::size_t failures;
};

struct LocationCoverageRow {
  double precision;
  double mean_coverage;
  std::size_t replicates;
};

struct CoverageResult {
  std::vector<CoverageRow> table;
  std::vector<LocationCoverageRow> locations;
  std::vector<ReplicateRecord> records;

  double covered(double precision, double level, LocationMode mode) const;
  double location_coverage(double precision) const;
};

using CoverageProgress = std::function<void(const ReplicateRecord&)>;

/// Simulate, coarsen at each precision, and fit with locations fixed at the coarse values
/// and with locations sampled inside their squares. Records CI coverage of the true h and
/// per-coordinate 95% coverage of the true locations.
CoverageResult coverage_study(const CoverageConfig& config, const CoverageProgress& progress = {});

/// Seeds for replicate r and chain c, derived by splitmix64 from the study seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace hawkes

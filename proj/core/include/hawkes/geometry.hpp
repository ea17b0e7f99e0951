#pragma once

#include "hawkes/math.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace hawkes {

enum class RegionKind : std::uint8_t { Point, Square, Disc };

/// Coarsening region around an observed location. Squares are axis-aligned with a
/// per-coordinate half-width; discs are two-dimensional. Boundaries are open.
struct UncertaintyRegion {
  RegionKind kind = RegionKind::Point;
  Eigen::VectorXd center;
  double size = 0.0;  ///< half-width (Square) or radius (Disc); unused for Point

  static UncertaintyRegion point(Eigen::VectorXd center);
  static UncertaintyRegion square(Eigen::VectorXd center, double half_width);
  static UncertaintyRegion disc(Eigen::VectorXd center, double radius);
  /// Disc whose area equals `area`: r = sqrt(area / pi).
  static UncertaintyRegion disc_from_area(Eigen::VectorXd center, double area);

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

inline constexpr double kSquareMetresPerAcre = 4046.8564224;

double radius_from_area(double area);

/// 0 inside the region, -inf outside (uniform density up to a constant).
double region_log_prior(const Eigen::Ref<const Eigen::VectorXd>& x, const UncertaintyRegion& region);

/// Area of the intersection of two discs with radii r1, r2 whose centres are d apart.
double lens_area(double r1, double r2, double d);

/// Per-event proposal scale with diminishing adaptation toward a target acceptance rate.
struct ProposalTuning {
  double epsilon = 0.5;
  double min_epsilon = 1e-8;
  double max_epsilon = 1e8;
  std::uint64_t updates = 0;  ///< adaptation index s
  std::uint64_t attempts = 0;
  std::uint64_t accepts = 0;

  double acceptance_rate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(accepts) / static_cast<double>(attempts);
  }
};

inline constexpr double kTargetAcceptance = 0.44;
inline constexpr double kAdaptationExponent = 0.6;

/// log(epsilon) += s^-0.6 * (1{accepted} - target), then clamped to [min, max].
ProposalTuning adapt_epsilon(ProposalTuning tuning, bool accepted,
                             double target = kTargetAcceptance);

struct Proposal {
  Eigen::VectorXd location;
  double log_hastings = 0.0;  ///< log q(x | x*) - log q(x* | x)
};

/// Per-coordinate normal random walk with sd epsilon truncated to the square.
Proposal propose_square(const Eigen::Ref<const Eigen::VectorXd>& current,
                        const UncertaintyRegion& region, const ProposalTuning& tuning, Rng& rng);

/// Uniform on {|x* - center| < r} intersected with {|x* - x| < r * epsilon}.
/// Throws std::runtime_error when the rejection sampler exceeds kDiscRejectionCap tries.
Proposal propose_disc(const Eigen::Ref<const Eigen::VectorXd>& current,
                      const UncertaintyRegion& region, const ProposalTuning& tuning, Rng& rng);

inline constexpr int kDiscRejectionCap = 10000;

/// Dispatches on region kind; Point regions return the current location unchanged.
Proposal propose_in_region(const Eigen::Ref<const Eigen::VectorXd>& current,
                           const UncertaintyRegion& region, const ProposalTuning& tuning, Rng& rng);

/// Log normalizer of the truncated square proposal centred at x.
double square_proposal_log_normalizer(const Eigen::Ref<const Eigen::VectorXd>& x,
                                      const UncertaintyRegion& region, double sd);

/// Default epsilon bounds for a region kind: discs stop at 2 (step disc covers the region),
/// squares at ten full widths.
ProposalTuning default_tuning(const UncertaintyRegion& region);

}  // namespace hawkes

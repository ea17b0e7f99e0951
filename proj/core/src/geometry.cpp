#include "hawkes/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace hawkes {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

UncertaintyRegion UncertaintyRegion::point(Eigen::VectorXd center) {
  return {RegionKind::Point, std::move(center), 0.0};
}

UncertaintyRegion UncertaintyRegion::square(Eigen::VectorXd center, double half_width) {
  require_positive(half_width, "square half-width");
  return {RegionKind::Square, std::move(center), half_width};
}

UncertaintyRegion UncertaintyRegion::disc(Eigen::VectorXd center, double radius) {
  require_positive(radius, "disc radius");
  if (center.size() != 2) {
    throw std::invalid_argument("disc regions are two-dimensional");
  }
  return {RegionKind::Disc, std::move(center), radius};
}

UncertaintyRegion UncertaintyRegion::disc_from_area(Eigen::VectorXd center, double area) {
  return disc(std::move(center), radius_from_area(area));
}

double radius_from_area(double area) {
  require_positive(area, "region area");
  return std::sqrt(area / std::numbers::pi);
}

bool UncertaintyRegion::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != center.size()) {
    throw std::invalid_argument("region: dimension mismatch");
  }
  switch (kind) {
    case RegionKind::Point:
      return x == center;
    case RegionKind::Square:
      return ((x - center).cwiseAbs().array() < size).all();
    case RegionKind::Disc:
      return (x - center).squaredNorm() < size * size;
  }
  return false;
}

double region_log_prior(const Eigen::Ref<const Eigen::VectorXd>& x, const UncertaintyRegion& region) {
  return region.contains(x) ? 0.0 : kNegInf;
}

double lens_area(double r1, double r2, double d) {
  if (!(r1 > 0.0) || !(r2 > 0.0) || !(d >= 0.0)) {
    throw std::invalid_argument("lens_area: radii must be positive and distance nonnegative");
  }
  if (d >= r1 + r2) {
    return 0.0;
  }
  const double small = std::min(r1, r2);
  const double large = std::max(r1, r2);
  if (d <= large - small) {
    return std::numbers::pi * small * small;
  }
  // Order the radii so the result is exactly symmetric in (r1, r2).
  const double a = small;
  const double b = large;
  const double cos_a = std::clamp((d * d + a * a - b * b) / (2.0 * d * a), -1.0, 1.0);
  const double cos_b = std::clamp((d * d + b * b - a * a) / (2.0 * d * b), -1.0, 1.0);
  const double kite = (-d + a + b) * (d + a - b) * (d - a + b) * (d + a + b);
  return a * a * std::acos(cos_a) + b * b * std::acos(cos_b) - 0.5 * std::sqrt(std::max(kite, 0.0));
}

ProposalTuning adapt_epsilon(ProposalTuning tuning, bool accepted, double target) {
  ++tuning.updates;
  const double gain = std::pow(static_cast<double>(tuning.updates), -kAdaptationExponent);
  const double step = gain * ((accepted ? 1.0 : 0.0) - target);
  tuning.epsilon = std::clamp(tuning.epsilon * std::exp(step), tuning.min_epsilon, tuning.max_epsilon);
  return tuning;
}

double square_proposal_log_normalizer(const Eigen::Ref<const Eigen::VectorXd>& x,
                                      const UncertaintyRegion& region, double sd) {
  double total = 0.0;
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const double lo = (region.center[d] - region.size - x[d]) / sd;
    const double hi = (region.center[d] + region.size - x[d]) / sd;
    total += normal_log_cdf_diff(lo, hi);
  }
  return total;
}

Proposal propose_square(const Eigen::Ref<const Eigen::VectorXd>& current,
                        const UncertaintyRegion& region, const ProposalTuning& tuning, Rng& rng) {
  if (region.kind != RegionKind::Square) {
    throw std::invalid_argument("propose_square: region is not a square");
  }
  const double sd = tuning.epsilon;
  Proposal out{Eigen::VectorXd(current.size()), 0.0};
  for (Eigen::Index d = 0; d < current.size(); ++d) {
    const double lo = region.center[d] - region.size;
    const double hi = region.center[d] + region.size;
    double v = sample_truncated_normal(current[d], sd, lo, hi, rng);
    // Guard the open boundary against rounding in mean + sd * z.
    if (!(v > lo && v < hi)) {
      v = current[d];
    }
    out.location[d] = v;
  }
  out.log_hastings = square_proposal_log_normalizer(current, region, sd) -
                     square_proposal_log_normalizer(out.location, region, sd);
  return out;
}

Proposal propose_disc(const Eigen::Ref<const Eigen::VectorXd>& current,
                      const UncertaintyRegion& region, const ProposalTuning& tuning, Rng& rng) {
  if (region.kind != RegionKind::Disc) {
    throw std::invalid_argument("propose_disc: region is not a disc");
  }
  const double r = region.size;
  const double step = r * tuning.epsilon;
  const double offset = (current - region.center).norm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto draw_step_disc = [&]() {
    // Uniform on the open disc of radius `step` around current.
    const double rad = step * std::sqrt(unif(rng));
    const double ang = 2.0 * std::numbers::pi * unif(rng);
    Eigen::VectorXd p(2);
    p << current[0] + rad * std::cos(ang), current[1] + rad * std::sin(ang);
    return p;
  };

  Proposal out;
  if (offset + step < r) {
    out.location = draw_step_disc();
    const double offset_new = (out.location - region.center).norm();
    out.log_hastings = std::log(lens_area(r, step, offset)) - std::log(lens_area(r, step, offset_new));
    return out;
  }
  for (int attempt = 0; attempt < kDiscRejectionCap; ++attempt) {
    Eigen::VectorXd p = draw_step_disc();
    if (region.contains(p)) {
      out.location = std::move(p);
      const double offset_new = (out.location - region.center).norm();
      out.log_hastings =
          std::log(lens_area(r, step, offset)) - std::log(lens_area(r, step, offset_new));
      return out;
    }
  }
  throw std::runtime_error("propose_disc: rejection sampler exceeded " +
                           std::to_string(kDiscRejectionCap) + " iterations");
}

Proposal propose_in_region(const Eigen::Ref<const Eigen::VectorXd>& current,
                           const UncertaintyRegion& region, const ProposalTuning& tuning, Rng& rng) {
  switch (region.kind) {
    case RegionKind::Square:
      return propose_square(current, region, tuning, rng);
    case RegionKind::Disc:
      return propose_disc(current, region, tuning, rng);
    case RegionKind::Point:
      break;
  }
  return Proposal{current, 0.0};
}

ProposalTuning default_tuning(const UncertaintyRegion& region) {
  ProposalTuning t;
  switch (region.kind) {
    case RegionKind::Disc:
      t.epsilon = 0.5;
      t.min_epsilon = 1e-6;
      t.max_epsilon = 2.0;
      break;
    case RegionKind::Square:
      t.epsilon = region.size;
      t.min_epsilon = 1e-8 * region.size;
      t.max_epsilon = 20.0 * region.size;
      break;
    case RegionKind::Point:
      break;
  }
  return t;
}

}  // namespace hawkes

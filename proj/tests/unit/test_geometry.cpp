#include "disc_chi2.hpp"
#include "oracles.hpp"

#include "hawkes/geometry.hpp"

#include <doctest.h>

#include <limits>
#include <numbers>

using namespace hawkes;

namespace {
const double kNegInfinity = -std::numeric_limits<double>::infinity();
}

TEST_CASE("region priors") {
  const Eigen::Vector2d c(10.0, -3.0);
  for (const auto& region : {UncertaintyRegion::point(c), UncertaintyRegion::square(c, 50.0),
                             UncertaintyRegion::disc(c, 2.0)}) {
    CHECK(region_log_prior(c, region) == 0.0);
  }
  const auto sq = UncertaintyRegion::square(c, 50.0);
  CHECK(region_log_prior(c + Eigen::Vector2d(50.0001, 0), sq) == kNegInfinity);
  CHECK(region_log_prior(c + Eigen::Vector2d(50.0, 0), sq) == kNegInfinity);  // open boundary
  CHECK(region_log_prior(c + Eigen::Vector2d(49.9, -49.9), sq) == 0.0);
  CHECK(region_log_prior(c + Eigen::Vector2d(1e-12, 0), UncertaintyRegion::point(c)) == kNegInfinity);

  const auto disc = UncertaintyRegion::disc_from_area(c, std::numbers::pi);
  CHECK(disc.size == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(region_log_prior(c + Eigen::Vector2d(0.6, 0.79), disc) == 0.0);
  CHECK(region_log_prior(c + Eigen::Vector2d(0.6, 0.81), disc) == kNegInfinity);

  // Shifting point and centre together leaves the prior unchanged.
  const Eigen::Vector2d shift(123.4, -56.7);
  const auto moved = UncertaintyRegion::disc(c + shift, 1.0);
  for (const Eigen::Vector2d x : {Eigen::Vector2d(10.5, -3.5), Eigen::Vector2d(11.2, -3.0)}) {
    CHECK(region_log_prior(x + shift, moved) == region_log_prior(x, UncertaintyRegion::disc(c, 1.0)));
  }
  CHECK(radius_from_area(kSquareMetresPerAcre * std::numbers::pi) == doctest::Approx(std::sqrt(kSquareMetresPerAcre)));
  CHECK_THROWS(UncertaintyRegion::square(c, 0.0));
  CHECK_THROWS(UncertaintyRegion::disc(Eigen::Vector3d(0, 0, 0), 1.0));
}

TEST_CASE("lens area closed form") {
  CHECK(lens_area(1.0, 2.0, 3.0) == 0.0);
  CHECK(lens_area(1.0, 2.0, 3.5) == 0.0);
  CHECK(lens_area(1.5, 1.5, 0.0) == doctest::Approx(std::numbers::pi * 2.25));
  CHECK(lens_area(3.0, 1.0, 1.5) == doctest::Approx(std::numbers::pi));
  CHECK(lens_area(1.0, 3.0, 2.0) == doctest::Approx(std::numbers::pi));  // internally tangent
  // Unit discs one radius apart: 2 pi / 3 - sqrt(3) / 2.
  CHECK(lens_area(1.0, 1.0, 1.0) == doctest::Approx(2 * std::numbers::pi / 3 - std::sqrt(3.0) / 2).epsilon(1e-14));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double r1 = u(rng), r2 = u(rng), d = u(rng);
    CHECK(lens_area(r1, r2, d) == lens_area(r2, r1, d));
  }
  for (int i = 0; i < 5; ++i) {
    const double r1 = u(rng), r2 = u(rng);
    const double d = std::abs(r1 - r2) + 0.5 * (r1 + r2 - std::abs(r1 - r2));
    const auto mc = oracle::lens_area_mc(r1, r2, d, 1'000'000, rng);
    CHECK(std::abs(lens_area(r1, r2, d) - mc.area) < 4 * mc.se);
  }
}

TEST_CASE("square proposal") {
  const auto region = UncertaintyRegion::square(Eigen::Vector2d(0, 0), 1.0);
  ProposalTuning t = default_tuning(region);
  t.epsilon = 0.7;
  Rng rng(3);
  SUBCASE("symmetric at the centre") {
    // Z(centre) is the largest normalizer, so the reverse move from x* is never cheaper.
    const auto p = propose_square(Eigen::Vector2d(0, 0), region, t, rng);
    CHECK(region.contains(p.location));
    const double expected = square_proposal_log_normalizer(Eigen::Vector2d(0, 0), region, 0.7) -
                            square_proposal_log_normalizer(p.location, region, 0.7);
    CHECK(p.log_hastings == doctest::Approx(expected));
    CHECK(square_proposal_log_normalizer(Eigen::Vector2d(0, 0), region, 0.7) ==
          doctest::Approx(2 * std::log(oracle::Phi(1 / 0.7) - oracle::Phi(-1 / 0.7))));
  }
  SUBCASE("near a corner") {
    const Eigen::Vector2d x(0.95, -0.9);
    const auto p = propose_square(x, region, t, rng);
    auto log_z = [&](const Eigen::Vector2d& m) {
      double s = 0;
      for (int d = 0; d < 2; ++d) s += std::log(oracle::Phi((1 - m[d]) / 0.7) - oracle::Phi((-1 - m[d]) / 0.7));
      return s;
    };
    CHECK(p.log_hastings == doctest::Approx(log_z(x) - log_z(p.location)).epsilon(1e-12));
    CHECK(p.log_hastings != 0.0);
  }
  SUBCASE("vanishing step") {
    t.min_epsilon = 0;
    t.epsilon = 1e-12;
    const Eigen::Vector2d x(0.3, 0.2);
    const auto p = propose_square(x, region, t, rng);
    CHECK((p.location - x).norm() < 1e-10);
    CHECK(std::abs(p.log_hastings) < 1e-12);
  }
  SUBCASE("draws stay inside and follow the truncated normal") {
    const Eigen::Vector2d x(0.8, -0.5);
    std::vector<double> a;
    for (int i = 0; i < 20000; ++i) a.push_back(propose_square(x, region, t, rng).location[0]);
    const double lo = oracle::Phi((-1 - 0.8) / 0.7), hi = oracle::Phi((1 - 0.8) / 0.7);
    CHECK(oracle::ks_pvalue(a, [&](double v) { return (oracle::Phi((v - 0.8) / 0.7) - lo) / (hi - lo); }) > 1e-3);
  }
}

TEST_CASE("disc proposal") {
  const Eigen::Vector2d c(1.0, 2.0);
  const auto region = UncertaintyRegion::disc(c, 2.0);
  ProposalTuning t = default_tuning(region);
  Rng rng(9);
  SUBCASE("interior moves have zero Hastings term") {
    t.epsilon = 0.1;
    const auto p = propose_disc(c, region, t, rng);
    CHECK((p.location - c).norm() < 0.2);
    CHECK(p.log_hastings == doctest::Approx(0.0).scale(1.0));
  }
  SUBCASE("boundary moves use the two lens areas") {
    t.epsilon = 0.8;
    const Eigen::Vector2d x = c + Eigen::Vector2d(1.7, 0.3);
    const auto p = propose_disc(x, region, t, rng);
    CHECK(region.contains(p.location));
    const double fwd = lens_area(2.0, 1.6, (x - c).norm());
    const double rev = lens_area(2.0, 1.6, (p.location - c).norm());
    CHECK(p.log_hastings == doctest::Approx(std::log(fwd) - std::log(rev)).epsilon(1e-14));
    const auto mc = oracle::lens_area_mc(2.0, 1.6, (x - c).norm(), 1'000'000, rng);
    CHECK(std::abs(fwd - mc.area) < 4 * mc.se);
  }
  SUBCASE("step disc covering the region") {
    t.max_epsilon = 10;
    t.epsilon = 2.5;
    const auto p = propose_disc(c + Eigen::Vector2d(0.5, -1.0), region, t, rng);
    CHECK(p.log_hastings == doctest::Approx(0.0).scale(1.0));
  }
  SUBCASE("uniform on the lens") {
    t.epsilon = 0.75;
    const Eigen::Vector2d x = c + Eigen::Vector2d(-1.2, 1.1);
    std::vector<Eigen::Vector2d> draws;
    for (int i = 0; i < 50000; ++i) draws.push_back(propose_disc(x, region, t, rng).location);
    CHECK(oracle::lens_uniformity_pvalue(draws, c, 2.0, x, 1.5) > 1e-3);
  }
  SUBCASE("rejection cap") {
    t.max_epsilon = 1e9;
    t.epsilon = 1e5;
    CHECK_THROWS_AS(propose_disc(c + Eigen::Vector2d(1.9, 0), region, t, rng), std::runtime_error);
  }
}

TEST_CASE("epsilon adaptation") {
  ProposalTuning t;
  t.epsilon = 1.0;
  SUBCASE("all rejections shrink epsilon") {
    double prev = t.epsilon;
    for (int i = 0; i < 50; ++i) {
      t = adapt_epsilon(t, false);
      CHECK(t.epsilon < prev);
      prev = t.epsilon;
    }
  }
  SUBCASE("update size follows s^-0.6") {
    for (int s = 1; s <= 30; ++s) {
      const double before = t.epsilon;
      const bool acc = s % 3 == 0;
      t = adapt_epsilon(t, acc);
      const double expected = std::pow(static_cast<double>(s), -0.6) * ((acc ? 1.0 : 0.0) - 0.44);
      CHECK(std::log(t.epsilon) - std::log(before) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("held at the target the scale settles") {
    Rng rng(1);
    std::bernoulli_distribution acc(0.44);
    for (int i = 0; i < 200000; ++i) t = adapt_epsilon(t, acc(rng));
    const double settled = t.epsilon;
    for (int i = 0; i < 1000; ++i) t = adapt_epsilon(t, acc(rng));
    CHECK(std::abs(std::log(t.epsilon / settled)) < 0.05);
  }
  SUBCASE("bounds") {
    t.min_epsilon = 0.5;
    for (int i = 0; i < 100; ++i) t = adapt_epsilon(t, false);
    CHECK(t.epsilon == 0.5);
  }
}

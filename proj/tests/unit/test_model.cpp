#include "fixtures.hpp"
#include "oracles.hpp"

#include "hawkes/model.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace hawkes;

namespace {

EventCatalog two_events() {
  LocationMatrix x(2, 2);
  x << 0.0, 0.0, 1.0, 0.0;
  return {x, {0.0, 1.0}};
}

const HawkesParams kUnitish{1.0, 2.0, 2.0, 1.0, 1.0, 1.0};

double half_normal(double v, double sd) {
  return std::log(2.0) - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(sd) - 0.5 * (v / sd) * (v / sd);
}

double oracle_half_normal_sum(const HawkesParams& p, const ParamPriors& s) {
  return half_normal(p.mu0, s.mu0_sd) + half_normal(p.theta, s.theta_sd) + half_normal(1 / p.tau_x, s.inv_tau_x_sd) +
         half_normal(1 / p.tau_t, s.inv_tau_t_sd) + half_normal(p.omega, s.omega_sd) + half_normal(1 / p.h, s.inv_h_sd);
}

}  // namespace

TEST_CASE("event catalog validation") {
  LocationMatrix x(2, 2);
  x << 0, 0, 1, 1;
  CHECK_THROWS_AS(EventCatalog(x, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(EventCatalog(x, {-1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(EventCatalog(x, {0.0}), std::invalid_argument);
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(EventCatalog(x, {0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(EventCatalog(LocationMatrix::Zero(2, 9), {0.0, 1.0}), std::invalid_argument);

  std::vector<Event> events{{Eigen::Vector2d(1, 1), 2.0}, {Eigen::Vector2d(0, 0), 1.0}};
  const auto sorted = EventCatalog::from_events(events);
  CHECK(sorted.times()[0] == 1.0);
  CHECK(sorted.locations()(0, 0) == 0.0);
}

TEST_CASE("pairwise rate against a scalar transcription") {
  const auto c = two_events();
  CHECK(pairwise_rate(0, 0, c, kUnitish) == 0.0);
  CHECK(pairwise_rate(1, 0, c, kUnitish) == doctest::Approx(0.0416933796137135367).epsilon(1e-14));
  const auto later = pairwise_components(0, 1, c, kUnitish);
  CHECK(later.excitation == 0.0);
  CHECK(later.background == doctest::Approx(0.0061811116732046948).epsilon(1e-14));
  CHECK_THROWS_AS(pairwise_rate(2, 0, c, kUnitish), std::out_of_range);
}

TEST_CASE("pairwise rate splits additively into background and excitation") {
  std::mt19937_64 rng(7);
  const auto c = fixtures::random_catalog(6, 2, rng);
  const auto p = fixtures::random_params(rng);
  for (std::size_t n = 0; n < c.size(); ++n) {
    for (std::size_t m = 0; m < c.size(); ++m) {
      const auto [mu, xi] = oracle::pair_terms(c, n, m, p);
      const auto got = pairwise_components(n, m, c, p);
      CHECK(got.background == doctest::Approx(mu).epsilon(1e-12));
      CHECK(got.excitation == doctest::Approx(xi).epsilon(1e-12));
      CHECK(pairwise_rate(n, m, c, p) == doctest::Approx(mu + xi).epsilon(1e-12));
    }
  }
}

TEST_CASE("log-likelihood matches the naive double loop") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const int dim = 1 + rep % 3;
    const auto c = fixtures::random_catalog(5 + 2 * static_cast<std::size_t>(rep), dim, rng);
    const auto p = fixtures::random_params(rng);
    const double expected = oracle::log_likelihood(c, p);
    CHECK(log_likelihood(c, p) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("rate breakdown decomposes the pair sums") {
  std::mt19937_64 rng(3);
  const auto c = fixtures::random_catalog(12, 2, rng);
  const auto p = fixtures::random_params(rng);
  const auto b = rate_breakdown(c, p);
  double total_pairs = 0.0;
  double total_lambda = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    for (std::size_t m = 0; m < c.size(); ++m) total_pairs += pairwise_rate(n, m, c, p);
    total_lambda += b.lambda[n];
    CHECK(b.lambda[n] == doctest::Approx(b.mu[n] + b.xi[n]).epsilon(1e-15));
    CHECK(b.ell[n] == doctest::Approx(std::log(b.lambda[n]) - b.integrated[n]).epsilon(1e-13));
  }
  CHECK(total_lambda == doctest::Approx(total_pairs).epsilon(1e-12));
}

TEST_CASE("integrated intensity") {
  const HawkesParams p{0.7, 1.3, 2.0, 0.9, 1.1, 0.4};
  SUBCASE("exponential term vanishes at the last event") {
    const double at_end = integrated_intensity_term(5.0, 5.0, p);
    const double bg = p.mu0 * (oracle::Phi(0.0) - oracle::Phi(-5.0 / p.tau_t));
    CHECK(at_end == doctest::Approx(bg).epsilon(1e-15));
  }
  SUBCASE("quadrature") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
      const auto q = fixtures::random_params(rng);
      std::uniform_real_distribution<double> u(0.0, 20.0);
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      const double exact = oracle::integrated_by_quadrature(a, b, q);
      CHECK(integrated_intensity_term(a, b, q) == doctest::Approx(exact).epsilon(1e-8));
    }
  }
  SUBCASE("excitation contribution grows with theta") {
    auto lo = p;
    auto hi = p;
    hi.theta = 2.0 * lo.theta;
    CHECK(integrated_intensity_term(1.0, 4.0, hi) > integrated_intensity_term(1.0, 4.0, lo));
  }
}

TEST_CASE("degenerate catalogs give -inf") {
  const HawkesParams p{1.0, 2.0, 2.0, 1e-9, 1.0, 1.0};
  LocationMatrix x = LocationMatrix::Zero(3, 2);
  x(1, 0) = 1.0;
  CHECK(log_likelihood(EventCatalog(x, {2.0, 2.0, 2.0}), p) == -std::numeric_limits<double>::infinity());
  CHECK(log_likelihood(EventCatalog(LocationMatrix::Zero(1, 2), {1.0}), p) ==
        -std::numeric_limits<double>::infinity());
  auto bad = p;
  bad.h = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(log_likelihood(EventCatalog(x, {0.0, 1.0, 2.0}), bad));
}

TEST_CASE("far-apart events stay finite in the log domain") {
  // Pair terms near exp(-1000) underflow in linear arithmetic.
  LocationMatrix x(3, 2);
  x << 0, 0, 45, 0, 90, 0;
  const EventCatalog c(x, {0.0, 1.0, 2.0});
  const HawkesParams p{1.0, 1.0, 1.0, 1.0, 1.5, 0.5};
  const double ll = log_likelihood(c, p);
  CHECK(std::isfinite(ll));
  const auto b = rate_breakdown(c, p);
  // Row 1: dominant background term from event 0 and 2 at distance 45: log = -45^2/2 + ...
  const double log_mu_pair = std::log(p.mu0 / (p.tau_x * p.tau_x * p.tau_t)) - std::log(2 * std::numbers::pi) -
                             0.5 * std::log(2 * std::numbers::pi) - 0.5 * 45.0 * 45.0 - 0.5;
  CHECK(b.log_lambda[1] == doctest::Approx(log_mu_pair + std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("translation invariance") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 10; ++rep) {
    const auto c = fixtures::random_catalog(30, 2, rng);
    const auto p = fixtures::random_params(rng);
    LocationMatrix shifted = c.locations();
    shifted.rowwise() += Eigen::RowVector2d(3.7, -12.1);
    CHECK(log_likelihood(c.with_locations(shifted), p) == doctest::Approx(log_likelihood(c, p)).epsilon(1e-10));
  }
}

TEST_CASE("parameter priors") {
  const ParamPriors priors;
  HawkesParams p{0.8, 2.0, 3.0, 0.4, 1.2, 0.6};
  REQUIRE(p.admissible());
  const double expected = oracle_half_normal_sum(p, priors);
  CHECK(log_prior_params(p, priors) == doctest::Approx(expected).epsilon(1e-13));

  auto bad = p;
  bad.h = 2.5;
  CHECK(log_prior_params(bad, priors) == -std::numeric_limits<double>::infinity());
  bad = p;
  bad.omega = 0.2;  // 1/omega = 5 > tau_t
  CHECK(log_prior_params(bad, priors) == -std::numeric_limits<double>::infinity());

  const auto scaled = ParamPriors::from_base_sd(0.5);
  CHECK(scaled.inv_h_sd == 0.5);
  CHECK(scaled.inv_tau_x_sd == 5.0);
  CHECK(scaled.omega_sd == 0.5);
  CHECK(scaled.inv_tau_t_sd == 5.0);
}

TEST_CASE("normalized self-excitatory weight") {
  HawkesParams p;
  p.theta = 1.0;
  p.mu0 = 1.0;
  CHECK(normalized_se_weight(p) == 0.5);
  p.mu0 = 3.0;
  CHECK(normalized_se_weight(p) == 0.25);
  p.theta = 1e-300;
  CHECK(normalized_se_weight(p) == doctest::Approx(0.0));
}

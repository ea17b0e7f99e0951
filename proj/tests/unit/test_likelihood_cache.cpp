#include "fixtures.hpp"

#include "hawkes/likelihood_cache.hpp"

#include <doctest.h>

#include <numeric>

using namespace hawkes;

namespace {

double direct(const LikelihoodCache& c) {
  return log_likelihood(EventCatalog(c.locations(), std::vector<double>(c.times().begin(), c.times().end())),
                        c.params());
}

}  // namespace

TEST_CASE("likelihood cache agrees with direct evaluation") {
  std::mt19937_64 rng(81);
  const auto catalog = fixtures::random_catalog(60, 2, rng, 2.0, 20.0);
  auto params = fixtures::random_params(rng);
  LikelihoodCache cache(catalog, params);
  CHECK(cache.log_likelihood() == doctest::Approx(log_likelihood(catalog, params)).epsilon(1e-12));

  std::uniform_int_distribution<std::size_t> pick(0, catalog.size() - 1);
  std::normal_distribution<double> z(0.0, 0.3);
  std::bernoulli_distribution accept(0.5);
  for (int move = 0; move < 300; ++move) {
    const double before = cache.log_likelihood();
    double proposed = 0.0;
    double expected = 0.0;
    if (move % 3 == 0) {
      auto candidate = fixtures::random_params(rng);
      proposed = cache.propose_params(candidate);
      expected = log_likelihood(catalog.with_locations(cache.locations()), candidate);
    } else {
      std::vector<std::size_t> idx{pick(rng), pick(rng), pick(rng)};
      std::sort(idx.begin(), idx.end());
      idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
      LocationMatrix moved(static_cast<Eigen::Index>(idx.size()), 2);
      LocationMatrix full = cache.locations();
      for (std::size_t k = 0; k < idx.size(); ++k) {
        for (int d = 0; d < 2; ++d) moved(static_cast<Eigen::Index>(k), d) = cache.locations()(static_cast<Eigen::Index>(idx[k]), d) + z(rng);
        full.row(static_cast<Eigen::Index>(idx[k])) = moved.row(static_cast<Eigen::Index>(k));
      }
      proposed = cache.propose_locations(idx, moved);
      expected = log_likelihood(catalog.with_locations(full), cache.params());
    }
    REQUIRE(proposed == doctest::Approx(expected).epsilon(1e-10));
    if (accept(rng)) {
      cache.commit();
      CHECK(cache.log_likelihood() == proposed);
    } else {
      CHECK(cache.log_likelihood() == before);
    }
    REQUIRE(cache.log_likelihood() == doctest::Approx(direct(cache)).epsilon(1e-10));
  }
}

TEST_CASE("likelihood cache two-phase semantics") {
  std::mt19937_64 rng(82);
  const auto catalog = fixtures::random_catalog(20, 3, rng);
  const auto params = fixtures::random_params(rng);
  LikelihoodCache cache(catalog, params);
  const double base = cache.log_likelihood();

  SUBCASE("a second proposal replaces the first") {
    auto p2 = params;
    p2.mu0 *= 2;
    cache.propose_params(p2);
    std::vector<std::size_t> idx{4};
    LocationMatrix moved = catalog.locations().row(4) * 0.5;
    const double pending = cache.propose_locations(idx, moved);
    cache.commit();
    CHECK(cache.params().mu0 == params.mu0);
    CHECK(cache.log_likelihood() == pending);
  }
  SUBCASE("commit without a pending proposal throws") {
    CHECK_THROWS_AS(cache.commit(), std::logic_error);
    cache.propose_params(params);
    cache.commit();
    CHECK_THROWS_AS(cache.commit(), std::logic_error);
    CHECK(cache.log_likelihood() == doctest::Approx(base).epsilon(1e-14));
  }
  SUBCASE("refresh and reset") {
    cache.refresh();
    CHECK(cache.log_likelihood() == doctest::Approx(base).epsilon(1e-13));
    LocationMatrix x = catalog.locations() * 1.5;
    cache.reset(x, params);
    CHECK(cache.log_likelihood() == doctest::Approx(log_likelihood(catalog.with_locations(x), params)).epsilon(1e-12));
  }
  SUBCASE("moving every event") {
    std::vector<std::size_t> all(catalog.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    LocationMatrix x = catalog.locations().array() + 0.1;
    CHECK(cache.propose_locations(all, x) == doctest::Approx(base).epsilon(1e-11));
  }
  SUBCASE("malformed location proposals") {
    std::vector<std::size_t> idx{1, 2};
    CHECK_THROWS(cache.propose_locations(idx, LocationMatrix::Zero(1, 3)));
    std::vector<std::size_t> bad{99};
    CHECK_THROWS(cache.propose_locations(bad, LocationMatrix::Zero(1, 3)));
  }
}

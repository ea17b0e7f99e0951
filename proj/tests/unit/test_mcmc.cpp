#include "fixtures.hpp"
#include "oracles.hpp"

#include "hawkes/mcmc.hpp"

#include <doctest.h>

using namespace hawkes;

namespace {

EventCatalog two_events() {
  LocationMatrix x(2, 2);
  x << 0, 0, 3, 1;
  return {x, {0.5, 2.0}};
}

SamplerConfig short_config(std::uint64_t iterations, std::uint64_t seed) {
  SamplerConfig c;
  c.iterations = iterations;
  c.burn_in = iterations / 5;
  c.thin = 5;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("chains are reproducible from the seed") {
  std::mt19937_64 rng(3);
  const auto catalog = fixtures::random_catalog(30, 2, rng, 3.0, 30.0);
  ModelSpec model(catalog);
  for (std::size_t n = 0; n < catalog.size(); ++n) {
    model.regions.push_back(UncertaintyRegion::square(catalog.locations().row(static_cast<Eigen::Index>(n)).transpose(), 0.5));
  }
  const auto a = run_chain(short_config(2000, 11), model);
  const auto b = run_chain(short_config(2000, 11), model);
  const auto c = run_chain(short_config(2000, 12), model);
  REQUIRE(a.snapshots.size() == 320);
  bool all_equal = true;
  bool any_differs = false;
  for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
    all_equal = all_equal && a.snapshots[s].log_likelihood == b.snapshots[s].log_likelihood &&
                a.snapshots[s].locations == b.snapshots[s].locations;
    any_differs = any_differs || a.snapshots[s].log_likelihood != c.snapshots[s].log_likelihood;
  }
  CHECK(all_equal);
  CHECK(any_differs);

  std::vector<Snapshot> streamed;
  const auto d = run_chain(short_config(2000, 11), model, [&](const Snapshot& s) { streamed.push_back(s); });
  CHECK(d.snapshots.empty());
  REQUIRE(streamed.size() == a.snapshots.size());
  CHECK(streamed.back().params.h == a.snapshots.back().params.h);
}

TEST_CASE("location moves") {
  const auto catalog = two_events();
  SUBCASE("zero location probability keeps locations fixed") {
    ModelSpec model(catalog);
    model.regions = {UncertaintyRegion::square(Eigen::Vector2d(0, 0), 1.0),
                     UncertaintyRegion::disc(Eigen::Vector2d(3, 1), 1.0)};
    auto cfg = short_config(500, 1);
    cfg.param_move_prob = 1.0;
    cfg.location_move_prob = 0.0;
    const auto r = run_chain(cfg, model);
    for (const auto& s : r.snapshots) CHECK(s.locations == catalog.locations());
    CHECK(r.final_state.location_moves.attempted == 0);
  }
  SUBCASE("point regions are a no-op") {
    ModelSpec model(catalog);
    Sampler sampler(model, short_config(10, 1));
    std::vector<std::size_t> block{0, 1};
    CHECK(sampler.step_locations_block(block, true));
    CHECK(sampler.state().locations == catalog.locations());
    CHECK(sampler.state().location_moves.attempted == 0);
    CHECK(sampler.step_locations_random_block(true));
  }
  SUBCASE("initial locations must lie in their regions") {
    ModelSpec model(catalog);
    model.regions = {UncertaintyRegion::square(Eigen::Vector2d(5, 5), 1.0),
                     UncertaintyRegion::point(Eigen::Vector2d(3, 1))};
    CHECK_THROWS_AS(Sampler(model, short_config(10, 1)), std::invalid_argument);
  }
}

TEST_CASE("flat likelihood leaves the region priors invariant") {
  LocationMatrix x(3, 2);
  x << 0, 0, 10, 10, -5, 2;
  const EventCatalog catalog(x, {0.0, 1.0, 2.0});
  ModelSpec model(catalog);
  model.likelihood = LikelihoodKind::Flat;
  model.regions = {UncertaintyRegion::square(Eigen::Vector2d(0, 0), 1.0),
                   UncertaintyRegion::disc(Eigen::Vector2d(10, 10), 2.0),
                   UncertaintyRegion::point(Eigen::Vector2d(-5, 2))};
  auto cfg = short_config(120000, 17);
  cfg.burn_in = 2000;
  cfg.thin = 40;
  cfg.block_size = 1;
  cfg.param_move_prob = 0.0;
  cfg.location_move_prob = 1.0;
  const auto r = run_chain(cfg, model);

  std::vector<double> sx, sy, radius2, angle;
  for (const auto& s : r.snapshots) {
    sx.push_back(s.locations(0, 0));
    sy.push_back(s.locations(0, 1));
    const double dx = s.locations(1, 0) - 10, dy = s.locations(1, 1) - 10;
    radius2.push_back((dx * dx + dy * dy) / 4.0);
    angle.push_back(std::atan2(dy, dx));
    REQUIRE(s.locations(2, 0) == -5.0);
  }
  auto uniform = [](double lo, double hi) { return [=](double v) { return std::clamp((v - lo) / (hi - lo), 0.0, 1.0); }; };
  CHECK(oracle::ks_pvalue(sx, uniform(-1, 1)) > 1e-3);
  CHECK(oracle::ks_pvalue(sy, uniform(-1, 1)) > 1e-3);
  CHECK(oracle::ks_pvalue(radius2, uniform(0, 1)) > 1e-3);
  CHECK(oracle::ks_pvalue(angle, uniform(-std::numbers::pi, std::numbers::pi)) > 1e-3);
  CHECK(r.final_state.location_moves.attempted > 100000);
}

TEST_CASE("parameter moves respect the ordering constraints") {
  std::mt19937_64 rng(9);
  const auto catalog = fixtures::random_catalog(25, 2, rng, 2.0, 20.0);
  ModelSpec model(catalog);
  HawkesParams start;
  start.h = 0.99;
  start.tau_x = 1.0;
  start.omega = 1.01;
  start.tau_t = 1.0;
  Sampler sampler(model, short_config(10, 4), start, catalog.locations());
  for (int i = 0; i < 3000; ++i) {
    sampler.step_params(i < 1000);
    const auto& p = sampler.state().params;
    REQUIRE(p.h < p.tau_x);
    REQUIRE(1.0 / p.omega < p.tau_t);
  }
  const auto& moves = sampler.state().param_moves;
  CHECK(moves.attempted == 3000);
  std::uint64_t per_param = 0;
  for (const auto& t : sampler.state().param_tuning) per_param += t.accepts;
  CHECK(per_param == moves.accepted);
  CHECK(sampler.hawkes_log_likelihood() ==
        doctest::Approx(log_likelihood(catalog, sampler.state().params)).epsilon(1e-10));

  HawkesParams bad = start;
  bad.h = 2.0;
  CHECK_THROWS(Sampler(model, short_config(10, 4), bad, catalog.locations()));
}

TEST_CASE("initial parameters satisfy the constraints") {
  const auto p = initial_params(ParamPriors{});
  CHECK(p.h < p.tau_x);
  CHECK(1.0 / p.omega < p.tau_t);
  CHECK(p.mu0 == doctest::Approx(0.6744897501960817));
}

TEST_CASE("sampler configuration validation") {
  SamplerConfig c;
  c.param_move_prob = 0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SamplerConfig{};
  c.burn_in = c.iterations + 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SamplerConfig{};
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_NOTHROW(SamplerConfig::bmds_defaults().validate());

  ModelSpec model(two_events());
  CHECK_THROWS_AS(Sampler(model, SamplerConfig::bmds_defaults()), std::invalid_argument);
}

TEST_CASE("leapfrog") {
  // Anharmonic potential U = sum x^4 / 4 + x^2 / 2.
  auto grad = [](const LocationMatrix& x) -> LocationMatrix { return x.array().cube() + x.array(); };
  auto energy = [](const LocationMatrix& x, const LocationMatrix& p) {
    return (x.array().pow(4) / 4 + x.array().square() / 2).sum() + 0.5 * p.squaredNorm();
  };
  LocationMatrix x0(3, 2), p0(3, 2);
  x0 << 0.3, -0.5, 1.0, 0.2, -0.7, 0.9;
  p0 << 0.5, 0.1, -0.4, 0.8, 0.2, -0.3;
  const double h0 = energy(x0, p0);

  SUBCASE("second-order energy error") {
    std::vector<double> err;
    for (auto [steps, eta] : {std::pair{20, 1e-2}, std::pair{40, 5e-3}, std::pair{80, 2.5e-3}}) {
      LocationMatrix x = x0, p = p0;
      REQUIRE(leapfrog(x, p, eta, steps, grad));
      err.push_back(std::abs(energy(x, p) - h0));
    }
    CHECK(err[0] / err[1] >= 3.5);
    CHECK(err[0] / err[1] <= 4.5);
    CHECK(err[1] / err[2] >= 3.5);
    CHECK(err[1] / err[2] <= 4.5);
  }
  SUBCASE("reversible") {
    LocationMatrix x = x0, p = p0;
    REQUIRE(leapfrog(x, p, 0.05, 30, grad));
    p = -p;
    REQUIRE(leapfrog(x, p, 0.05, 30, grad));
    CHECK((x - x0).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((p + p0).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("non-finite gradients abort") {
    LocationMatrix x = x0, p = p0;
    auto blowup = [](const LocationMatrix& at) -> LocationMatrix {
      return LocationMatrix::Constant(at.rows(), at.cols(), std::numeric_limits<double>::infinity());
    };
    CHECK_FALSE(leapfrog(x, p, 0.1, 5, blowup));
  }
}

TEST_CASE("BMDS chain") {
  std::mt19937_64 rng(55);
  const auto truth = fixtures::random_catalog(12, 2, rng, 2.0, 10.0);
  Eigen::MatrixXd y(12, 12);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (Eigen::Index i = 0; i < 12; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      y(i, j) = y(j, i) = i == j ? 0.0 : std::abs((truth.locations().row(i) - truth.locations().row(j)).norm() + noise(rng));
    }
  }
  const DistanceMatrix distances(y);
  ModelSpec model(truth);
  model.mode = ModelMode::Bmds;
  model.distances = &distances;
  auto cfg = SamplerConfig::bmds_defaults();
  cfg.iterations = 6000;
  cfg.burn_in = 3000;
  cfg.thin = 10;
  cfg.seed = 8;
  Sampler sampler(model, cfg);
  for (std::uint64_t i = 0; i < cfg.iterations; ++i) sampler.step();
  const auto& s = sampler.state();
  CHECK(s.hmc_moves.attempted > 1000);
  CHECK(s.hmc_moves.rate() > 0.4);
  CHECK(s.hmc_moves.rate() < 0.95);
  CHECK(s.hmc_step_size != cfg.step_size);
  CHECK(sampler.bmds_log_likelihood() ==
        doctest::Approx(bmds_log_density(distances, {s.locations, *s.sigma2})).epsilon(1e-12));
  CHECK(sampler.hawkes_log_likelihood() ==
        doctest::Approx(log_likelihood(truth.with_locations(s.locations), s.params)).epsilon(1e-10));
  CHECK(*s.sigma2 < 0.5);
  CHECK_THROWS_AS(sampler.step_locations_random_block(false), std::logic_error);
}

#include "hawkes/mcmc.hpp"

#include <doctest.h>

#include <random>

using namespace hawkes;

TEST_CASE("effective sample size") {
  std::mt19937_64 rng(70);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t s = 20000;

  SUBCASE("white noise") {
    std::vector<double> v(s);
    for (auto& x : v) x = z(rng);
    const auto e = ess(v);
    CHECK(e.value == doctest::Approx(static_cast<double>(s)).epsilon(0.15));
  }
  SUBCASE("AR(1) with rho 0.9") {
    std::vector<double> v(s);
    double x = 0.0;
    for (auto& out : v) out = x = 0.9 * x + z(rng);
    const double expected = static_cast<double>(s) * (1 - 0.9) / (1 + 0.9);
    const auto e = ess(v);
    CHECK(e.value == doctest::Approx(expected).epsilon(0.25));
    CHECK(e.flag == EssFlag::Ok);
  }
  SUBCASE("antithetic series") {
    std::vector<double> v(s);
    for (std::size_t i = 0; i < s; ++i) v[i] = (i % 2 ? 1.0 : -1.0) + 0.1 * z(rng);
    const auto e = ess(v);
    CHECK(e.flag == EssFlag::Antithetic);
    CHECK(e.value > static_cast<double>(s));
    CHECK(e.value <= static_cast<double>(s) * std::log10(static_cast<double>(s)));
  }
  SUBCASE("constant series") {
    std::vector<double> v(100, 2.5);
    CHECK(ess(v).flag == EssFlag::Constant);
    const auto q = summarize_quantity("c", "u", v);
    CHECK(q.ess == 100.0);
    CHECK(q.ess_flag == EssFlag::Constant);
  }
  CHECK_THROWS_AS(ess(std::vector<double>(5, 1.0)), std::invalid_argument);
}

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{4, 1, 3, 2, 5};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 5.0);
  CHECK(quantile(v, 0.5) == 3.0);
  CHECK(quantile(v, 0.1) == doctest::Approx(1.4));
  CHECK(quantile({1.0, 2.0}, 0.025) == doctest::Approx(1.025));
  CHECK(quantile({7.0}, 0.3) == 7.0);
  CHECK_THROWS(quantile({}, 0.5));
  CHECK_THROWS(quantile(v, 1.5));

  const auto q = summarize_quantity("x", "space", v);
  CHECK(q.mean == 3.0);
  CHECK(q.median == 3.0);
  CHECK(q.q025 == doctest::Approx(1.1));
  CHECK(q.q975 == doctest::Approx(4.9));
  CHECK(q.ess == 5.0);
}

TEST_CASE("posterior diagnostics") {
  LocationMatrix obs(3, 2);
  obs << 0, 0, 1, 0, 0, 1;
  const EventCatalog observed(obs, {0.0, 0.5, 1.0});
  HawkesParams p;
  p.tau_x = 2.0;
  p.tau_t = 2.0;

  std::vector<Snapshot> snaps;
  for (int s = 0; s < 4; ++s) {
    LocationMatrix x = obs;
    x(0, 0) = s % 2 ? 1.0 : -1.0;  // mean 0
    x(1, 1) = 0.5 * s;             // mean 0.75
    snaps.push_back({static_cast<std::uint64_t>(s), p, std::nullopt, -1.0 * s, x});
  }
  SUBCASE("displacement and summaries") {
    const auto d = posterior_diagnostics(snaps, observed);
    CHECK(d.displacement[0] == doctest::Approx(0.0));
    CHECK(d.displacement[1] == doctest::Approx(0.75));
    CHECK(d.displacement[2] == 0.0);
    REQUIRE(d.quantities.size() == HawkesParams::kCount + 2);
    CHECK(d.quantities[0].name == "mu0");
    CHECK(d.quantities[0].unit == "events");
    CHECK(d.quantities[5].name == "h");
    CHECK(d.quantities.back().name == "log_likelihood");
    CHECK(d.quantities.back().mean == doctest::Approx(-1.5));
    for (double pr : d.self_excitation_probability) {
      CHECK(pr >= 0.0);
      CHECK(pr <= 1.0);
    }
    CHECK(d.self_excitation_probability[0] == 0.0);
  }
  SUBCASE("no self-excitation when theta vanishes") {
    for (auto& s : snaps) s.params.theta = 1e-300;
    const auto d = posterior_diagnostics(snaps, observed);
    for (double pr : d.self_excitation_probability) CHECK(pr == doctest::Approx(0.0));
  }
  SUBCASE("sigma2 is summarized when present") {
    for (auto& s : snaps) s.sigma2 = 0.5;
    const auto d = posterior_diagnostics(snaps, observed);
    CHECK(std::any_of(d.quantities.begin(), d.quantities.end(), [](const auto& q) { return q.name == "sigma2"; }));
  }
  CHECK_THROWS(posterior_diagnostics(std::span<const Snapshot>{}, observed));
}

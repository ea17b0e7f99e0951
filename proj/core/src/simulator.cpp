#include "hawkes/simulator.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hawkes {

std::vector<GaussianMode> SimConfig::default_modes() {
  std::vector<GaussianMode> modes(3);
  modes[0].mean = Eigen::Vector2d(-5.0, 0.0);
  modes[1].mean = Eigen::Vector2d(0.0, 5.0);
  modes[2].mean = Eigen::Vector2d(5.0, 0.0);
  for (auto& m : modes) {
    m.sd = 1.0;
    m.weight = 1.0 / 3.0;
  }
  return modes;
}

int SimConfig::dimension() const {
  return modes.empty() ? 0 : static_cast<int>(modes.front().mean.size());
}

void SimConfig::validate() const {
  if (modes.empty()) throw std::invalid_argument("simulation: at least one background mode required");
  double total = 0.0;
  for (const auto& m : modes) {
    if (m.mean.size() != dimension()) throw std::invalid_argument("simulation: mode dimensions differ");
    if (!(m.sd > 0.0) || !(m.weight >= 0.0)) throw std::invalid_argument("simulation: bad mode");
    total += m.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("simulation: mode weights must sum to 1");
  if (!(expected_background > 0.0)) throw std::invalid_argument("simulation: expected background must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("simulation: horizon must be positive");
  if (!(expected_children >= 0.0) || expected_children >= 1.0) {
    throw std::invalid_argument("simulation: expected children must be in [0, 1) (subcritical)");
  }
  if (!(child_spatial_sd > 0.0) || !(child_rate > 0.0)) {
    throw std::invalid_argument("simulation: triggering scales must be positive");
  }
}

SimulatedCatalog simulate_catalog(const SimConfig& config, Rng& rng) {
  config.validate();
  const int dim = config.dimension();
  struct Raw {
    Eigen::VectorXd x;
    double t;
    int generation;
    long parent;
  };
  std::vector<Raw> events;

  std::vector<double> weights;
  for (const auto& m : config.modes) weights.push_back(m.weight);
  std::discrete_distribution<std::size_t> pick_mode(weights.begin(), weights.end());
  std::normal_distribution<double> norm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, config.horizon);

  const auto n_background = std::poisson_distribution<long>(config.expected_background)(rng);
  for (long i = 0; i < n_background; ++i) {
    const auto& mode = config.modes[pick_mode(rng)];
    Eigen::VectorXd x(dim);
    for (int d = 0; d < dim; ++d) x[d] = mode.mean[d] + mode.sd * norm(rng);
    events.push_back({std::move(x), unif(rng), 0, -1});
  }

  std::exponential_distribution<double> gap(config.child_rate);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const long n_children =
        config.expected_children > 0.0 ? std::poisson_distribution<long>(config.expected_children)(rng) : 0;
    for (long c = 0; c < n_children; ++c) {
      const double t = events[i].t + gap(rng);
      Eigen::VectorXd x(dim);
      for (int d = 0; d < dim; ++d) x[d] = events[i].x[d] + config.child_spatial_sd * norm(rng);
      if (t > config.horizon) continue;
      events.push_back({std::move(x), t, events[i].generation + 1, static_cast<long>(i)});
    }
  }
  if (events.empty()) {
    throw std::runtime_error("simulation produced no events");
  }

  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return events[a].t < events[b].t; });
  std::vector<long> new_index(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) new_index[order[i]] = static_cast<long>(i);

  LocationMatrix x(static_cast<Eigen::Index>(events.size()), dim);
  std::vector<double> t(events.size());
  std::vector<int> generation(events.size());
  std::vector<long> parent(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Raw& e = events[order[i]];
    x.row(static_cast<Eigen::Index>(i)) = e.x.transpose();
    t[i] = e.t;
    generation[i] = e.generation;
    parent[i] = e.parent < 0 ? -1 : new_index[static_cast<std::size_t>(e.parent)];
  }
  return SimulatedCatalog{EventCatalog(std::move(x), std::move(t)), std::move(generation), std::move(parent)};
}

double round_to_grid(double value, double precision) {
  return std::round(value / precision) * precision;
}

CoarsenedData coarsen(const EventCatalog& catalog, const CoarseningSpec& spec) {
  if (!(spec.precision > 0.0) || !std::isfinite(spec.precision)) {
    throw std::invalid_argument("coarsening precision must be positive");
  }
  LocationMatrix x = catalog.locations();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = round_to_grid(x.data()[i], spec.precision);
  }
  std::vector<UncertaintyRegion> regions;
  regions.reserve(catalog.size());
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    regions.push_back(UncertaintyRegion::square(x.row(n).transpose(), 0.5 * spec.precision));
  }
  return CoarsenedData{catalog.with_locations(std::move(x)), std::move(regions)};
}

}  // namespace hawkes

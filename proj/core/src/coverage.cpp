#include "hawkes/coverage.hpp"

#include <chrono>
#include <atomic>
#include <mutex>
#include <optional>
#include <thread>

namespace hawkes {

const char* to_string(LocationMode mode) {
  return mode == LocationMode::Fixed ? "fixed" : "sampled";
}

SamplerConfig CoverageConfig::fixed_chain_defaults() {
  SamplerConfig c = SamplerConfig::grouped_defaults();
  c.param_move_prob = 1.0;
  c.location_move_prob = 0.0;
  return c;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

namespace {

ReplicateRecord run_one(const CoverageConfig& config, const SimulatedCatalog& truth,
                        const CoarsenedData& coarse, std::size_t replicate, double precision,
                        LocationMode mode, std::uint64_t chain_seed) {
  ReplicateRecord rec;
  rec.replicate = replicate;
  rec.precision = precision;
  rec.mode = mode;
  rec.n_events = truth.catalog.size();
  const auto start = std::chrono::steady_clock::now();

  ModelSpec model(coarse.catalog);
  model.priors = config.priors;
  SamplerConfig sc = mode == LocationMode::Sampled ? config.sampled_chain : config.fixed_chain;
  sc.seed = chain_seed;
  if (mode == LocationMode::Sampled) {
    model.regions = coarse.regions;
  }

  const std::size_t n_events = truth.catalog.size();
  const int dim = truth.catalog.dimension();
  std::vector<double> h_samples;
  std::vector<std::vector<double>> coord_samples;
  if (mode == LocationMode::Sampled) coord_samples.resize(n_events * static_cast<std::size_t>(dim));
  run_chain(sc, model, [&](const Snapshot& s) {
    h_samples.push_back(s.params.h);
    for (std::size_t n = 0; n < coord_samples.size(); ++n) {
      coord_samples[n].push_back(s.locations.data()[n]);
    }
  });
  if (h_samples.empty()) {
    throw std::runtime_error("chain produced no snapshots");
  }

  const double truth_h = config.simulation.child_spatial_sd;
  rec.h_median = quantile(h_samples, 0.5);
  for (double level : config.ci_levels) {
    const double lo = quantile(h_samples, 0.5 * (1.0 - level));
    const double hi = quantile(h_samples, 0.5 * (1.0 + level));
    rec.h_lower.push_back(lo);
    rec.h_upper.push_back(hi);
    rec.covered.push_back(lo <= truth_h && truth_h <= hi);
  }
  if (mode == LocationMode::Sampled) {
    std::size_t hits = 0;
    const double* true_x = truth.catalog.locations().data();
    for (std::size_t n = 0; n < coord_samples.size(); ++n) {
      const double lo = quantile(coord_samples[n], 0.025);
      const double hi = quantile(coord_samples[n], 0.975);
      if (lo <= true_x[n] && true_x[n] <= hi) ++hits;
    }
    rec.location_coverage = static_cast<double>(hits) / static_cast<double>(coord_samples.size());
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<ReplicateRecord> run_replicate(const CoverageConfig& config, std::size_t r) {
  std::vector<ReplicateRecord> out;
  Rng sim_rng(derive_seed(config.seed, r));
  std::optional<SimulatedCatalog> truth;
  std::string sim_error;
  try {
    truth.emplace(simulate_catalog(config.simulation, sim_rng));
  } catch (const std::exception& e) {
    sim_error = e.what();
  }
  for (std::size_t p = 0; p < config.precisions.size(); ++p) {
    const double precision = config.precisions[p];
    for (LocationMode mode : {LocationMode::Fixed, LocationMode::Sampled}) {
      const std::uint64_t chain_seed = derive_seed(config.seed, r, 1 + 2 * p + (mode == LocationMode::Sampled));
      if (!truth) {
        ReplicateRecord rec;
        rec.replicate = r;
        rec.precision = precision;
        rec.mode = mode;
        rec.error = "simulation failed: " + sim_error;
        out.push_back(rec);
        continue;
      }
      try {
        const auto coarse = coarsen(truth->catalog, CoarseningSpec{precision});
        out.push_back(run_one(config, *truth, coarse, r, precision, mode, chain_seed));
      } catch (const std::exception& e) {
        ReplicateRecord rec;
        rec.replicate = r;
        rec.precision = precision;
        rec.mode = mode;
        rec.n_events = truth->catalog.size();
        rec.error = e.what();
        out.push_back(rec);
      }
    }
  }
  return out;
}

}  // namespace

CoverageResult coverage_study(const CoverageConfig& config, const CoverageProgress& progress) {
  config.simulation.validate();
  config.sampled_chain.validate();
  config.fixed_chain.validate();
  if (config.replicates == 0) throw std::invalid_argument("coverage: need at least one replicate");

  std::vector<std::vector<ReplicateRecord>> per_replicate(config.replicates);
  std::mutex progress_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= config.replicates) return;
      per_replicate[r] = run_replicate(config, r);
      if (progress) {
        std::lock_guard lock(progress_mutex);
        for (const auto& rec : per_replicate[r]) progress(rec);
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, config.replicates));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  CoverageResult result;
  for (auto& recs : per_replicate) {
    for (auto& rec : recs) result.records.push_back(std::move(rec));
  }

  for (double precision : config.precisions) {
    for (LocationMode mode : {LocationMode::Fixed, LocationMode::Sampled}) {
      for (std::size_t l = 0; l < config.ci_levels.size(); ++l) {
        std::size_t ok = 0;
        std::size_t hits = 0;
        std::size_t failures = 0;
        for (const auto& rec : result.records) {
          if (rec.precision != precision || rec.mode != mode) continue;
          if (!rec.error.empty()) {
            ++failures;
            continue;
          }
          ++ok;
          if (rec.covered[l]) ++hits;
        }
        result.table.push_back({precision, config.ci_levels[l], mode,
                                ok == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(ok), ok,
                                failures});
      }
    }
    double sum = 0.0;
    std::size_t ok = 0;
    for (const auto& rec : result.records) {
      if (rec.precision != precision || rec.mode != LocationMode::Sampled || !rec.error.empty()) continue;
      sum += rec.location_coverage;
      ++ok;
    }
    result.locations.push_back({precision, ok == 0 ? 0.0 : sum / static_cast<double>(ok), ok});
  }
  return result;
}

double CoverageResult::covered(double precision, double level, LocationMode mode) const {
  for (const auto& row : table) {
    if (row.precision == precision && row.ci_level == level && row.mode == mode) return row.covered_fraction;
  }
  throw std::out_of_range("coverage: no such row");
}

double CoverageResult::location_coverage(double precision) const {
  for (const auto& row : locations) {
    if (row.precision == precision) return row.mean_coverage;
  }
  throw std::out_of_range("coverage: no such precision");
}

}  // namespace hawkes

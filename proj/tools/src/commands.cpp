#include "app/commands.hpp"

#include "app/io.hpp"

#include "hawkes/bmds.hpp"
#include "hawkes/coverage.hpp"
#include "hawkes/cross_validation.hpp"
#include "hawkes/gradients.hpp"
#include "hawkes/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace app {

namespace fs = std::filesystem;

namespace {

fs::path output_dir(const Settings& s) {
  fs::path dir = s.get("out", "hawkes_out");
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string required(const Settings& s, const std::string& key) {
  const auto v = s.get(key, "");
  if (v.empty()) throw std::invalid_argument("missing required setting '" + key + "'");
  return v;
}

void finish(const Settings& s, const fs::path& dir, std::ostream& log) {
  auto echo = open_output(dir / "config.txt");
  s.echo(echo);
  for (const auto& key : s.unused()) log << "warning: setting '" << key << "' was not used\n";
}

/// Writes to the console log and to dir/log.txt.
class TeeLog {
 public:
  TeeLog(std::ostream& console, const fs::path& file) : console_(console), file_(open_output(file)) {}
  template <typename T>
  TeeLog& operator<<(const T& v) {
    console_ << v;
    file_ << v;
    return *this;
  }
  void flush() {
    console_.flush();
    file_.flush();
  }

 private:
  std::ostream& console_;
  std::ofstream file_;
};

std::vector<std::size_t> snapshot_event_subset(const Settings& s, std::size_t n_events) {
  const auto text = s.get("snapshot_events", "0:9");
  std::vector<std::size_t> out;
  if (text == "none") return out;
  if (text == "all") {
    for (std::size_t n = 0; n < n_events; ++n) out.push_back(n);
    return out;
  }
  for (auto v : s.get_ints("snapshot_events", {})) {
    if (v >= 0 && static_cast<std::size_t>(v) < n_events) out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

hawkes::SimConfig sim_from(const Settings& s) {
  hawkes::SimConfig c;
  c.expected_background = s.get_double("sim_background", c.expected_background);
  c.horizon = s.get_double("sim_horizon", c.horizon);
  c.expected_children = s.get_double("sim_children", c.expected_children);
  c.child_spatial_sd = s.get_double("sim_h", c.child_spatial_sd);
  c.child_rate = s.get_double("sim_omega", c.child_rate);
  c.validate();
  return c;
}

/// Reorders `y` so that row n corresponds to events.ids[n].
hawkes::DistanceMatrix align_distances(const hawkes::DistanceMatrix& y, const std::vector<std::string>& ids) {
  if (y.size() != ids.size()) {
    throw std::invalid_argument("distance matrix has " + std::to_string(y.size()) + " rows but there are " +
                                std::to_string(ids.size()) + " events");
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < y.labels().size(); ++i) index[y.labels()[i]] = i;
  std::vector<std::size_t> perm(ids.size());
  for (std::size_t n = 0; n < ids.size(); ++n) {
    const auto it = index.find(ids[n]);
    if (it == index.end()) throw std::invalid_argument("event id '" + ids[n] + "' has no distance-matrix row");
    perm[n] = it->second;
  }
  Eigen::MatrixXd v(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = y(perm[i], perm[j]);
    }
  }
  return hawkes::DistanceMatrix(std::move(v), ids);
}

}  // namespace

hawkes::SamplerConfig sampler_from(const Settings& s, hawkes::SamplerConfig c) {
  c.iterations = s.get_uint("iterations", c.iterations);
  c.burn_in = s.get_uint("burnin", std::min(c.burn_in, c.iterations));
  c.thin = s.get_uint("thin", c.thin);
  c.block_size = s.get_uint("block_size", c.block_size);
  c.leapfrog_steps = static_cast<int>(s.get_int("leapfrog_steps", c.leapfrog_steps));
  c.step_size = s.get_double("step_size", c.step_size);
  c.hmc_block_size = s.get_uint("hmc_block_size", c.hmc_block_size);
  c.param_move_prob = s.get_double("param_prob", c.param_move_prob);
  c.location_move_prob = s.get_double("location_prob", c.location_move_prob);
  c.sigma2_move_prob = s.get_double("sigma2_prob", c.sigma2_move_prob);
  c.seed = s.get_uint("seed", c.seed);
  c.plan.workers = s.get_uint("workers", c.plan.workers);
  c.plan.block_width = s.get_uint("block_width", c.plan.block_width);
  c.validate();
  return c;
}

hawkes::ParamPriors priors_from(const Settings& s) {
  auto p = hawkes::ParamPriors::from_base_sd(s.get_double("prior_sd", 1.0), s.get_double("prior_ratio", 10.0));
  p.mu0_sd = s.get_double("prior_mu0_sd", p.mu0_sd);
  p.theta_sd = s.get_double("prior_theta_sd", p.theta_sd);
  return p;
}

int run_fit(const Settings& s, std::ostream& console) {
  const auto dir = output_dir(s);
  TeeLog log(console, dir / "log.txt");
  const auto mode = s.get("mode", "grouped-square");
  if (mode != "grouped-square" && mode != "grouped-disc" && mode != "fixed" && mode != "bmds") {
    throw std::invalid_argument("mode must be grouped-square, grouped-disc, fixed or bmds");
  }
  const bool bmds = mode == "bmds";

  IngestOptions opt;
  opt.units = parse_time_units(s.get("units", "model"));
  opt.default_region.half_width = s.get_double("half_width", 50.0);
  if (mode == "grouped-square") opt.default_region.kind = hawkes::RegionKind::Square;
  if (mode == "grouped-disc") opt.default_region.kind = hawkes::RegionKind::Disc;
  if (bmds) {
    const auto dims = s.get_int("dims", 2);
    if (dims < 1 || dims > hawkes::kMaxDimension) throw std::invalid_argument("dims must be in 1..8");
    opt.latent_dimension = static_cast<int>(dims);
  }
  auto table = read_events(fs::path(required(s, "events")), opt);
  for (const auto& note : table.notices) log << "notice: " << note << '\n';
  if (bmds && table.catalog.dimension() != opt.latent_dimension) {
    throw std::invalid_argument("bmds mode: events file must not carry coordinates of a different dimension");
  }

  hawkes::ModelSpec model(table.catalog);
  model.priors = priors_from(s);
  hawkes::SamplerConfig config;
  std::optional<hawkes::DistanceMatrix> distances;
  if (bmds) {
    distances = align_distances(read_distance_matrix(fs::path(required(s, "distances"))), table.ids);
    model.mode = hawkes::ModelMode::Bmds;
    model.distances = &*distances;
    model.log_sigma2_prior_mean = s.get_double("log_sigma2_prior_mean", model.log_sigma2_prior_mean);
    model.log_sigma2_prior_sd = s.get_double("log_sigma2_prior_sd", model.log_sigma2_prior_sd);
    config = sampler_from(s, hawkes::SamplerConfig::bmds_defaults());
  } else if (mode == "fixed") {
    auto base = hawkes::SamplerConfig::grouped_defaults();
    base.param_move_prob = 1.0;
    base.location_move_prob = 0.0;
    config = sampler_from(s, base);
  } else {
    model.regions = table.regions;
    config = sampler_from(s, hawkes::SamplerConfig::grouped_defaults());
  }
  log << "fit: mode=" << mode << " N=" << table.catalog.size() << " D=" << table.catalog.dimension()
      << " iterations=" << config.iterations << " seed=" << config.seed << '\n';

  auto snap_out = open_output(dir / "snapshots.tsv");
  SnapshotWriter writer(snap_out, snapshot_event_subset(s, table.catalog.size()), table.catalog.dimension(), bmds);
  std::optional<std::ofstream> bin_out;
  std::optional<BinaryLocationWriter> bin_writer;
  if (s.get_bool("binary_locations", false)) {
    bin_out.emplace(open_output(dir / "locations.bin", std::ios::out | std::ios::binary));
    bin_writer.emplace(*bin_out, table.catalog.size(), table.catalog.dimension());
  }
  std::vector<hawkes::Snapshot> snapshots;
  const auto result = hawkes::run_chain(config, model, [&](const hawkes::Snapshot& snap) {
    writer.write(snap);
    if (bin_writer) bin_writer->write(snap);
    snapshots.push_back(snap);
  });
  if (snapshots.empty()) throw std::runtime_error("no snapshots retained; check iterations, burnin and thin");

  const auto summary = hawkes::posterior_diagnostics(snapshots, table.catalog);
  {
    auto out = open_output(dir / "summary.tsv");
    write_summary(out, summary.quantities);
    auto diag = open_output(dir / "diagnostics.tsv");
    write_event_diagnostics(diag, summary, table.ids);
  }
  const auto& st = result.final_state;
  char line[256];
  std::snprintf(line, sizeof line, "acceptance: params %.3f locations %.3f hmc %.3f sigma2 %.3f\n",
                st.param_moves.rate(), st.location_moves.rate(), st.hmc_moves.rate(), st.sigma2_moves.rate());
  log << line << "snapshots: " << snapshots.size() << '\n';
  finish(s, dir, console);
  return 0;
}

int run_simulate(const Settings& s, std::ostream& console) {
  const auto dir = output_dir(s);
  TeeLog log(console, dir / "log.txt");
  const auto config = sim_from(s);
  hawkes::Rng rng(s.get_uint("seed", 1));
  const auto sim = hawkes::simulate_catalog(config, rng);
  {
    auto out = open_output(dir / "events.csv");
    write_events(out, sim.catalog, {});
    auto gen = open_output(dir / "genealogy.tsv");
    gen << "id\tgeneration\tparent\n";
    for (std::size_t n = 0; n < sim.catalog.size(); ++n) {
      gen << n << '\t' << sim.generation[n] << '\t' << sim.parent[n] << '\n';
    }
  }
  log << "simulate: " << sim.catalog.size() << " events on [0, " << config.horizon << "]\n";
  finish(s, dir, console);
  return 0;
}

int run_coarsen(const Settings& s, std::ostream& console) {
  const auto dir = output_dir(s);
  TeeLog log(console, dir / "log.txt");
  IngestOptions opt;
  opt.units = parse_time_units(s.get("units", "model"));
  const auto table = read_events(fs::path(required(s, "events")), opt);
  const double precision = s.get_double("precision", 1.0);
  const auto coarse = hawkes::coarsen(table.catalog, hawkes::CoarseningSpec{precision});
  auto out = open_output(dir / "events.csv");
  write_events(out, coarse.catalog, coarse.regions, table.ids);
  log << "coarsen: " << coarse.catalog.size() << " events rounded to " << precision << '\n';
  finish(s, dir, console);
  return 0;
}

int run_coverage(const Settings& s, std::ostream& console) {
  const auto dir = output_dir(s);
  TeeLog log(console, dir / "log.txt");
  hawkes::CoverageConfig c;
  const bool full_scale = s.get_bool("full_scale", false);
  c.replicates = s.get_uint("replicates", full_scale ? 800 : 100);
  c.simulation = sim_from(s);
  c.precisions = s.get_doubles("precisions", c.precisions);
  c.ci_levels = s.get_doubles("ci_levels", c.ci_levels);
  c.priors = priors_from(s);
  c.seed = s.get_uint("seed", c.seed);
  c.workers = s.get_uint("replicate_workers", 1);
  auto sampled = hawkes::SamplerConfig::grouped_defaults();
  if (full_scale) {
    sampled.iterations = 30000;
    sampled.burn_in = 6000;
    sampled.thin = 30;
  }
  auto fixed = hawkes::CoverageConfig::fixed_chain_defaults();
  fixed.iterations = sampled.iterations;
  fixed.burn_in = sampled.burn_in;
  fixed.thin = sampled.thin;
  c.sampled_chain = sampler_from(s, sampled);
  c.fixed_chain = sampler_from(s, fixed);
  c.fixed_chain.param_move_prob = 1.0;
  c.fixed_chain.location_move_prob = 0.0;
  c.fixed_chain.sigma2_move_prob = 0.0;

  log << "coverage: " << c.replicates << " replicates, " << c.sampled_chain.iterations << " iterations per chain\n";
  log.flush();
  auto raw = open_output(dir / "replicates.tsv");
  raw << "replicate\tprecision[space]\tmode\tevents\th_median[space]";
  for (double level : c.ci_levels) {
    raw << "\th_lower_" << level << "[space]\th_upper_" << level << "[space]\tcovered_" << level;
  }
  raw << "\tlocation_coverage[fraction]\terror\n";
  const auto result = hawkes::coverage_study(c, [&](const hawkes::ReplicateRecord& r) {
    if (!r.error.empty()) {
      log << "replicate " << r.replicate << " precision " << r.precision << ' ' << hawkes::to_string(r.mode)
          << " failed: " << r.error << '\n';
    }
  });
  for (const auto& r : result.records) {
    raw << r.replicate << '\t' << format_double(r.precision) << '\t' << hawkes::to_string(r.mode) << '\t' << r.n_events
        << '\t' << format_double(r.h_median);
    for (std::size_t l = 0; l < c.ci_levels.size(); ++l) {
      if (r.error.empty()) {
        raw << '\t' << format_double(r.h_lower[l]) << '\t' << format_double(r.h_upper[l]) << '\t' << r.covered[l];
      } else {
        raw << "\tnan\tnan\t0";
      }
    }
    raw << '\t' << format_double(r.location_coverage) << '\t' << (r.error.empty() ? "-" : r.error) << '\n';
  }
  auto table = open_output(dir / "coverage.tsv");
  table << "precision[space]\tci_level[fraction]\tmode\tcovered_fraction[fraction]\treplicates\tfailures\n";
  for (const auto& row : result.table) {
    table << format_double(row.precision) << '\t' << format_double(row.ci_level) << '\t' << hawkes::to_string(row.mode)
          << '\t' << format_double(row.covered_fraction) << '\t' << row.replicates << '\t' << row.failures << '\n';
  }
  auto loc = open_output(dir / "location_coverage.tsv");
  loc << "precision[space]\tmean_location_coverage[fraction]\treplicates\n";
  for (const auto& row : result.locations) {
    loc << format_double(row.precision) << '\t' << format_double(row.mean_coverage) << '\t' << row.replicates << '\n';
  }
  for (const auto& row : result.table) {
    char line[160];
    std::snprintf(line, sizeof line, "precision %.2f  %2.0f%% CI  %-7s covered %.3f  (%zu ok, %zu failed)\n",
                  row.precision, 100.0 * row.ci_level, hawkes::to_string(row.mode), row.covered_fraction,
                  row.replicates, row.failures);
    log << line;
  }
  finish(s, dir, console);
  return 0;
}

int run_cv(const Settings& s, std::ostream& console) {
  const auto dir = output_dir(s);
  TeeLog log(console, dir / "log.txt");
  const auto dims = s.get_ints("dims", {1, 2, 3, 4});
  for (auto d : dims) {
    if (d < 1 || d > hawkes::kMaxDimension) throw std::invalid_argument("cv: dims must lie in 1..8");
  }
  const int folds = static_cast<int>(s.get_int("folds", 5));
  const auto fold_seed = s.get_uint("fold_seed", s.get_uint("seed", 1));
  const bool hawkes_term = s.get("likelihood", "hawkes") == "hawkes";

  IngestOptions opt;
  opt.units = parse_time_units(s.get("units", "model"));
  opt.latent_dimension = 1;
  const auto table = read_events(fs::path(required(s, "events")), opt);
  const auto y = align_distances(read_distance_matrix(fs::path(required(s, "distances"))), table.ids);
  hawkes::CrossValidationConfig cv;
  cv.folds = folds;
  cv.fold_seed = fold_seed;
  cv.sampler = sampler_from(s, hawkes::SamplerConfig::bmds_defaults());
  cv.likelihood = hawkes_term ? hawkes::LikelihoodKind::Hawkes : hawkes::LikelihoodKind::Flat;
  cv.priors = priors_from(s);

  auto out = open_output(dir / "lpd.tsv");
  out << "dims\tlpd_hat[nats]\tnonpositive_pairs\n";
  for (auto d : dims) {
    const auto lpd = hawkes::cross_validated_lpd(
        y, table.catalog.times(), static_cast<int>(d), cv, [&](int f, std::size_t states) {
          log << "cv: D=" << d << " fold " << f + 1 << "/" << folds << " done (" << states << " states)\n";
          log.flush();
        });
    out << d << '\t' << format_double(lpd.value) << '\t' << lpd.nonpositive << '\n';
    log << "cv: D=" << d << " lpd_hat=" << format_double(lpd.value) << '\n';
  }
  finish(s, dir, console);
  return 0;
}

int run_benchmark(const Settings& s, std::ostream& console) {
  const auto dir = output_dir(s);
  TeeLog log(console, dir / "log.txt");
  const auto sizes = s.get_ints("sizes", {1000, 5000});
  const auto workers = s.get_ints("worker_counts", {1, 2, 4});
  const auto block_width = s.get_uint("block_width", 4);
  const auto repeats = s.get_uint("repeats", 3);
  const auto kernels = s.get("kernels", "log_likelihood,gradient");
  hawkes::Rng rng(s.get_uint("seed", 1));
  const hawkes::HawkesParams params{1.0, 2.0, 2.0, 0.5, 1.0, 0.5};

  auto out = open_output(dir / "benchmark.tsv");
  out << "kernel\tN\tworker_count\tJ\twall_seconds[s]\tspeedup[x]\tchecksum\n";
  for (auto n_signed : sizes) {
    if (n_signed < 2) throw std::invalid_argument("benchmark: sizes must be >= 2");
    const auto n = static_cast<std::size_t>(n_signed);
    // Spread events so density stays comparable across N.
    const double side = std::sqrt(static_cast<double>(n));
    std::uniform_real_distribution<double> ux(0.0, side);
    std::uniform_real_distribution<double> ut(0.0, static_cast<double>(n) / 10.0);
    hawkes::LocationMatrix x(static_cast<Eigen::Index>(n), 2);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
      x(static_cast<Eigen::Index>(i), 0) = ux(rng);
      x(static_cast<Eigen::Index>(i), 1) = ux(rng);
      t[i] = ut(rng);
    }
    std::sort(t.begin(), t.end());
    const hawkes::EventCatalog catalog(std::move(x), std::move(t));

    for (const std::string kernel : {"log_likelihood", "gradient"}) {
      if (kernels.find(kernel) == std::string::npos) continue;
      double baseline = 0.0;
      for (auto w : workers) {
        const hawkes::ExecutionPlan plan{static_cast<std::size_t>(w), block_width};
        double best = std::numeric_limits<double>::infinity();
        double checksum = 0.0;
        for (std::uint64_t r = 0; r < repeats; ++r) {
          const auto start = std::chrono::steady_clock::now();
          if (kernel == "log_likelihood") {
            checksum = hawkes::log_likelihood_parallel(catalog, params, plan);
          } else {
            checksum = hawkes::grad_locations_parallel(catalog, params, plan).sum();
          }
          best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
        if (baseline == 0.0) baseline = best;
        char line[256];
        std::snprintf(line, sizeof line, "%s\t%zu\t%lld\t%zu\t%.6f\t%.3f\t%.9e\n", kernel.c_str(), n,
                      static_cast<long long>(w), static_cast<std::size_t>(block_width), best, baseline / best,
                      checksum);
        out << line;
        log << line;
        log.flush();
      }
    }
  }
  finish(s, dir, console);
  return 0;
}

int run_summarize(const Settings& s, std::ostream& console) {
  const auto dir = output_dir(s);
  TeeLog log(console, dir / "log.txt");
  const fs::path snap_path = required(s, "snapshots");
  std::ifstream in(snap_path);
  if (!in) throw InputError("cannot open " + snap_path.string());
  const auto table = read_snapshot_table(in, snap_path.string());
  std::vector<hawkes::QuantitySummary> quantities;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto& col = table.columns[c];
    if (col == "iteration") continue;
    const auto bracket = col.find('[');
    const auto name = col.substr(0, bracket);
    const auto unit = bracket == std::string::npos ? std::string{} : col.substr(bracket + 1, col.size() - bracket - 2);
    if (table.values[c].empty()) throw std::invalid_argument("snapshot file has no rows");
    quantities.push_back(hawkes::summarize_quantity(name, unit, table.values[c]));
  }
  {
    auto out = open_output(dir / "summary.tsv");
    write_summary(out, quantities);
  }

  const auto loc_path = s.get("locations", "");
  if (!loc_path.empty()) {
    // Per-event diagnostics need the observed locations and every snapshot's parameters.
    IngestOptions opt;
    opt.units = parse_time_units(s.get("units", "model"));
    opt.latent_dimension = static_cast<int>(s.get_int("dims", 2));
    const auto events = read_events(fs::path(required(s, "events")), opt);
    std::ifstream bin(loc_path, std::ios::binary);
    if (!bin) throw InputError("cannot open " + loc_path);
    const auto locs = read_binary_locations(bin);
    if (locs.n_events != events.catalog.size() || locs.locations.size() != table.values.front().size()) {
      throw std::invalid_argument("summarize: location dump does not match snapshots and events");
    }
    std::vector<hawkes::Snapshot> snaps(locs.locations.size());
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      snaps[k].iteration = locs.iterations[k];
      for (std::size_t p = 0; p < hawkes::HawkesParams::kCount; ++p) snaps[k].params.set(p, table.values[1 + p][k]);
      snaps[k].locations = locs.locations[k];
    }
    const auto summary = hawkes::posterior_diagnostics(snaps, events.catalog);
    auto diag = open_output(dir / "diagnostics.tsv");
    write_event_diagnostics(diag, summary, events.ids);
  }
  log << "summarize: " << quantities.size() << " quantities from " << table.values.front().size() << " snapshots\n";
  finish(s, dir, console);
  return 0;
}

}  // namespace app

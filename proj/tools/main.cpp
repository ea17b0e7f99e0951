#include "app/commands.hpp"
#include "app/config.hpp"
#include "app/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <iostream>
#include <optional>

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> values;
};

/// Registers the shared flags; each maps onto the settings key of the same name.
void add_common(CLI::App* sub, Flags& flags) {
  sub->add_option("--config", flags.config, "key=value settings file; flags override it");
  sub->add_option("--set", flags.assignments, "extra key=value setting (repeatable)");
  const std::pair<const char*, const char*> options[] = {
      {"mode", "grouped-square | grouped-disc | fixed | bmds"},
      {"dims", "latent dimension (fit) or list/range a:b (cv)"},
      {"iterations", "MCMC iterations"},
      {"burnin", "burn-in iterations (adaptation window)"},
      {"thin", "snapshot interval"},
      {"seed", "random seed"},
      {"workers", "likelihood/gradient worker threads"},
      {"block-width", "inner accumulation lanes J"},
      {"events", "event file (CSV)"},
      {"distances", "distance matrix file"},
      {"out", "output directory"},
  };
  for (const auto& [name, help] : options) {
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    sub->add_option_function<std::string>(std::string("--") + name,
                                          [&flags, key](const std::string& v) { flags.values[key] = v; }, help);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian spatiotemporal Hawkes processes with coarsened locations"};
  app.require_subcommand(1);
  Flags flags;

  using Runner = std::function<int(const app::Settings&, std::ostream&)>;
  std::vector<std::pair<CLI::App*, Runner>> commands;
  auto add = [&](const char* name, const char* help, Runner run) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, flags);
    commands.emplace_back(sub, std::move(run));
    return sub;
  };
  add("fit", "run the sampler on an event file", app::run_fit);
  add("simulate", "simulate a catalog by the cluster algorithm", app::run_simulate);
  auto* coarsen = add("coarsen", "round locations to a grid and emit square regions", app::run_coarsen);
  coarsen->add_option_function<std::string>("--precision", [&](const std::string& v) { flags.values["precision"] = v; },
                                            "grid size");
  auto* coverage = add("coverage", "simulation coverage study", app::run_coverage);
  coverage->add_option_function<std::string>("--replicates", [&](const std::string& v) { flags.values["replicates"] = v; },
                                             "number of replicates");
  coverage->add_option_function<std::string>("--precisions", [&](const std::string& v) { flags.values["precisions"] = v; },
                                             "comma-separated grid sizes");
  auto* cv = add("cv", "cross-validate the latent dimension", app::run_cv);
  cv->add_option_function<std::string>("--folds", [&](const std::string& v) { flags.values["folds"] = v; }, "fold count");
  auto* bench = add("benchmark", "time the likelihood and gradient kernels", app::run_benchmark);
  bench->add_option_function<std::string>("--sizes", [&](const std::string& v) { flags.values["sizes"] = v; },
                                          "comma-separated N values");
  bench->add_option_function<std::string>("--worker-counts",
                                          [&](const std::string& v) { flags.values["worker_counts"] = v; },
                                          "comma-separated worker counts");
  auto* summarize = add("summarize", "summarize a snapshot file", app::run_summarize);
  summarize->add_option_function<std::string>("--snapshots", [&](const std::string& v) { flags.values["snapshots"] = v; },
                                              "snapshots.tsv from fit");

  CLI11_PARSE(app, argc, argv);

  try {
    app::Settings settings = flags.config.empty() ? app::Settings{} : app::Settings::from_file(flags.config);
    for (const auto& a : flags.assignments) settings.set_assignment(a);
    for (const auto& [k, v] : flags.values) settings.set(k, v);
    for (const auto& [sub, run] : commands) {
      if (sub->parsed()) return run(settings, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

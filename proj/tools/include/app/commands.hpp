#pragma once

#include "app/config.hpp"

#include "hawkes/mcmc.hpp"

#include <iosfwd>

namespace app {

/// Sampler settings shared by fit, coverage and cv: iterations, burnin, thin, block_size,
/// leapfrog_steps, step_size, hmc_block_size, param_prob, location_prob, sigma2_prob,
/// seed, workers, block_width.
hawkes::SamplerConfig sampler_from(const Settings& s, hawkes::SamplerConfig base);
hawkes::ParamPriors priors_from(const Settings& s);

// Each command reads its settings, writes into the directory named by `out` and
// reports progress on `log`. They return a process exit code.
int run_fit(const Settings& s, std::ostream& log);
int run_simulate(const Settings& s, std::ostream& log);
int run_coarsen(const Settings& s, std::ostream& log);
int run_coverage(const Settings& s, std::ostream& log);
int run_cv(const Settings& s, std::ostream& log);
int run_benchmark(const Settings& s, std::ostream& log);
int run_summarize(const Settings& s, std::ostream& log);

}  // namespace app

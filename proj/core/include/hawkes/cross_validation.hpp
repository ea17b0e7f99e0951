#pragma once

#include "hawkes/bmds.hpp"
#include "hawkes/mcmc.hpp"

#include <functional>
#include <span>
#include <string>

namespace hawkes {

struct CrossValidationConfig {
  int folds = 5;
  std::uint64_t fold_seed = 1;
  SamplerConfig sampler = SamplerConfig::bmds_defaults();
  LikelihoodKind likelihood = LikelihoodKind::Hawkes;
  ParamPriors priors{};
};

/// Held-out log densities for one fold: rows are pairs, columns snapshots.
Eigen::MatrixXd held_out_log_densities(const DistanceMatrix& y, std::span<const Snapshot> snapshots,
                                       std::span<const std::pair<std::size_t, std::size_t>> pairs);

/// Fits the BMDS-Hawkes model at latent dimension `dimension` once per fold, training on
/// the other folds' pairs, and scores the held-out pairs. Chain seeds derive from
/// config.sampler.seed, the dimension and the fold.
LpdResult cross_validated_lpd(const DistanceMatrix& y, std::span<const double> times, int dimension,
                              const CrossValidationConfig& config,
                              const std::function<void(int fold, std::size_t states)>& on_fold = {});

}  // namespace hawkes

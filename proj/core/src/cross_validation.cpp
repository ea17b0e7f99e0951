#include "hawkes/cross_validation.hpp"

#include "hawkes/coverage.hpp"

#include <stdexcept>

namespace hawkes {

Eigen::MatrixXd held_out_log_densities(const DistanceMatrix& y, std::span<const Snapshot> snapshots,
                                       std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(snapshots.size()));
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const auto& snap = snapshots[k];
    if (!snap.sigma2) throw std::invalid_argument("held-out densities need sigma^2 in every snapshot");
    const double sigma = std::sqrt(*snap.sigma2);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [a, b] = pairs[p];
      const double delta =
          (snap.locations.row(static_cast<Eigen::Index>(a)) - snap.locations.row(static_cast<Eigen::Index>(b))).norm();
      m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = bmds_pair_log_density(y(a, b), delta, sigma);
    }
  }
  return m;
}

LpdResult cross_validated_lpd(const DistanceMatrix& y, std::span<const double> times, int dimension,
                              const CrossValidationConfig& config,
                              const std::function<void(int fold, std::size_t states)>& on_fold) {
  const std::size_t n = y.size();
  if (times.size() != n) throw std::invalid_argument("cross-validation: one time per object required");
  const auto plan = make_fold_plan(n, config.folds, config.fold_seed);
  const EventCatalog latent(LocationMatrix::Zero(static_cast<Eigen::Index>(n), dimension),
                            std::vector<double>(times.begin(), times.end()));
  std::vector<Eigen::MatrixXd> held(static_cast<std::size_t>(config.folds));
  for (int f = 0; f < config.folds; ++f) {
    const auto mask = plan.training_mask(n, f);
    ModelSpec model(latent);
    model.mode = ModelMode::Bmds;
    model.likelihood = config.likelihood;
    model.distances = &y;
    model.observed_pairs = &mask;
    model.priors = config.priors;
    auto sampler = config.sampler;
    sampler.seed = derive_seed(config.sampler.seed, static_cast<std::uint64_t>(dimension), static_cast<std::uint64_t>(f));
    std::vector<Snapshot> snaps;
    run_chain(sampler, model, [&](const Snapshot& s) { snaps.push_back(s); });
    held[static_cast<std::size_t>(f)] = held_out_log_densities(y, snaps, plan.held_out[static_cast<std::size_t>(f)]);
    if (on_fold) on_fold(f, snaps.size());
  }
  return lpd_hat(held);
}

}  // namespace hawkes

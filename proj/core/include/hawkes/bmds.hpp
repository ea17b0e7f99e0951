#pragma once

#include "hawkes/math.hpp"
#include "hawkes/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace hawkes {

/// Symmetric, nonnegative, zero-diagonal dissimilarities.
class DistanceMatrix {
 public:
  /// Validates symmetry to `symmetry_tol` (absolute), symmetrizes, and zeroes the diagonal.
  explicit DistanceMatrix(Eigen::MatrixXd values, std::vector<std::string> labels = {},
                          double symmetry_tol = 1e-9);

  std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> labels_;
};

struct LatentConfiguration {
  LocationMatrix x;
  double sigma2 = 1.0;
};

/// true = pair (n, n') enters the likelihood. Only the strict lower triangle is read.
using PairMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// log p(Y | X, sigma^2) up to an additive constant: each observed pair contributes
/// -log(sigma^2)/2 - (y - delta)^2 / (2 sigma^2) - log Phi(delta / sigma).
double bmds_log_density(const DistanceMatrix& y, const LatentConfiguration& cfg,
                        const PairMask* observed = nullptr);

/// Gradient of bmds_log_density with respect to X. Throws std::domain_error for coincident
/// latent points in an observed pair.
LocationMatrix bmds_grad_locations(const DistanceMatrix& y, const LatentConfiguration& cfg,
                                   const PairMask* observed = nullptr);

/// Normalized log density of one truncated-normal observation y ~ N(delta, sigma^2) 1{y > 0}.
double bmds_pair_log_density(double y, double delta, double sigma);

struct MdsResult {
  LocationMatrix coordinates;
  int padded_dimensions = 0;  ///< dimensions with no positive eigenvalue, filled with zeros
};

/// Classical (Torgerson) scaling: top-D eigenpairs of the double-centred squared distances.
MdsResult classical_mds_init(const DistanceMatrix& y, int dimension);

struct CvFoldPlan {
  int folds = 0;
  /// held_out[f] lists pairs (n, n') with n > n'.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> held_out;

  /// Observation mask for training on every fold except f.
  PairMask training_mask(std::size_t n_objects, int fold) const;
};

/// Uniformly random partition of the strict lower triangle into `folds` groups.
CvFoldPlan make_fold_plan(std::size_t n_objects, int folds, std::uint64_t seed);

struct LpdResult {
  double value = 0.0;
  std::size_t nonpositive = 0;  ///< held-out pairs whose averaged density was zero
};

/// One matrix per fold: rows are held-out pairs, columns posterior states, entries
/// log p(y_pair | state). Returns sum over folds and pairs of log mean_s exp(entry).
LpdResult lpd_hat(const std::vector<Eigen::MatrixXd>& held_out_log_densities);

}  // namespace hawkes

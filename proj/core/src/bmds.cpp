#include "hawkes/bmds.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hawkes {

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd values, std::vector<std::string> labels,
                               double symmetry_tol)
    : values_(std::move(values)), labels_(std::move(labels)) {
  if (values_.rows() != values_.cols()) {
    throw std::invalid_argument("distance matrix must be square");
  }
  if (!labels_.empty() && labels_.size() != static_cast<std::size_t>(values_.rows())) {
    throw std::invalid_argument("distance matrix: label count does not match size");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("distance matrix has non-finite entries");
  }
  const Eigen::Index n = values_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(values_(i, j) - values_(j, i)) > symmetry_tol) {
        throw std::invalid_argument("distance matrix is not symmetric at (" + std::to_string(i) +
                                    ", " + std::to_string(j) + ")");
      }
      if (values_(i, j) < 0.0 || values_(j, i) < 0.0) {
        throw std::invalid_argument("distance matrix has negative entries");
      }
      values_(j, i) = values_(i, j);
    }
    values_(i, i) = 0.0;
  }
}

namespace {

bool is_observed(const PairMask* mask, Eigen::Index i, Eigen::Index j) {
  return mask == nullptr || (*mask)(i, j);
}

void check_shapes(const DistanceMatrix& y, const LatentConfiguration& cfg) {
  if (static_cast<std::size_t>(cfg.x.rows()) != y.size()) {
    throw std::invalid_argument("bmds: latent configuration and distance matrix sizes differ");
  }
  if (!(cfg.sigma2 > 0.0) || !std::isfinite(cfg.sigma2)) {
    throw std::invalid_argument("bmds: sigma^2 must be positive");
  }
}

}  // namespace

double bmds_log_density(const DistanceMatrix& y, const LatentConfiguration& cfg,
                        const PairMask* observed) {
  check_shapes(y, cfg);
  const double sigma = std::sqrt(cfg.sigma2);
  const double inv_two_s2 = 0.5 / cfg.sigma2;
  const Eigen::Index n = cfg.x.rows();
  double residual = 0.0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (!is_observed(observed, i, j)) continue;
      const double delta = (cfg.x.row(i) - cfg.x.row(j)).norm();
      const double r = y(i, j) - delta;
      residual += r * r * inv_two_s2 + normal_log_cdf(delta / sigma);
      ++pairs;
    }
  }
  return -0.5 * static_cast<double>(pairs) * std::log(cfg.sigma2) - residual;
}

LocationMatrix bmds_grad_locations(const DistanceMatrix& y, const LatentConfiguration& cfg,
                                   const PairMask* observed) {
  check_shapes(y, cfg);
  const double sigma = std::sqrt(cfg.sigma2);
  const Eigen::Index n = cfg.x.rows();
  LocationMatrix grad = LocationMatrix::Zero(n, cfg.x.cols());
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (!is_observed(observed, i, j)) continue;
      const Eigen::RowVectorXd diff = cfg.x.row(i) - cfg.x.row(j);
      const double delta = diff.norm();
      if (delta == 0.0) {
        throw std::domain_error("bmds gradient undefined: coincident latent points " +
                                std::to_string(i) + " and " + std::to_string(j));
      }
      // d/d(delta) of -(y - delta)^2 / (2 s^2) - log Phi(delta / s)
      const double g = (y(i, j) - delta) / cfg.sigma2 - normal_hazard_ratio(delta / sigma) / sigma;
      const Eigen::RowVectorXd contrib = (g / delta) * diff;
      grad.row(i) += contrib;
      grad.row(j) -= contrib;
    }
  }
  return grad;
}

double bmds_pair_log_density(double y, double delta, double sigma) {
  if (!(y > 0.0)) {
    return kNegInf;
  }
  return normal_log_pdf((y - delta) / sigma) - std::log(sigma) - normal_log_cdf(delta / sigma);
}

MdsResult classical_mds_init(const DistanceMatrix& y, int dimension) {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (dimension < 1) {
    throw std::invalid_argument("classical MDS: dimension must be >= 1");
  }
  if (n <= dimension) {
    throw std::invalid_argument("classical MDS: need more objects than dimensions");
  }
  const Eigen::MatrixXd sq = y.values().array().square().matrix();
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const Eigen::RowVectorXd col_mean = sq.colwise().mean();
  const double grand = sq.mean();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - col_mean(j) + grand);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("classical MDS: eigendecomposition failed");
  }
  MdsResult out;
  out.coordinates = LocationMatrix::Zero(n, dimension);
  // Eigen sorts eigenvalues ascending.
  const double scale = std::max(1.0, std::abs(eig.eigenvalues()(n - 1)));
  for (int d = 0; d < dimension; ++d) {
    const Eigen::Index k = n - 1 - d;
    const double value = eig.eigenvalues()(k);
    if (!(value > 1e-12 * scale)) {
      ++out.padded_dimensions;
      continue;
    }
    Eigen::VectorXd v = eig.eigenvectors().col(k);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0.0) v = -v;
    out.coordinates.col(d) = v * std::sqrt(value);
  }
  return out;
}

PairMask CvFoldPlan::training_mask(std::size_t n_objects, int fold) const {
  const auto n = static_cast<Eigen::Index>(n_objects);
  PairMask mask = PairMask::Constant(n, n, true);
  for (const auto& [i, j] : held_out.at(static_cast<std::size_t>(fold))) {
    mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = false;
    mask(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = false;
  }
  return mask;
}

CvFoldPlan make_fold_plan(std::size_t n_objects, int folds, std::uint64_t seed) {
  if (folds < 2) {
    throw std::invalid_argument("cross-validation needs at least 2 folds");
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 1; i < n_objects; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      pairs.emplace_back(i, j);
    }
  }
  if (pairs.size() < static_cast<std::size_t>(folds)) {
    throw std::invalid_argument("cross-validation: fewer pairs than folds");
  }
  Rng rng(seed);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  CvFoldPlan plan;
  plan.folds = folds;
  plan.held_out.resize(static_cast<std::size_t>(folds));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    plan.held_out[k % static_cast<std::size_t>(folds)].push_back(pairs[k]);
  }
  for (auto& fold : plan.held_out) {
    std::sort(fold.begin(), fold.end());
  }
  return plan;
}

LpdResult lpd_hat(const std::vector<Eigen::MatrixXd>& held_out_log_densities) {
  LpdResult out;
  std::vector<double> row;
  for (const auto& fold : held_out_log_densities) {
    if (fold.rows() > 0 && fold.cols() < 1) {
      throw std::invalid_argument("lpd: need at least one posterior state per fold");
    }
    for (Eigen::Index p = 0; p < fold.rows(); ++p) {
      row.resize(static_cast<std::size_t>(fold.cols()));
      for (Eigen::Index s = 0; s < fold.cols(); ++s) row[static_cast<std::size_t>(s)] = fold(p, s);
      const double term = log_mean_exp(row);
      if (term == kNegInf) {
        ++out.nonpositive;
      }
      out.value += term;
    }
  }
  return out;
}

}  // namespace hawkes

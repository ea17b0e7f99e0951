#pragma once

#include "hawkes/model.hpp"

#include <cstddef>

namespace hawkes {

/// N x D matrix of d(ell)/d(x_nd).
using LocationGradient = LocationMatrix;

/// Row-partitioned evaluation: `workers` threads own contiguous event ranges and each row
/// is accumulated in `block_width` interleaved lanes merged by a fixed pairwise tree.
/// Results are bit-reproducible for a fixed (workers, block_width, N).
struct ExecutionPlan {
  std::size_t workers = 1;
  std::size_t block_width = 1;

  void validate() const;
};

/// Two-pass analytic gradient: all lambda_n first, then per-event gradient rows.
/// Throws std::domain_error when the log-likelihood is -inf.
LocationGradient grad_locations_serial(const EventCatalog& catalog, const HawkesParams& params);

LocationGradient grad_locations_parallel(const EventCatalog& catalog, const HawkesParams& params,
                                         const ExecutionPlan& plan);

double log_likelihood_parallel(const EventCatalog& catalog, const HawkesParams& params,
                               const ExecutionPlan& plan);

/// Log-likelihood and gradient sharing one rate pass.
struct LikelihoodAndGradient {
  double log_likelihood;
  LocationGradient gradient;
};

LikelihoodAndGradient log_likelihood_and_gradient(const EventCatalog& catalog,
                                                  const HawkesParams& params,
                                                  const ExecutionPlan& plan);

}  // namespace hawkes

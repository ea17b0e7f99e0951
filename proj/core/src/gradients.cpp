#include "hawkes/gradients.hpp"

#include "kernels.hpp"

#include <stdexcept>

namespace hawkes {

void ExecutionPlan::validate() const {
  if (workers < 1) throw std::invalid_argument("execution plan: workers must be >= 1");
  if (block_width < 1) throw std::invalid_argument("execution plan: block width must be >= 1");
}

namespace {

struct RatePass {
  std::vector<double> log_lambda;
  std::vector<double> inv_lambda;
  std::vector<double> worker_ell;  // per-worker partial sums of ell_n
  bool linear = true;
};

RatePass compute_rates(const EventCatalog& catalog, const HawkesParams& params,
                       const ExecutionPlan& plan) {
  plan.validate();
  validate_params(params);
  const detail::PairKernel k(params, catalog.dimension());
  const auto v = detail::view_of(catalog);
  const std::size_t n_events = catalog.size();
  const double t_last = v.t[n_events - 1];

  RatePass pass;
  pass.log_lambda.resize(n_events);
  pass.inv_lambda.resize(n_events);
  pass.worker_ell.assign(plan.workers, 0.0);
  std::vector<char> log_domain(n_events, 0);

  detail::for_each_partition(plan.workers, n_events,
                             [&](std::size_t b, std::size_t begin, std::size_t end) {
    std::vector<double> scratch;
    double ell = 0.0;
    for (std::size_t n = begin; n < end; ++n) {
      const auto r = detail::row_rates_dispatch(k, v, n, plan.block_width, scratch);
      pass.log_lambda[n] = r.log_lambda;
      pass.inv_lambda[n] = 1.0 / (r.mu + r.xi);
      log_domain[n] = r.log_domain ? 1 : 0;
      ell += r.log_lambda - integrated_intensity_term(v.t[n], t_last, params);
    }
    pass.worker_ell[b] = ell;
  });

  for (char flag : log_domain) {
    if (flag) {
      pass.linear = false;
      break;
    }
  }
  return pass;
}

double merge_ell(const RatePass& pass) {
  double total = 0.0;
  for (double e : pass.worker_ell) {
    total += e;
  }
  return total;
}

LocationGradient gradient_pass(const EventCatalog& catalog, const HawkesParams& params,
                               const ExecutionPlan& plan, const RatePass& pass) {
  for (double l : pass.log_lambda) {
    if (l == kNegInf) {
      throw std::domain_error("gradient undefined: some event has zero intensity");
    }
  }
  const detail::PairKernel k(params, catalog.dimension());
  const auto v = detail::view_of(catalog);
  LocationGradient grad(catalog.size(), catalog.dimension());
  detail::for_each_partition(plan.workers, catalog.size(),
                             [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> scratch;
    for (std::size_t n = begin; n < end; ++n) {
      detail::row_gradient_dispatch(k, v, n, pass.log_lambda.data(), pass.inv_lambda.data(),
                                    pass.linear, plan.block_width, scratch,
                                    grad.data() + n * v.dim);
    }
  });
  return grad;
}

}  // namespace

LocationGradient grad_locations_serial(const EventCatalog& catalog, const HawkesParams& params) {
  return grad_locations_parallel(catalog, params, ExecutionPlan{1, 1});
}

LocationGradient grad_locations_parallel(const EventCatalog& catalog, const HawkesParams& params,
                                         const ExecutionPlan& plan) {
  const auto pass = compute_rates(catalog, params, plan);
  return gradient_pass(catalog, params, plan, pass);
}

double log_likelihood_parallel(const EventCatalog& catalog, const HawkesParams& params,
                               const ExecutionPlan& plan) {
  return merge_ell(compute_rates(catalog, params, plan));
}

LikelihoodAndGradient log_likelihood_and_gradient(const EventCatalog& catalog,
                                                  const HawkesParams& params,
                                                  const ExecutionPlan& plan) {
  const auto pass = compute_rates(catalog, params, plan);
  return {merge_ell(pass), gradient_pass(catalog, params, plan, pass)};
}

}  // namespace hawkes

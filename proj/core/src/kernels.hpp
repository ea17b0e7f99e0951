#pragma once

// Pair-term kernels shared by the serial and partitioned evaluators.

#include "hawkes/math.hpp"
#include "hawkes/model.hpp"

#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

namespace hawkes::detail {

/// Pair terms whose log magnitude stays inside this bound are summed directly.
inline constexpr double kLinearLogBound = 500.0;

struct PairKernel {
  PairKernel(const HawkesParams& p, int dim)
      : dim(dim),
        omega(p.omega),
        inv_two_tau_x2(0.5 / (p.tau_x * p.tau_x)),
        inv_two_tau_t2(0.5 / (p.tau_t * p.tau_t)),
        inv_two_h2(0.5 / (p.h * p.h)),
        inv_tau_x2(1.0 / (p.tau_x * p.tau_x)),
        inv_h2(1.0 / (p.h * p.h)) {
    const double half_d = 0.5 * dim;
    log_mu_scale = std::log(p.mu0) - dim * std::log(p.tau_x) - std::log(p.tau_t) -
                   (half_d + 0.5) * kLogTwoPi;
    log_xi_scale = std::log(p.theta) + std::log(p.omega) - dim * std::log(p.h) - half_d * kLogTwoPi;
    mu_scale = std::exp(log_mu_scale);
    xi_scale = std::exp(log_xi_scale);
  }

  int dim;
  double omega;
  double inv_two_tau_x2;
  double inv_two_tau_t2;
  double inv_two_h2;
  double inv_tau_x2;
  double inv_h2;
  double log_mu_scale;
  double log_xi_scale;
  double mu_scale;
  double xi_scale;
};

template <int D>
inline double squared_distance(const double* a, const double* b, int dim) {
  if constexpr (D > 0) {
    double s = 0.0;
    for (int d = 0; d < D; ++d) {
      const double diff = a[d] - b[d];
      s += diff * diff;
    }
    return s;
  } else {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double diff = a[d] - b[d];
      s += diff * diff;
    }
    return s;
  }
}

/// In-place pairwise tree reduction of values[0..count); count >= 1.
inline double tree_reduce(double* values, std::size_t count) {
  while (count > 1) {
    const std::size_t half = count / 2;
    for (std::size_t i = 0; i < half; ++i) {
      values[i] = values[2 * i] + values[2 * i + 1];
    }
    if (count % 2 == 1) {
      values[half] = values[count - 1];
      count = half + 1;
    } else {
      count = half;
    }
  }
  return values[0];
}

/// Strided tree reduction over lanes of width `stride`, component `c`.
inline double tree_reduce_strided(double* values, std::size_t count, std::size_t stride,
                                  std::size_t c) {
  while (count > 1) {
    const std::size_t half = count / 2;
    for (std::size_t i = 0; i < half; ++i) {
      values[i * stride + c] = values[2 * i * stride + c] + values[(2 * i + 1) * stride + c];
    }
    if (count % 2 == 1) {
      values[half * stride + c] = values[(count - 1) * stride + c];
      count = half + 1;
    } else {
      count = half;
    }
  }
  return values[c];
}

struct RowRates {
  double mu = 0.0;
  double xi = 0.0;
  double log_mu = kNegInf;
  double log_xi = kNegInf;
  double log_lambda = kNegInf;
  bool log_domain = false;
};

struct CatalogView {
  const double* x;
  const double* t;
  std::size_t n_events;
  int dim;
};

inline CatalogView view_of(const EventCatalog& c) {
  return {c.locations().data(), c.times().data(), c.size(), c.dimension()};
}

inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Intensity at event n from all other events, accumulated in `lanes` interleaved partial
/// sums (lane j collects n' = block_start + j) that are merged by a fixed pairwise tree.
/// Rows whose largest pair term leaves [-500, 500] in log space are redone by log-sum-exp.
template <int D>
RowRates row_rates(const PairKernel& k, const CatalogView& v, std::size_t n, std::size_t lanes,
                   std::vector<double>& scratch) {
  const int dim = D > 0 ? D : v.dim;
  const double* xn = v.x + n * dim;
  const double tn = v.t[n];
  scratch.assign(2 * lanes, 0.0);
  double* mu_lane = scratch.data();
  double* xi_lane = scratch.data() + lanes;
  double max_mu_exp = kNegInf;
  double max_xi_exp = kNegInf;

  for (std::size_t start = 0; start < v.n_events; start += lanes) {
    const std::size_t width = std::min(lanes, v.n_events - start);
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t m = start + j;
      const double tm = v.t[m];
      if (tm == tn) {
        continue;  // equal-time pairs (including m == n) contribute to neither component
      }
      const double dt = tn - tm;
      const double d2 = squared_distance<D>(xn, v.x + m * dim, dim);
      const double e_mu = -d2 * k.inv_two_tau_x2 - dt * dt * k.inv_two_tau_t2;
      mu_lane[j] += std::exp(e_mu);
      max_mu_exp = e_mu > max_mu_exp ? e_mu : max_mu_exp;
      if (tm < tn) {
        const double e_xi = -k.omega * dt - d2 * k.inv_two_h2;
        xi_lane[j] += std::exp(e_xi);
        max_xi_exp = e_xi > max_xi_exp ? e_xi : max_xi_exp;
      }
    }
  }

  RowRates out;
  const double max_log_mu = k.log_mu_scale + max_mu_exp;
  const double max_log_xi = k.log_xi_scale + max_xi_exp;
  const double max_log = max_log_mu > max_log_xi ? max_log_mu : max_log_xi;
  if (max_log == kNegInf) {
    return out;
  }
  if (max_log >= -kLinearLogBound && max_log <= kLinearLogBound) {
    out.mu = k.mu_scale * tree_reduce(mu_lane, std::min(lanes, v.n_events));
    out.xi = k.xi_scale * tree_reduce(xi_lane, std::min(lanes, v.n_events));
    out.log_mu = std::log(out.mu);
    out.log_xi = std::log(out.xi);
    out.log_lambda = std::log(out.mu + out.xi);
    return out;
  }

  // Max-shifted accumulation, sequential over n' so it is independent of the plan.
  out.log_domain = true;
  double mu_acc = 0.0;
  double xi_acc = 0.0;
  for (std::size_t m = 0; m < v.n_events; ++m) {
    const double tm = v.t[m];
    if (tm == tn) continue;
    const double dt = tn - tm;
    const double d2 = squared_distance<D>(xn, v.x + m * dim, dim);
    mu_acc += std::exp(-d2 * k.inv_two_tau_x2 - dt * dt * k.inv_two_tau_t2 - max_mu_exp);
    if (tm < tn) {
      xi_acc += std::exp(-k.omega * dt - d2 * k.inv_two_h2 - max_xi_exp);
    }
  }
  out.log_mu = max_mu_exp == kNegInf ? kNegInf : max_log_mu + std::log(mu_acc);
  out.log_xi = max_xi_exp == kNegInf ? kNegInf : max_log_xi + std::log(xi_acc);
  out.mu = std::exp(out.log_mu);
  out.xi = std::exp(out.log_xi);
  out.log_lambda = log_add_exp(out.log_mu, out.log_xi);
  return out;
}

inline RowRates row_rates_dispatch(const PairKernel& k, const CatalogView& v, std::size_t n,
                                   std::size_t lanes, std::vector<double>& scratch) {
  if (v.dim == 2) return row_rates<2>(k, v, n, lanes, scratch);
  if (v.dim == 1) return row_rates<1>(k, v, n, lanes, scratch);
  return row_rates<0>(k, v, n, lanes, scratch);
}

/// Gradient of the log-likelihood with respect to x_n given all log(lambda). When
/// `linear` is set, inv_lambda holds 1/lambda and pair ratios are formed directly.
template <int D>
void row_gradient(const PairKernel& k, const CatalogView& v, std::size_t n,
                  const double* log_lambda, const double* inv_lambda, bool linear,
                  std::size_t lanes, std::vector<double>& scratch, double* out) {
  const int dim = D > 0 ? D : v.dim;
  const double* xn = v.x + n * dim;
  const double tn = v.t[n];
  scratch.assign(lanes * dim, 0.0);
  double* acc = scratch.data();

  for (std::size_t start = 0; start < v.n_events; start += lanes) {
    const std::size_t width = std::min(lanes, v.n_events - start);
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t m = start + j;
      const double tm = v.t[m];
      if (tm == tn) continue;
      const double* xm = v.x + m * dim;
      const double dt = tn - tm;
      const double d2 = squared_distance<D>(xn, xm, dim);
      const double e_mu = -d2 * k.inv_two_tau_x2 - dt * dt * k.inv_two_tau_t2;
      // Exactly one of xi_{nm}, xi_{mn} is present for unequal times.
      const double e_xi = -k.omega * (dt > 0.0 ? dt : -dt) - d2 * k.inv_two_h2;
      double a;
      double b;
      if (linear) {
        const double mu_pair = k.mu_scale * std::exp(e_mu);
        const double xi_pair = k.xi_scale * std::exp(e_xi);
        a = mu_pair * (inv_lambda[n] + inv_lambda[m]);
        b = xi_pair * (tm < tn ? inv_lambda[n] : inv_lambda[m]);
      } else {
        const double lmu = k.log_mu_scale + e_mu;
        const double lxi = k.log_xi_scale + e_xi;
        a = std::exp(lmu - log_lambda[n]) + std::exp(lmu - log_lambda[m]);
        b = std::exp(lxi - (tm < tn ? log_lambda[n] : log_lambda[m]));
      }
      const double c = a * k.inv_tau_x2 + b * k.inv_h2;
      double* lane = acc + j * dim;
      for (int d = 0; d < dim; ++d) {
        lane[d] += c * (xm[d] - xn[d]);
      }
    }
  }
  const std::size_t used = std::min(lanes, v.n_events);
  for (int d = 0; d < dim; ++d) {
    out[d] = tree_reduce_strided(acc, used, dim, d);
  }
}

inline void row_gradient_dispatch(const PairKernel& k, const CatalogView& v, std::size_t n,
                                  const double* log_lambda, const double* inv_lambda, bool linear,
                                  std::size_t lanes, std::vector<double>& scratch, double* out) {
  if (v.dim == 2) return row_gradient<2>(k, v, n, log_lambda, inv_lambda, linear, lanes, scratch, out);
  if (v.dim == 1) return row_gradient<1>(k, v, n, log_lambda, inv_lambda, linear, lanes, scratch, out);
  row_gradient<0>(k, v, n, log_lambda, inv_lambda, linear, lanes, scratch, out);
}

/// Runs fn(worker, begin, end) over contiguous row ranges; worker b < B-1 owns
/// [b*floor(N/B), (b+1)*floor(N/B)) and the last worker takes the remainder.
template <class Fn>
void for_each_partition(std::size_t workers, std::size_t n, Fn&& fn) {
  const std::size_t chunk = n / workers;
  auto range = [&](std::size_t b) {
    const std::size_t begin = b * chunk;
    const std::size_t end = (b + 1 == workers) ? n : (b + 1) * chunk;
    return std::pair{begin, end};
  };
  if (workers == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t b = 1; b < workers; ++b) {
    auto [begin, end] = range(b);
    pool.emplace_back([&fn, b, begin, end] { fn(b, begin, end); });
  }
  auto [begin0, end0] = range(0);
  fn(std::size_t{0}, begin0, end0);
}

}  // namespace hawkes::detail

#include "hawkes/math.hpp"

#include <algorithm>
#include <stdexcept>

namespace hawkes {

double normal_log_cdf(double z) {
  if (z > -30.0) {
    return std::log(normal_cdf(z));
  }
  // log Phi(z) = log phi(z) - log(-z) + log(1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8)
  const double z2 = 1.0 / (z * z);
  const double series = 1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
  return normal_log_pdf(z) - std::log(-z) + std::log(series);
}

double normal_cdf_diff(double a, double b) {
  if (a >= 0.0) {
    // Upper tail: Phi(b) - Phi(a) = Phi(-a) - Phi(-b).
    return normal_cdf(-a) - normal_cdf(-b);
  }
  return normal_cdf(b) - normal_cdf(a);
}

double normal_log_cdf_diff(double a, double b) {
  if (!(a < b)) {
    return kNegInf;
  }
  if (a > 0.0) {
    return normal_log_cdf_diff(-b, -a);
  }
  // Now a <= 0. log(Phi(b) - Phi(a)) = log Phi(b) + log1p(-exp(log Phi(a) - log Phi(b))).
  const double lb = normal_log_cdf(b);
  const double la = normal_log_cdf(a);
  const double d = la - lb;
  if (d > -0.693) {
    const double diff = normal_cdf_diff(a, b);
    if (diff > 0.0) {
      return std::log(diff);
    }
  }
  return lb + std::log1p(-std::exp(d));
}

double normal_hazard_ratio(double z) {
  if (z > -30.0) {
    return normal_pdf(z) / normal_cdf(z);
  }
  return std::exp(normal_log_pdf(z) - normal_log_cdf(z));
}

double half_normal_log_pdf(double value, double sd) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    return kNegInf;
  }
  const double z = value / sd;
  return normal_log_pdf(z) - std::log(sd) + std::numbers::ln2;
}

namespace {

// Exponential rejection for the one-sided case lower >= 0 (Robert, 1995).
double sample_tail(double lower, double upper, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double alpha = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  std::exponential_distribution<double> expo(alpha);
  for (;;) {
    const double z = lower + expo(rng);
    if (z >= upper) {
      continue;
    }
    const double diff = z - alpha;
    if (unif(rng) <= std::exp(-0.5 * diff * diff)) {
      return z;
    }
  }
}

// Uniform rejection on a bounded interval, envelope at the mode inside [lower, upper].
double sample_uniform_rejection(double lower, double upper, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double mode = (lower > 0.0) ? lower : (upper < 0.0 ? upper : 0.0);
  const double log_peak = -0.5 * mode * mode;
  for (;;) {
    const double z = lower + (upper - lower) * unif(rng);
    if (!(z > lower && z < upper)) {
      continue;
    }
    if (std::log(unif(rng)) <= -0.5 * z * z - log_peak) {
      return z;
    }
  }
}

}  // namespace

double sample_standard_truncated_normal(double lower, double upper, Rng& rng) {
  if (!(lower < upper)) {
    throw std::invalid_argument("truncated normal requires lower < upper");
  }
  if (lower < 0.0 && upper > 0.0) {
    const double width = upper - lower;
    if (width > 2.5066282746310002 || !std::isfinite(width)) {
      std::normal_distribution<double> norm(0.0, 1.0);
      for (;;) {
        const double z = norm(rng);
        if (z > lower && z < upper) {
          return z;
        }
      }
    }
    return sample_uniform_rejection(lower, upper, rng);
  }
  if (upper <= 0.0) {
    return -sample_standard_truncated_normal(-upper, -lower, rng);
  }
  // lower >= 0
  if (std::isfinite(upper) && lower * (upper - lower) < 1.0 && upper - lower < 1.0) {
    return sample_uniform_rejection(lower, upper, rng);
  }
  return sample_tail(lower, upper, rng);
}

double sample_truncated_normal(double mean, double sd, double lower, double upper, Rng& rng) {
  return mean + sd * sample_standard_truncated_normal((lower - mean) / sd, (upper - mean) / sd, rng);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    return kNegInf;
  }
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) {
    return m;
  }
  double acc = 0.0;
  for (double v : values) {
    acc += std::exp(v - m);
  }
  return m + std::log(acc);
}

double log_mean_exp(std::span<const double> values) {
  if (values.empty()) {
    return kNegInf;
  }
  return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

}  // namespace hawkes

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>

namespace hawkes {

using Rng = std::mt19937_64;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093454836;   // log(2*pi)
inline constexpr double kInvSqrtTwoPi = 0.39894228040143267794;

/// Standard normal density.
inline double normal_pdf(double z) { return kInvSqrtTwoPi * std::exp(-0.5 * z * z); }

inline double normal_log_pdf(double z) { return -0.5 * z * z - 0.5 * kLogTwoPi; }

/// Standard normal CDF through erfc, accurate in both tails.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

/// log Phi(z); switches to an asymptotic series where erfc underflows.
double normal_log_cdf(double z);

/// Phi(b) - Phi(a) for a <= b, evaluated on the side that avoids cancellation.
double normal_cdf_diff(double a, double b);

/// log(Phi(b) - Phi(a)) for a < b.
double normal_log_cdf_diff(double a, double b);

/// phi(z) / Phi(z) (inverse Mills ratio), stable for very negative z.
double normal_hazard_ratio(double z);

/// log of a truncated-normal density with support (0, inf), location 0 and scale sd.
/// Returns -inf outside the support.
double half_normal_log_pdf(double value, double sd);

/// Draws from the standard normal restricted to (lower, upper).
/// Either bound may be infinite; lower < upper is required.
double sample_standard_truncated_normal(double lower, double upper, Rng& rng);

/// Draws from N(mean, sd^2) restricted to (lower, upper).
double sample_truncated_normal(double mean, double sd, double lower, double upper, Rng& rng);

/// Numerically stable log(sum(exp(values))). Empty input gives -inf.
double log_sum_exp(std::span<const double> values);

/// Numerically stable log(mean(exp(values))).
double log_mean_exp(std::span<const double> values);

}  // namespace hawkes

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace hawkes {

/// Row n holds the D coordinates of event n.
using LocationMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kMaxDimension = 8;

struct Event {
  Eigen::VectorXd location;
  double time = 0.0;
};

/// Immutable, time-sorted set of events sharing one spatial dimension.
class EventCatalog {
 public:
  /// Takes ownership of locations (N x D) and times (N). Times must be finite, >= 0 and
  /// nondecreasing; locations finite; 1 <= D <= kMaxDimension.
  EventCatalog(LocationMatrix locations, std::vector<double> times);

  /// Sorts by time (stable) before construction.
  static EventCatalog from_events(std::span<const Event> events);

  std::size_t size() const { return times_.size(); }
  int dimension() const { return static_cast<int>(locations_.cols()); }
  const LocationMatrix& locations() const { return locations_; }
  std::span<const double> times() const { return times_; }
  Event event(std::size_t n) const;

  /// Same times, different locations. Used by samplers that move X.
  EventCatalog with_locations(LocationMatrix locations) const;

 private:
  LocationMatrix locations_;
  std::vector<double> times_;
};

/// Theta = (mu0, tau_x, tau_t, theta, omega, h).
struct HawkesParams {
  double mu0 = 1.0;    ///< background weight
  double tau_x = 1.0;  ///< background spatial lengthscale
  double tau_t = 1.0;  ///< background temporal lengthscale
  double theta = 1.0;  ///< self-excitatory weight
  double omega = 1.0;  ///< self-excitatory temporal rate
  double h = 1.0;      ///< self-excitatory spatial lengthscale

  static constexpr std::size_t kCount = 6;
  double get(std::size_t i) const;
  void set(std::size_t i, double value);

  bool positive() const;
  /// Positivity plus 1/omega < tau_t and h < tau_x.
  bool admissible() const;
};

const char* param_name(std::size_t i);

/// Truncated-normal (mean 0, support > 0) prior scales. Background inverse lengthscales
/// default to ten times the corresponding self-excitatory scale.
struct ParamPriors {
  double mu0_sd = 1.0;
  double theta_sd = 1.0;
  double inv_tau_x_sd = 10.0;
  double inv_tau_t_sd = 10.0;
  double omega_sd = 1.0;
  double inv_h_sd = 1.0;

  static ParamPriors from_base_sd(double self_excitatory_sd, double background_ratio = 10.0);
};

struct PairRate {
  double background = 0.0;  ///< mu_{nn'}
  double excitation = 0.0;  ///< xi_{nn'}
  double total() const { return background + excitation; }
};

/// Contribution of event nprime to the intensity at event n.
PairRate pairwise_components(std::size_t n, std::size_t nprime, const EventCatalog& catalog,
                             const HawkesParams& params);

double pairwise_rate(std::size_t n, std::size_t nprime, const EventCatalog& catalog,
                     const HawkesParams& params);

struct EventRateBreakdown {
  std::vector<double> mu;          ///< background rate at (x_n, t_n)
  std::vector<double> xi;          ///< self-excitatory rate at (x_n, t_n)
  std::vector<double> lambda;      ///< mu + xi (may underflow to 0; see log_lambda)
  std::vector<double> log_lambda;  ///< log(lambda), -inf when no pair contributes
  std::vector<double> integrated;  ///< Lambda_n
  std::vector<double> ell;         ///< log_lambda - integrated
};

EventRateBreakdown rate_breakdown(const EventCatalog& catalog, const HawkesParams& params);

/// Lambda_n, the integrated-intensity contribution of event n up to t_N.
double integrated_intensity_term(double t_n, double t_last, const HawkesParams& params);

/// Sum of per-event terms; -inf when some lambda_n vanishes. Throws on NaN parameters.
double log_likelihood(const EventCatalog& catalog, const HawkesParams& params);

/// Sum of prior log-densities on (mu0, theta, 1/tau_x, 1/tau_t, omega, 1/h);
/// -inf when the ordering constraints are violated.
double log_prior_params(const HawkesParams& params, const ParamPriors& priors);

/// theta / (theta + mu0)
double normalized_se_weight(const HawkesParams& params);

void validate_params(const HawkesParams& params);

}  // namespace hawkes

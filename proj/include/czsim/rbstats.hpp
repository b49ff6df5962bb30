#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "czsim/errors.hpp"

namespace czsim {

/// Inverse standard-normal CDF (Wichura AS241 rational approximation,
/// accurate to well below 1e-9).
double normal_quantile(double p);

double logit(double p);
double sigmoid(double x);

/// Binomial count data per Clifford depth.
struct RBDataset {
  std::vector<int> depths;
  std::vector<long long> successes;
  std::vector<long long> trials;

  void validate() const;
  std::size_t size() const { return depths.size(); }
};

/// Wald interval p_hat +- z*sqrt(p_hat(1-p_hat)/N). Not clamped to [0,1]
/// unless clamp is set; the unclamped interval can extend beyond the
/// physical range by construction.
std::pair<double, double> wald_interval(long long k, long long n, double level,
                                        bool clamp = false);

/// Wilson score interval; always inside [0,1] and asymmetric in general.
std::pair<double, double> wilson_interval(long long k, long long n, double level);

/// RB decay fit P(m) = A p^m + B, optimized in the unconstrained logit space
/// (xi, beta, gamma) = (logit A, logit B/(1-A), logit p).
struct RBFit {
  double p = 0.0, a = 0.0, b = 0.0;
  Eigen::Vector3d unconstrained;      // (xi, beta, gamma)
  Eigen::Matrix3d covariance;         // in the unconstrained space
  double log_likelihood = 0.0;
  int iterations = 0;
};

/// Maximum-likelihood fit of an RB dataset. Throws ConvergenceFailureError or
/// FitDegenerateError (all success fractions equal).
RBFit mle_fit(const RBDataset& data,
              std::optional<std::array<double, 3>> init_pab = std::nullopt);

/// r_CZ = ((d-1)/d) (1 - p_irb/p_rb). Negative results are returned as-is
/// (nonphysical, caller decides).
double gate_error(double p_rb, double p_irb, int d);

struct GateErrorEstimate {
  double mean = 0.0;
  double lower = 0.0, upper = 0.0;
  double level = 0.0;
  double sigma = 0.0;  // from the sample spread
  long long samples_used = 0;
  long long samples_total = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo propagation of the fit covariances to the interleaved gate
/// error; nonphysical samples (r < 0 or r > 1) are dropped. Deterministic per
/// seed. Throws InsufficientPhysicalSamplesError when more than half of the
/// samples are dropped.
GateErrorEstimate monte_carlo_ci(const RBFit& fit_rb, const RBFit& fit_irb, int d,
                                 long long samples, double level,
                                 std::uint64_t seed);

/// Delta-method standard deviation of r_CZ from the two fits' p variances.
double delta_method_sigma(const RBFit& fit_rb, const RBFit& fit_irb, int d);

/// Seeded synthetic count generator, k_i ~ Binomial(N_i, A p^m_i + B).
RBDataset synthesize_rb_counts(double p, double a, double b,
                               const std::vector<int>& depths,
                               long long shots_per_depth, std::uint64_t seed);

}  // namespace czsim

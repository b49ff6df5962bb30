#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "czsim/device.hpp"

namespace czsim {

/// Spectroscopy observables versus flux; any observable may be missing at any
/// point. Frequencies in MHz, flux in flux-quantum units.
struct SpectroscopyDataset {
  std::vector<double> flux;
  std::vector<std::optional<double>> f1;
  std::vector<std::optional<double>> f2;
  std::vector<std::optional<double>> fc;
  std::vector<std::optional<double>> zz;  // zeta/2pi

  void validate() const;
  std::size_t size() const { return flux.size(); }
};

/// Which device parameters the joint fit may vary. Qubit frequencies and
/// anharmonicities are always held fixed.
struct FitMask {
  bool ej_sum = false;
  bool ec = false;
  bool jj_ratio = false;
  bool rho_12 = false;
  bool rho_1c = false;
  bool rho_2c = false;

  int count() const;
};

struct FitOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-8;  // scaled infinity norm of J^T r
  double step_tol = 1e-10;
  double zeta_scale = 100.0;   // residual rescaling for the zz observable
};

struct FitResult {
  DeviceParams params;
  Eigen::VectorXd residuals;  // scaled, at the solution
  double objective = 0.0;     // sum of squared scaled residuals
  bool converged = false;
  bool singular_jacobian = false;
  int iterations = 0;
  std::string message;
};

/// Model observables at one flux point: dressed one-excitation transition
/// frequencies (relative to the ground state) and zeta, by max-overlap state
/// identification from a single diagonalization.
struct ModelPoint {
  double f1 = 0.0, f2 = 0.0, fc = 0.0, zz = 0.0;  // MHz
};
ModelPoint model_observables(const DeviceParams& device, double flux);

/// Damped least squares over the masked parameters. Frequency residuals enter
/// unweighted; zeta residuals are multiplied by zeta_scale. Returns the best
/// point found even when the iteration limit is hit (converged = false).
FitResult joint_fit(const SpectroscopyDataset& data, const DeviceParams& initial,
                    const FitMask& mask, const FitOptions& opts = {});

struct SearchResult {
  std::vector<double> best;
  double best_value = 0.0;
  std::vector<std::pair<std::vector<double>, double>> trace;  // evaluation order
};

/// Deterministic bounded minimization: seeded Latin-hypercube sampling over
/// the box, then coordinate descent from the best sample. Exactly `budget`
/// objective evaluations.
SearchResult parameter_search(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<std::pair<double, double>>& bounds, int budget,
    std::uint64_t seed);

}  // namespace czsim

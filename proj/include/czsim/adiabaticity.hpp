#pragma once

#include <Eigen/Dense>
#include <vector>

#include "czsim/device.hpp"
#include "czsim/spectrum.hpp"

namespace czsim {

/// d H / d omega_c by central finite difference (dimensionless matrix; both H
/// and omega_c carry the same frequency units). Includes the omega_c
/// dependence of the qubit-coupler couplings.
Eigen::MatrixXd dH_domega(const DeviceParams& device, double coupler_freq_mhz,
                          double step_mhz = 0.1);

/// Adiabatic factors on a coupler-frequency grid.
///
/// components[s][g](p) is D_{p,source s} at grid point g, in units of
/// 1/(rad/ns)^2, so that D * |d omega_c/dt| is dimensionless with omega_c in
/// rad/ns and t in ns. Points where a partner gap falls below the
/// near-degeneracy threshold are excluded and flagged in gap_marker.
struct DFactorCurve {
  std::vector<double> grid;            // MHz
  std::vector<HilbertLabel> sources;   // the states k whose D_k are computed
  std::vector<HilbertLabel> partners;  // all tracked states i
  std::vector<std::vector<Eigen::VectorXd>> components;  // [source][grid](partner)
  std::vector<std::vector<double>> state_sum;            // [source][grid], D_k
  std::vector<double> total;                             // [grid], sum over sources
  std::vector<char> gap_marker;                          // [grid], 1 = excluded

  int source_index(const HilbertLabel& l) const;
};

struct DFactorOptions {
  double fd_step_mhz = 0.1;
  double singular_gap_mhz = 1e-6;  // partner gaps below this exclude the point
  /// Restrict partner sums to states in the same excitation manifold as the
  /// source (n1+n2+nc equal). Default: sum over all tracked states.
  bool manifold_only = false;
};

/// D factors for a single source state; sums in state_sum/total cover that
/// source only.
DFactorCurve adiabatic_factor(const DeviceParams& device,
                              const std::vector<double>& grid_mhz,
                              const HilbertLabel& source, double anchor_mhz,
                              const DFactorOptions& opts = {});

/// Total D(omega_c) summed over a set of computational states. An empty set
/// defaults to {|00,0>, |01,0>, |10,0>, |11,0>}.
DFactorCurve total_D(const DeviceParams& device,
                     const std::vector<double>& grid_mhz, double anchor_mhz,
                     std::vector<HilbertLabel> computational = {},
                     const DFactorOptions& opts = {});

/// Shared implementation: D factors from an already-tracked spectrum.
DFactorCurve dfactor_from_spectrum(const DeviceParams& device,
                                   const TrackedSpectrum& spectrum,
                                   const std::vector<HilbertLabel>& sources,
                                   const DFactorOptions& opts = {});

}  // namespace czsim

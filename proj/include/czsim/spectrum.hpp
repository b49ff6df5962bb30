#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "czsim/device.hpp"

namespace czsim {

/// Dense symmetric eigendecomposition with a fixed phase convention: the
/// largest-magnitude component of each eigenvector is made positive.
/// Returns (eigenvalues ascending, orthonormal eigenvectors as columns).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> diagonalize(const Eigen::MatrixXd& h);

struct TrackingOptions {
  double overlap_threshold = 0.5;  // squared-overlap acceptance per step
  int max_refine_depth = 12;
  double continuity_jump_mhz = 0.0;  // 0 disables the energy-jump check
};

/// Eigenvalues and eigenvectors on a coupler-frequency grid, permuted so that
/// column k at every grid point follows the adiabatic continuation of the
/// state labeled labels[k] at the anchor point.
struct TrackedSpectrum {
  std::vector<double> grid;  // MHz, ascending
  std::size_t anchor_index = 0;
  std::vector<HilbertLabel> labels;            // one per tracked state
  std::vector<Eigen::VectorXd> energies;       // [grid point](label), MHz
  std::vector<Eigen::MatrixXd> vectors;        // [grid point], column per label

  int label_index(const HilbertLabel& l) const;
  /// Energy of a tracked state at an arbitrary frequency inside the grid
  /// (linear interpolation between grid points).
  double energy_at(const HilbertLabel& l, double freq_mhz) const;
};

TrackedSpectrum track_spectrum(const DeviceParams& device,
                               const std::vector<double>& grid_mhz,
                               double anchor_mhz,
                               const TrackingOptions& opts = {});

/// zeta/2pi = E11 - E10 - E01 + E00 from tracked energies, MHz.
double zeta(const TrackedSpectrum& spectrum, double at_mhz);

/// zeta from a single diagonalization, labeling the four computational states
/// by direct max-overlap with the bare basis. Valid away from resonances.
double zeta_direct(const DeviceParams& device, double coupler_freq_mhz);

/// Locate the coupler frequency where zeta crosses zero inside the bracket.
/// |zeta(result)| < 1e-3 MHz. Throws NoSignChangeError / DegenerateFlatError.
double find_zz_zero(const DeviceParams& device, double lo_mhz, double hi_mhz);

/// Squared overlaps of one tracked state with every bare basis state.
struct HybridizationCurve {
  std::vector<double> grid;              // MHz
  std::vector<Eigen::VectorXd> weights;  // [grid point](bare index), sums to 1
};

HybridizationCurve hybridization(const TrackedSpectrum& spectrum,
                                 const HilbertLabel& state);

}  // namespace czsim

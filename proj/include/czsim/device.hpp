#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "czsim/errors.hpp"

namespace czsim {

/// A fixed-frequency transmon truncated to a few ladder levels.
/// Frequencies and anharmonicities are linear MHz (anharmonicity < 0).
struct TransmonParams {
  double bare_frequency = 0.0;  // MHz
  double anharmonicity = 0.0;   // MHz, negative
  int levels = 3;

  void validate(const std::string& name) const;
};

/// Flux-tunable transmon coupler with an asymmetric two-junction SQUID.
/// ej_sum = E_J1 + E_J2, jj_ratio = E_J1/E_J2 >= 1, all energies in MHz.
struct TunableCouplerParams {
  double ej_sum = 0.0;    // MHz
  double ec = 0.0;        // MHz
  double jj_ratio = 1.0;  // dimensionless, >= 1
  int levels = 3;

  void validate() const;

  /// Bare frequency at zero flux (top of the SQUID band), MHz.
  double max_frequency() const;
  /// Bare frequency at half a flux quantum (bottom of the band), MHz.
  double min_frequency() const;
};

/// Two fixed transmons plus a tunable coupler with three frequency-independent
/// coupling parameters rho (signed).
struct DeviceParams {
  TransmonParams q1;
  TransmonParams q2;
  TunableCouplerParams coupler;
  double rho_12 = 0.0;
  double rho_1c = 0.0;
  double rho_2c = 0.0;

  void validate() const;
  int dim() const { return q1.levels * q2.levels * coupler.levels; }
};

/// Bare occupation-number label |n1 n2, nc>. Basis index ordering is n1-major,
/// then n2, then nc.
struct HilbertLabel {
  int n1 = 0;
  int n2 = 0;
  int nc = 0;

  bool operator==(const HilbertLabel&) const = default;
  std::string str() const;  // "n1n2,nc"
};

int label_to_index(const HilbertLabel& l, const DeviceParams& d);
HilbertLabel index_to_label(int idx, const DeviceParams& d);
std::vector<HilbertLabel> all_labels(const DeviceParams& d);

/// SQUID Josephson energy at the given flux (units of the flux quantum), MHz.
double squid_ej(const TunableCouplerParams& c, double flux);

/// Bare coupler frequency sqrt(8 E_J(flux) E_C) - E_C, MHz.
double flux_to_frequency(const TunableCouplerParams& c, double flux);

/// Inverse of flux_to_frequency on the branch flux in [0, 0.5].
/// Throws OutOfRangeError if the target is outside the SQUID band.
double frequency_to_flux(const TunableCouplerParams& c, double target_mhz);

/// g = rho * sqrt(f_a * f_b), MHz; sign follows rho.
double coupling_g(double rho, double f_a, double f_b);

/// Full three-mode Hamiltonian at the given bare coupler frequency.
/// Real symmetric, linear-MHz energy units, basis ordered per HilbertLabel.
Eigen::MatrixXd build_hamiltonian(const DeviceParams& d, double coupler_freq_mhz,
                                  int dim_cap = 10000);

}  // namespace czsim

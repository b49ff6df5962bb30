#pragma once

#include <numbers>

namespace czsim {

// Unit conventions, applied uniformly across the library:
//   - frequencies in public interfaces are linear MHz
//   - times are ns (coherence times in the incoherent-error estimate are us)
//   - flux is in units of the flux quantum
//   - internal angular frequencies are rad/ns, so that exp(-i*H*t) with t in
//     ns directly gives the accumulated phase in radians
// Adiabatic factors D are stored in 1/(rad/ns)^2 = ns^2, so that
// D * |d(omega_c)/dt| with omega_c in rad/ns and t in ns is dimensionless.

inline constexpr double kPi = std::numbers::pi;

/// rad/ns per linear MHz.
inline constexpr double kAngularPerMHz = 2.0 * kPi * 1e-3;

inline constexpr double mhz_to_rad_per_ns(double f_mhz) {
  return f_mhz * kAngularPerMHz;
}

inline constexpr double rad_per_ns_to_mhz(double w) { return w / kAngularPerMHz; }

}  // namespace czsim

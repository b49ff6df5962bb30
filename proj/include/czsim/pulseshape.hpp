#pragma once

#include <vector>

#include "czsim/adiabaticity.hpp"
#include "czsim/device.hpp"

namespace czsim {

enum class WaveformUnit { CouplerFrequencyMHz, FluxQuantum, NormalizedAmplitude };

/// Uniformly sampled pulse. pad_before/pad_after are held at the first/last
/// sample value when the pulse is evolved.
struct Waveform {
  std::vector<double> samples;
  double dt = 0.0;  // ns
  WaveformUnit unit = WaveformUnit::NormalizedAmplitude;
  double pad_before = 0.0;  // ns
  double pad_after = 0.0;   // ns

  void validate() const;
  double duration() const { return dt * (samples.size() - 1); }
  double total_duration() const { return duration() + pad_before + pad_after; }
  /// Linear interpolation inside the active window, clamped to the ends.
  double value_at(double t_ns) const;
};

/// V(t) = sum_n a_n [1 - cos(2 pi n t / t_cz)] sampled on [0, t_cz].
/// The odd-index coefficients (a_1, a_3, ...) must sum to 0.5.
Waveform fourier_cosine(double t_cz_ns, const std::vector<double>& coefficients,
                        double dt_ns);

/// Adiabatically weighted pulse: speed inversely proportional to the total
/// D factor, d omega_c/dt = (lambda / D) sin(2 pi t / t_cz).
struct AwpSpec {
  double t_cz = 0.0;       // ns
  double lambda = 0.0;     // weighting coefficient (opaque scalar, > 0)
  DFactorCurve d_curve;    // total D over an ascending coupler-frequency grid
  double start_freq = 0.0; // MHz, idling frequency; must lie inside the grid
};

/// Generate the frequency-domain AWP waveform by inverting
/// G(w) = integral of D, with G built from an exactly integrated log-linear
/// interpolant of the (positive) total-D curve; gap-marked points are bridged.
/// Throws OutOfRangeError when lambda drives the pulse past the supplied grid.
Waveform awp_generate(const AwpSpec& spec, double dt_ns);

/// Pointwise frequency -> flux conversion of a coupler-frequency waveform.
Waveform waveform_freq_to_flux(const Waveform& w, const TunableCouplerParams& c);

/// Sampled derivative of a frequency waveform (central differences, one-sided
/// at the endpoints), MHz/ns.
std::vector<double> slepian_like_speed_profile(const Waveform& w);

/// Map a normalized envelope to coupler frequency: f(t) = idle + amp * V(t).
Waveform envelope_to_frequency(const Waveform& envelope, double idle_mhz,
                               double amplitude_mhz);

}  // namespace czsim

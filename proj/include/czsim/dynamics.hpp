#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "czsim/device.hpp"
#include "czsim/pulseshape.hpp"
#include "czsim/spectrum.hpp"

namespace czsim {

struct EvolveOptions {
  double dt_solver = 0.02;        // ns
  bool check_convergence = true;  // re-run at dt/2 and compare populations
  double convergence_tol = 1e-6;  // max population shift allowed on halving
  double dt_floor = 1e-4;         // ns; below this, halving gives up
};

/// Dressed frame at a fixed (idle) coupler frequency: eigenbasis with columns
/// permuted to bare-state labels by max overlap.
struct IdleFrame {
  double coupler_freq = 0.0;           // MHz
  std::vector<HilbertLabel> labels;
  Eigen::VectorXd energies;            // MHz, index = label index
  Eigen::MatrixXd states;              // column per label
  int label_index(const HilbertLabel& l) const;
};

IdleFrame idle_frame(const DeviceParams& device, double coupler_freq_mhz);

/// Unitary over the full pulse (pads included), piecewise-constant H with an
/// exact matrix exponential per solver step. Throws ConvergenceFailureError if
/// the dt-halving check cannot reach the tolerance.
Eigen::MatrixXcd pulse_propagator(const DeviceParams& device, const Waveform& pulse,
                                  const EvolveOptions& opts = {});

struct EvolutionResult {
  Eigen::VectorXcd final_state;  // bare-basis amplitudes
  double unitary_check = 0.0;    // | ||psi|| - 1 |
};

/// Schrodinger evolution of an initial state through a frequency-unit pulse.
EvolutionResult evolve(const DeviceParams& device, const Waveform& pulse,
                       const Eigen::VectorXcd& initial,
                       const EvolveOptions& opts = {});

struct ConditionalPhaseResult {
  double phase = 0.0;  // phi_11 - phi_10 - phi_01 + phi_00, wrapped to (-pi, pi]
  double phase_unwrapped = 0.0;               // raw accumulated combination
  std::array<double, 4> state_phase{};        // |00>, |01>, |10>, |11> order
  std::array<double, 4> residual_leakage{};   // 1 - |<dressed|psi>|^2
  bool high_leakage = false;                  // any residual > 1e-2
};

/// Conditional phase of the computational states, referenced against their
/// idle dynamical phases (idle = first waveform sample).
ConditionalPhaseResult conditional_phase(const DeviceParams& device,
                                         const Waveform& pulse,
                                         const EvolveOptions& opts = {});

struct CalibrationOptions {
  EvolveOptions evolve;
  double phase_tol = 1e-4;  // rad
  int scan_points = 32;     // bracketing scan resolution
  int max_iterations = 80;
};

/// Find the frequency amplitude (MHz above idle) at which the scaled envelope
/// accumulates |conditional phase| = target. Envelope must be normalized with
/// peak value 1; idle defaults to the device band and max_amplitude to the
/// remaining headroom. Throws UnreachableError when the full band is not
/// enough.
double calibrate_amplitude(const DeviceParams& device, const Waveform& envelope,
                           double idle_mhz, double target_phase_rad,
                           double max_amplitude_mhz = 0.0,
                           const CalibrationOptions& opts = {});

/// Same, with the AWP coefficient lambda as the knob.
double calibrate_lambda(const DeviceParams& device, AwpSpec spec,
                        double target_phase_rad, double dt_ns,
                        const CalibrationOptions& opts = {});

/// Populations of idle-dressed states over a (delay, cycle) grid.
struct LeakageMap {
  std::vector<double> delays;          // ns
  int max_cycles = 0;                  // N runs 1..max_cycles
  std::vector<HilbertLabel> labels;
  std::vector<std::vector<Eigen::VectorXd>> populations;  // [delay][N-1](label)
  std::vector<Eigen::VectorXd> cycle_averaged;            // [delay](label)
  int label_index(const HilbertLabel& l) const;
};

LeakageMap leakage_amplification(const DeviceParams& device, const Waveform& pulse,
                                 const std::vector<double>& delays_ns,
                                 int max_cycles, const EvolveOptions& opts = {});

struct PeakOptions {
  double prominence_frac = 0.05;  // of the trace range
  int min_separation = 2;         // grid steps
};

/// Median spacing of detected peaks in a 1D trace. Throws
/// InsufficientPeaksError when fewer than 3 peaks are found.
double peak_spacing_of_trace(const std::vector<double>& x,
                             const std::vector<double>& y,
                             const PeakOptions& opts = {});

/// Median delay-spacing of peaks in the cycle-averaged population of a state.
double peak_spacing(const LeakageMap& map, const HilbertLabel& label,
                    const PeakOptions& opts = {});

/// Fitted A + B cos(2 N mu) oscillation model. When the inter-pulse phase is
/// cancelled, 2*mu is the population swap angle theta.
struct LeakageOscillationModel {
  double a = 0.0;
  double b = 0.0;
  double mu = 0.0;  // radians, identified in [0, pi/2]
  double theta_if_phase_cancelled() const { return 2.0 * mu; }
};

/// Least-squares fit of a population trace versus cycle number N = 1..n.
/// Throws FitDegenerateError when the oscillation amplitude is below the
/// noise floor.
LeakageOscillationModel fit_oscillation(const std::vector<double>& trace,
                                        double noise_floor = 1e-9);

/// Closed-form incoherent-error estimate; t in ns, coherence times in us.
double incoherent_error(double t_total_ns, double t1_q1_us, double t2e_q1_us,
                        double t1_q2_us, double t2e_q2_us);

}  // namespace czsim

#include "czsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "czsim/units.hpp"

namespace czsim {

using Complex = std::complex<double>;

int IdleFrame::label_index(const HilbertLabel& l) const {
  auto it = std::find(labels.begin(), labels.end(), l);
  if (it == labels.end())
    throw ConfigError("idle frame: unknown label " + l.str());
  return static_cast<int>(it - labels.begin());
}

IdleFrame idle_frame(const DeviceParams& device, double coupler_freq_mhz) {
  auto [evals, evecs] = diagonalize(build_hamiltonian(device, coupler_freq_mhz));
  const int n = device.dim();
  // Greedy permutation: dressed state per bare label by max squared overlap.
  std::vector<int> perm(n, -1);
  std::vector<char> used(n, 0);
  for (int step = 0; step < n; ++step) {
    int bi = -1, bk = -1;
    double best = -1.0;
    for (int b = 0; b < n; ++b) {
      if (perm[b] >= 0) continue;
      for (int k = 0; k < n; ++k) {
        if (used[k]) continue;
        const double ov = evecs(b, k) * evecs(b, k);
        if (ov > best) {
          best = ov;
          bi = b;
          bk = k;
        }
      }
    }
    perm[bi] = bk;
    used[bk] = 1;
  }
  IdleFrame frame;
  frame.coupler_freq = coupler_freq_mhz;
  frame.labels.reserve(n);
  frame.energies.resize(n);
  frame.states.resize(n, n);
  for (int b = 0; b < n; ++b) {
    HilbertLabel l = index_to_label(b, device);
    frame.labels.push_back(l);
    frame.energies(b) = evals(perm[b]);
    frame.states.col(b) = evecs.col(perm[b]);
  }
  return frame;
}

namespace {

Eigen::MatrixXcd propagator_at_dt(const DeviceParams& device, const Waveform& pulse,
                                  double dt) {
  const int n = device.dim();
  const double total = pulse.total_duration();
  const int nsteps = std::max(1, static_cast<int>(std::ceil(total / dt)));
  const double h = total / nsteps;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(n, n);
  for (int s = 0; s < nsteps; ++s) {
    const double t_mid = (s + 0.5) * h;
    const double fc = pulse.value_at(t_mid);
    auto [e, v] = diagonalize(build_hamiltonian(device, fc));
    Eigen::VectorXcd phases(n);
    for (int k = 0; k < n; ++k)
      phases(k) = std::exp(Complex(0.0, -mhz_to_rad_per_ns(e(k)) * h));
    u = (v * phases.asDiagonal() * v.transpose()) * u;
  }
  return u;
}

double max_population_shift(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a.cwiseAbs2() - b.cwiseAbs2()).cwiseAbs().maxCoeff();
}

}  // namespace

Eigen::MatrixXcd pulse_propagator(const DeviceParams& device, const Waveform& pulse,
                                  const EvolveOptions& opts) {
  pulse.validate();
  if (pulse.unit != WaveformUnit::CouplerFrequencyMHz)
    throw ConfigError("pulse_propagator: waveform must be in frequency units");
  double dt = opts.dt_solver;
  Eigen::MatrixXcd u = propagator_at_dt(device, pulse, dt);
  if (!opts.check_convergence) return u;
  while (true) {
    const Eigen::MatrixXcd u_half = propagator_at_dt(device, pulse, dt / 2.0);
    if (max_population_shift(u, u_half) < opts.convergence_tol) return u_half;
    dt /= 2.0;
    u = u_half;
    if (dt < opts.dt_floor)
      throw ConvergenceFailureError(
          "pulse_propagator: dt-halving check failed at the floor step size");
  }
}

EvolutionResult evolve(const DeviceParams& device, const Waveform& pulse,
                       const Eigen::VectorXcd& initial, const EvolveOptions& opts) {
  if (std::abs(initial.norm() - 1.0) > 1e-9)
    throw ConfigError("evolve: initial state must be normalized");
  const Eigen::MatrixXcd u = pulse_propagator(device, pulse, opts);
  EvolutionResult r;
  r.final_state = u * initial;
  r.unitary_check = std::abs(r.final_state.norm() - 1.0);
  return r;
}

ConditionalPhaseResult conditional_phase(const DeviceParams& device,
                                         const Waveform& pulse,
                                         const EvolveOptions& opts) {
  const IdleFrame frame = idle_frame(device, pulse.samples.front());
  const Eigen::MatrixXcd u = pulse_propagator(device, pulse, opts);
  const double t_total = pulse.total_duration();

  const std::array<HilbertLabel, 4> comp = {
      HilbertLabel{0, 0, 0}, HilbertLabel{0, 1, 0}, HilbertLabel{1, 0, 0},
      HilbertLabel{1, 1, 0}};
  ConditionalPhaseResult res;
  for (std::size_t s = 0; s < comp.size(); ++s) {
    const int li = frame.label_index(comp[s]);
    const Eigen::VectorXcd psi0 = frame.states.col(li).cast<Complex>();
    const Eigen::VectorXcd psi = u * psi0;
    const Complex amp = psi0.dot(psi);
    // Rotating-frame subtraction: remove the idle dynamical phase.
    res.state_phase[s] =
        std::arg(amp) + mhz_to_rad_per_ns(frame.energies(li)) * t_total;
    res.residual_leakage[s] = 1.0 - std::norm(amp);
    if (res.residual_leakage[s] > 1e-2) res.high_leakage = true;
  }
  res.phase_unwrapped = res.state_phase[3] - res.state_phase[2] -
                        res.state_phase[1] + res.state_phase[0];
  res.phase = std::remainder(res.phase_unwrapped, 2.0 * kPi);
  if (res.phase <= -kPi) res.phase += 2.0 * kPi;
  return res;
}

namespace {

// |conditional phase| as a function of a scalar knob, with sequential
// unwrapping so the scan stays continuous across the +-pi boundary.
class PhaseScan {
 public:
  explicit PhaseScan(std::function<double(double)> wrapped_phase)
      : wrapped_(std::move(wrapped_phase)) {}

  double operator()(double x) {
    double phi = wrapped_(x);
    if (have_last_) {
      // Choose the 2*pi branch nearest the previous evaluation.
      const double k = std::round((last_phi_ - phi) / (2.0 * kPi));
      phi += 2.0 * kPi * k;
    }
    have_last_ = true;
    last_phi_ = phi;
    return std::abs(phi);
  }

 private:
  std::function<double(double)> wrapped_;
  bool have_last_ = false;
  double last_phi_ = 0.0;
};

double calibrate_scalar(std::function<double(double)> wrapped_phase,
                        double target, double knob_max,
                        const CalibrationOptions& opts, const char* what) {
  if (target == 0.0) return 0.0;
  if (!(target > 0.0)) throw ConfigError("calibrate: target phase must be >= 0");
  PhaseScan scan(std::move(wrapped_phase));
  double lo = 0.0, phi_lo = 0.0;
  double hi = 0.0, phi_hi = 0.0;
  bool bracketed = false;
  for (int s = 1; s <= opts.scan_points; ++s) {
    const double x = knob_max * s / opts.scan_points;
    const double phi = scan(x);
    if (phi < phi_lo - 1e-9 && !bracketed) {
      // Calibration relies on monotone phase over the scanned bracket.
      throw ConvergenceFailureError(
          std::string(what) + ": phase is not monotone over the scan");
    }
    if (phi >= target) {
      hi = x;
      phi_hi = phi;
      bracketed = true;
      break;
    }
    lo = x;
    phi_lo = phi;
  }
  if (!bracketed)
    throw UnreachableError(std::string(what) +
                           ": target phase not reachable within the allowed range");
  for (int it = 0; it < opts.max_iterations; ++it) {
    // Secant-accelerated bisection.
    double mid = 0.5 * (lo + hi);
    if (phi_hi != phi_lo) {
      const double sec = lo + (target - phi_lo) * (hi - lo) / (phi_hi - phi_lo);
      if (sec > lo && sec < hi) mid = sec;
    }
    const double phi = scan(mid);
    if (std::abs(phi - target) < opts.phase_tol) return mid;
    if (phi < target) {
      lo = mid;
      phi_lo = phi;
    } else {
      hi = mid;
      phi_hi = phi;
    }
  }
  throw ConvergenceFailureError(std::string(what) +
                                ": phase root-find did not converge");
}

}  // namespace

double calibrate_amplitude(const DeviceParams& device, const Waveform& envelope,
                           double idle_mhz, double target_phase_rad,
                           double max_amplitude_mhz,
                           const CalibrationOptions& opts) {
  if (envelope.unit != WaveformUnit::NormalizedAmplitude)
    throw ConfigError("calibrate_amplitude: envelope must be normalized");
  const double peak =
      *std::max_element(envelope.samples.begin(), envelope.samples.end());
  if (!(peak > 0.0)) throw ConfigError("calibrate_amplitude: flat envelope");
  double amp_max = max_amplitude_mhz;
  if (amp_max <= 0.0)
    amp_max = (device.coupler.max_frequency() - idle_mhz) / peak;
  auto wrapped = [&](double amp) {
    const Waveform w = envelope_to_frequency(envelope, idle_mhz, amp);
    return conditional_phase(device, w, opts.evolve).phase;
  };
  return calibrate_scalar(wrapped, std::abs(target_phase_rad), amp_max, opts,
                          "calibrate_amplitude");
}

double calibrate_lambda(const DeviceParams& device, AwpSpec spec,
                        double target_phase_rad, double dt_ns,
                        const CalibrationOptions& opts) {
  // Largest lambda the supplied D grid supports: the peak of the target
  // function is lambda * t_cz / pi, which must stay below the integrated G.
  const AwpSpec probe = spec;
  double lambda_max = 1.0;
  {
    // Exponential search for the RangeExceeded boundary.
    auto fits = [&](double lam) {
      AwpSpec s = probe;
      s.lambda = lam;
      try {
        awp_generate(s, dt_ns);
        return true;
      } catch (const OutOfRangeError&) {
        return false;
      }
    };
    while (fits(lambda_max)) lambda_max *= 2.0;
    double lo = 0.0, hi = lambda_max;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (fits(mid) ? lo : hi) = mid;
    }
    lambda_max = lo;
  }
  auto wrapped = [&](double lam) {
    AwpSpec s = spec;
    s.lambda = lam;
    const Waveform w = awp_generate(s, dt_ns);
    return conditional_phase(device, w, opts.evolve).phase;
  };
  return calibrate_scalar(wrapped, std::abs(target_phase_rad), lambda_max, opts,
                          "calibrate_lambda");
}

int LeakageMap::label_index(const HilbertLabel& l) const {
  auto it = std::find(labels.begin(), labels.end(), l);
  if (it == labels.end())
    throw ConfigError("leakage map: unknown label " + l.str());
  return static_cast<int>(it - labels.begin());
}

LeakageMap leakage_amplification(const DeviceParams& device, const Waveform& pulse,
                                 const std::vector<double>& delays_ns,
                                 int max_cycles, const EvolveOptions& opts) {
  if (max_cycles < 1)
    throw ConfigError("leakage_amplification: max_cycles must be >= 1");
  const int n = device.dim();
  const IdleFrame frame = idle_frame(device, pulse.samples.front());
  const Eigen::MatrixXcd u_bare = pulse_propagator(device, pulse, opts);
  // Work entirely in the dressed basis: the delay propagator is diagonal and
  // populations are plain squared amplitudes.
  const Eigen::MatrixXcd u =
      frame.states.transpose().cast<Complex>() * u_bare *
      frame.states.cast<Complex>();

  LeakageMap map;
  map.delays = delays_ns;
  map.max_cycles = max_cycles;
  map.labels = frame.labels;
  map.populations.resize(delays_ns.size());
  map.cycle_averaged.resize(delays_ns.size());

  const int init = frame.label_index({1, 1, 0});
  for (std::size_t d = 0; d < delays_ns.size(); ++d) {
    Eigen::VectorXcd delay_phase(n);
    for (int k = 0; k < n; ++k)
      delay_phase(k) = std::exp(
          Complex(0.0, -mhz_to_rad_per_ns(frame.energies(k)) * delays_ns[d]));
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
    psi(init) = 1.0;
    map.populations[d].reserve(max_cycles);
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(n);
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
      psi = u * psi;
      psi = delay_phase.asDiagonal() * psi;
      Eigen::VectorXd pop = psi.cwiseAbs2();
      avg += pop;
      map.populations[d].push_back(std::move(pop));
    }
    map.cycle_averaged[d] = avg / static_cast<double>(max_cycles);
  }
  return map;
}

double peak_spacing_of_trace(const std::vector<double>& x,
                             const std::vector<double>& y,
                             const PeakOptions& opts) {
  if (x.size() != y.size() || x.size() < 5)
    throw ConfigError("peak_spacing: trace too short");
  const double lo = *std::min_element(y.begin(), y.end());
  const double hi = *std::max_element(y.begin(), y.end());
  const double floor = lo + opts.prominence_frac * (hi - lo);
  std::vector<double> peaks;
  int last_peak = -1000000;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] < floor) continue;
    if (y[i] >= y[i - 1] && y[i] > y[i + 1]) {
      if (static_cast<int>(i) - last_peak < opts.min_separation) {
        // Keep whichever of the two close peaks is higher.
        if (!peaks.empty() && y[i] > y[last_peak]) {
          peaks.back() = x[i];
          last_peak = static_cast<int>(i);
        }
        continue;
      }
      peaks.push_back(x[i]);
      last_peak = static_cast<int>(i);
    }
  }
  if (peaks.size() < 3)
    throw InsufficientPeaksError("peak_spacing: found " +
                                 std::to_string(peaks.size()) +
                                 " peaks, need at least 3");
  std::vector<double> gaps(peaks.size() - 1);
  for (std::size_t i = 0; i + 1 < peaks.size(); ++i)
    gaps[i] = peaks[i + 1] - peaks[i];
  std::sort(gaps.begin(), gaps.end());
  const std::size_t m = gaps.size();
  return (m % 2 == 1) ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
}

double peak_spacing(const LeakageMap& map, const HilbertLabel& label,
                    const PeakOptions& opts) {
  const int li = map.label_index(label);
  std::vector<double> trace(map.delays.size());
  for (std::size_t d = 0; d < map.delays.size(); ++d)
    trace[d] = map.cycle_averaged[d](li);
  return peak_spacing_of_trace(map.delays, trace, opts);
}

LeakageOscillationModel fit_oscillation(const std::vector<double>& trace,
                                        double noise_floor) {
  const std::size_t n = trace.size();
  if (n < 8) throw ConfigError("fit_oscillation: need at least 8 points");
  const double lo = *std::min_element(trace.begin(), trace.end());
  const double hi = *std::max_element(trace.begin(), trace.end());
  if (hi - lo < 2.0 * noise_floor)
    throw FitDegenerateError(
        "fit_oscillation: oscillation amplitude below the noise floor");

  // Linear least squares in (A, B) at fixed mu; scan mu on the identifiable
  // interval (0, pi/2], then refine by golden section.
  auto sse_at = [&](double mu, LeakageOscillationModel* out) {
    double s1 = static_cast<double>(n), sc = 0.0, scc = 0.0, sy = 0.0, scy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = std::cos(2.0 * (i + 1.0) * mu);
      sc += c;
      scc += c * c;
      sy += trace[i];
      scy += c * trace[i];
    }
    const double det = s1 * scc - sc * sc;
    double a, b;
    if (std::abs(det) < 1e-12) {
      a = sy / s1;
      b = 0.0;
    } else {
      a = (sy * scc - sc * scy) / det;
      b = (s1 * scy - sc * sy) / det;
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = trace[i] - a - b * std::cos(2.0 * (i + 1.0) * mu);
      sse += r * r;
    }
    if (out) {
      out->a = a;
      out->b = b;
      out->mu = mu;
    }
    return sse;
  };

  const int scan = 4096;
  double best_mu = 0.0, best_sse = std::numeric_limits<double>::infinity();
  for (int s = 1; s <= scan; ++s) {
    const double mu = 0.5 * kPi * s / scan;
    const double sse = sse_at(mu, nullptr);
    if (sse < best_sse) {
      best_sse = sse;
      best_mu = mu;
    }
  }
  double a = std::max(1e-9, best_mu - 0.5 * kPi / scan);
  double b = std::min(0.5 * kPi, best_mu + 0.5 * kPi / scan);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = sse_at(x1, nullptr), f2 = sse_at(x2, nullptr);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = sse_at(x1, nullptr);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = sse_at(x2, nullptr);
    }
  }
  LeakageOscillationModel model;
  sse_at(0.5 * (a + b), &model);
  if (std::abs(model.b) < noise_floor)
    throw FitDegenerateError("fit_oscillation: fitted amplitude below noise floor");
  return model;
}

double incoherent_error(double t_total_ns, double t1_q1_us, double t2e_q1_us,
                        double t1_q2_us, double t2e_q2_us) {
  if (!(t1_q1_us > 0.0 && t2e_q1_us > 0.0 && t1_q2_us > 0.0 && t2e_q2_us > 0.0))
    throw ConfigError("incoherent_error: coherence times must be > 0");
  const double t_us = t_total_ns * 1e-3;
  return t_us / (5.0 * t1_q1_us) + 2.0 * t_us / (5.0 * t2e_q1_us) +
         t_us / (5.0 * t1_q2_us) + 2.0 * t_us / (5.0 * t2e_q2_us);
}

}  // namespace czsim

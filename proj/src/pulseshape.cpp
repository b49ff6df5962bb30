#include "czsim/pulseshape.hpp"

#include <algorithm>
#include <cmath>

#include "czsim/units.hpp"

namespace czsim {

void Waveform::validate() const {
  if (!(dt > 0.0)) throw ConfigError("waveform: dt must be > 0");
  if (samples.empty()) throw ConfigError("waveform: no samples");
  if (pad_before < 0.0 || pad_after < 0.0)
    throw ConfigError("waveform: pads must be >= 0");
}

double Waveform::value_at(double t_ns) const {
  const double t = t_ns - pad_before;
  if (t <= 0.0) return samples.front();
  const double active = duration();
  if (t >= active) return samples.back();
  const double x = t / dt;
  const std::size_t i = static_cast<std::size_t>(x);
  const double frac = x - static_cast<double>(i);
  if (i + 1 >= samples.size()) return samples.back();
  return (1.0 - frac) * samples[i] + frac * samples[i + 1];
}

Waveform fourier_cosine(double t_cz_ns, const std::vector<double>& coefficients,
                        double dt_ns) {
  if (!(t_cz_ns > 0.0)) throw ConfigError("fourier_cosine: t_cz must be > 0");
  if (!(dt_ns > 0.0)) throw ConfigError("fourier_cosine: dt must be > 0");
  double odd_sum = 0.0;
  for (std::size_t n = 0; n < coefficients.size(); ++n)
    if (n % 2 == 0) odd_sum += coefficients[n];  // a_1, a_3, ... at even index
  if (std::abs(odd_sum - 0.5) > 1e-12)
    throw ConfigError("fourier_cosine: odd coefficients must sum to 0.5, got " +
                      std::to_string(odd_sum));

  const std::size_t nsamp = static_cast<std::size_t>(std::lround(t_cz_ns / dt_ns)) + 1;
  Waveform w;
  w.dt = t_cz_ns / static_cast<double>(nsamp - 1);
  w.unit = WaveformUnit::NormalizedAmplitude;
  w.samples.resize(nsamp);
  for (std::size_t s = 0; s < nsamp; ++s) {
    const double t = w.dt * static_cast<double>(s);
    double v = 0.0;
    for (std::size_t n = 0; n < coefficients.size(); ++n)
      v += coefficients[n] *
           (1.0 - std::cos(2.0 * kPi * static_cast<double>(n + 1) * t / t_cz_ns));
    w.samples[s] = v;
  }
  // Exact endpoints regardless of rounding.
  w.samples.front() = 0.0;
  w.samples.back() = 0.0;
  return w;
}

namespace {

// Log-linear segment of the total-D curve with exact integrals and exact
// inversion of the running integral.
struct DSegments {
  std::vector<double> omega;  // rad/ns, ascending
  std::vector<double> d;      // > 0
  std::vector<double> cumg;   // cumulative integral from omega.front()

  double g_at(double w) const {
    auto it = std::upper_bound(omega.begin(), omega.end(), w);
    if (it == omega.begin()) return 0.0;
    std::size_t hi = it - omega.begin();
    if (hi >= omega.size()) return cumg.back();
    const std::size_t lo = hi - 1;
    return cumg[lo] + segment_integral(lo, w - omega[lo]);
  }

  double segment_integral(std::size_t lo, double x) const {
    const double h = omega[lo + 1] - omega[lo];
    const double b = std::log(d[lo + 1] / d[lo]) / h;
    if (std::abs(b * h) < 1e-12) return d[lo] * x;
    return d[lo] * (std::exp(b * x) - 1.0) / b;
  }

  // omega such that the integral from omega.front() equals target.
  double invert(double target) const {
    auto it = std::upper_bound(cumg.begin(), cumg.end(), target);
    if (it == cumg.begin()) return omega.front();
    std::size_t hi = it - cumg.begin();
    if (hi >= cumg.size())
      throw OutOfRangeError("awp_generate: lambda exceeds the integrated D range");
    const std::size_t lo = hi - 1;
    const double r = target - cumg[lo];
    const double h = omega[lo + 1] - omega[lo];
    const double b = std::log(d[lo + 1] / d[lo]) / h;
    double x;
    if (std::abs(b * h) < 1e-12) {
      x = r / d[lo];
    } else {
      x = std::log(1.0 + r * b / d[lo]) / b;
    }
    return omega[lo] + std::min(x, h);
  }
};

DSegments build_segments(const DFactorCurve& curve, double start_mhz) {
  DSegments seg;
  for (std::size_t g = 0; g < curve.grid.size(); ++g) {
    if (curve.grid[g] < start_mhz - 1e-12) continue;
    if (curve.gap_marker[g]) continue;  // bridged by the log-linear interpolant
    const double d = curve.total[g];
    if (!(d > 0.0))
      throw ConfigError("awp_generate: total D must be strictly positive on the "
                        "integration range");
    seg.omega.push_back(mhz_to_rad_per_ns(curve.grid[g]));
    seg.d.push_back(d);
  }
  if (seg.omega.size() < 2)
    throw ConfigError("awp_generate: fewer than two usable D-curve points above "
                      "the start frequency");
  // Anchor the first node exactly at the start frequency.
  const double w0 = mhz_to_rad_per_ns(start_mhz);
  if (seg.omega.front() > w0 + 1e-9) {
    seg.omega.insert(seg.omega.begin(), w0);
    seg.d.insert(seg.d.begin(), seg.d.front());
  } else {
    seg.omega.front() = w0;
  }
  seg.cumg.resize(seg.omega.size());
  seg.cumg[0] = 0.0;
  for (std::size_t i = 0; i + 1 < seg.omega.size(); ++i)
    seg.cumg[i + 1] =
        seg.cumg[i] + seg.segment_integral(i, seg.omega[i + 1] - seg.omega[i]);
  return seg;
}

}  // namespace

Waveform awp_generate(const AwpSpec& spec, double dt_ns) {
  if (!(spec.t_cz > 0.0)) throw ConfigError("awp_generate: t_cz must be > 0");
  if (!(spec.lambda > 0.0)) throw ConfigError("awp_generate: lambda must be > 0");
  if (!(dt_ns > 0.0)) throw ConfigError("awp_generate: dt must be > 0");

  const DSegments seg = build_segments(spec.d_curve, spec.start_freq);
  const std::size_t nsamp =
      static_cast<std::size_t>(std::lround(spec.t_cz / dt_ns)) + 1;
  Waveform w;
  w.dt = spec.t_cz / static_cast<double>(nsamp - 1);
  w.unit = WaveformUnit::CouplerFrequencyMHz;
  w.samples.resize(nsamp);
  const double scale = spec.lambda * spec.t_cz / (2.0 * kPi);
  for (std::size_t s = 0; s < nsamp; ++s) {
    const double t = w.dt * static_cast<double>(s);
    const double target = scale * (1.0 - std::cos(2.0 * kPi * t / spec.t_cz));
    w.samples[s] = rad_per_ns_to_mhz(seg.invert(target));
  }
  w.samples.front() = spec.start_freq;
  w.samples.back() = spec.start_freq;
  return w;
}

Waveform waveform_freq_to_flux(const Waveform& w, const TunableCouplerParams& c) {
  if (w.unit != WaveformUnit::CouplerFrequencyMHz)
    throw ConfigError("waveform_freq_to_flux: input must be in frequency units");
  Waveform out = w;
  out.unit = WaveformUnit::FluxQuantum;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    try {
      out.samples[i] = frequency_to_flux(c, w.samples[i]);
    } catch (const OutOfRangeError& e) {
      throw OutOfRangeError("waveform_freq_to_flux: sample " + std::to_string(i) +
                            ": " + e.what());
    }
  }
  return out;
}

std::vector<double> slepian_like_speed_profile(const Waveform& w) {
  if (w.unit != WaveformUnit::CouplerFrequencyMHz)
    throw ConfigError("speed profile requires a frequency waveform");
  const std::size_t n = w.samples.size();
  std::vector<double> speed(n, 0.0);
  if (n < 2) return speed;
  speed[0] = (w.samples[1] - w.samples[0]) / w.dt;
  speed[n - 1] = (w.samples[n - 1] - w.samples[n - 2]) / w.dt;
  for (std::size_t i = 1; i + 1 < n; ++i)
    speed[i] = (w.samples[i + 1] - w.samples[i - 1]) / (2.0 * w.dt);
  return speed;
}

Waveform envelope_to_frequency(const Waveform& envelope, double idle_mhz,
                               double amplitude_mhz) {
  if (envelope.unit != WaveformUnit::NormalizedAmplitude)
    throw ConfigError("envelope_to_frequency: input must be normalized");
  Waveform out = envelope;
  out.unit = WaveformUnit::CouplerFrequencyMHz;
  for (auto& s : out.samples) s = idle_mhz + amplitude_mhz * s;
  return out;
}

}  // namespace czsim

#include "czsim/adiabaticity.hpp"

#include <algorithm>
#include <cmath>

#include "czsim/units.hpp"

namespace czsim {

Eigen::MatrixXd dH_domega(const DeviceParams& device, double coupler_freq_mhz,
                          double step_mhz) {
  const Eigen::MatrixXd hp = build_hamiltonian(device, coupler_freq_mhz + step_mhz);
  const Eigen::MatrixXd hm = build_hamiltonian(device, coupler_freq_mhz - step_mhz);
  return (hp - hm) / (2.0 * step_mhz);
}

int DFactorCurve::source_index(const HilbertLabel& l) const {
  auto it = std::find(sources.begin(), sources.end(), l);
  if (it == sources.end())
    throw ConfigError("DFactorCurve: " + l.str() + " is not a source state");
  return static_cast<int>(it - sources.begin());
}

DFactorCurve dfactor_from_spectrum(const DeviceParams& device,
                                   const TrackedSpectrum& spectrum,
                                   const std::vector<HilbertLabel>& sources,
                                   const DFactorOptions& opts) {
  const int n = device.dim();
  const std::size_t npts = spectrum.grid.size();
  const std::size_t ns = sources.size();

  DFactorCurve curve;
  curve.grid = spectrum.grid;
  curve.sources = sources;
  curve.partners = spectrum.labels;
  curve.components.assign(ns, std::vector<Eigen::VectorXd>(npts));
  curve.state_sum.assign(ns, std::vector<double>(npts, 0.0));
  curve.total.assign(npts, 0.0);
  curve.gap_marker.assign(npts, 0);

  std::vector<int> src_cols(ns);
  for (std::size_t s = 0; s < ns; ++s)
    src_cols[s] = spectrum.label_index(sources[s]);

  auto excitation = [](const HilbertLabel& l) { return l.n1 + l.n2 + l.nc; };

  for (std::size_t g = 0; g < npts; ++g) {
    const Eigen::MatrixXd dh =
        dH_domega(device, spectrum.grid[g], opts.fd_step_mhz);
    const Eigen::MatrixXd& v = spectrum.vectors[g];
    const Eigen::VectorXd& e = spectrum.energies[g];
    // <i| dH/dw |k> for all pairs at once.
    const Eigen::MatrixXd m = v.transpose() * dh * v;
    bool gap = false;
    for (std::size_t s = 0; s < ns; ++s) {
      const int k = src_cols[s];
      Eigen::VectorXd comp = Eigen::VectorXd::Zero(n);
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        if (i == k) continue;
        if (opts.manifold_only &&
            excitation(spectrum.labels[i]) != excitation(sources[s]))
          continue;
        const double de_mhz = e(k) - e(i);
        if (std::abs(de_mhz) < opts.singular_gap_mhz) {
          gap = true;
          continue;
        }
        const double de = mhz_to_rad_per_ns(de_mhz);
        const double d = std::abs(m(i, k)) / (de * de);
        comp(i) = d;
        sum += d;
      }
      curve.components[s][g] = std::move(comp);
      curve.state_sum[s][g] = sum;
      curve.total[g] += sum;
    }
    curve.gap_marker[g] = gap ? 1 : 0;
  }
  return curve;
}

DFactorCurve adiabatic_factor(const DeviceParams& device,
                              const std::vector<double>& grid_mhz,
                              const HilbertLabel& source, double anchor_mhz,
                              const DFactorOptions& opts) {
  const TrackedSpectrum spectrum = track_spectrum(device, grid_mhz, anchor_mhz);
  return dfactor_from_spectrum(device, spectrum, {source}, opts);
}

DFactorCurve total_D(const DeviceParams& device,
                     const std::vector<double>& grid_mhz, double anchor_mhz,
                     std::vector<HilbertLabel> computational,
                     const DFactorOptions& opts) {
  if (computational.empty())
    computational = {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}};
  const TrackedSpectrum spectrum = track_spectrum(device, grid_mhz, anchor_mhz);
  return dfactor_from_spectrum(device, spectrum, computational, opts);
}

}  // namespace czsim

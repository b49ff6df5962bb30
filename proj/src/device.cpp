#include "czsim/device.hpp"

#include <cmath>
#include <iostream>

#include "czsim/units.hpp"

namespace czsim {

void TransmonParams::validate(const std::string& name) const {
  if (!(bare_frequency > 0.0))
    throw ConfigError(name + ": bare_frequency must be > 0");
  if (!(anharmonicity < 0.0))
    throw ConfigError(name + ": anharmonicity must be < 0");
  if (levels < 2) throw ConfigError(name + ": levels must be >= 2");
}

void TunableCouplerParams::validate() const {
  if (!(ej_sum > 0.0)) throw ConfigError("coupler: ej_sum must be > 0");
  if (!(ec > 0.0)) throw ConfigError("coupler: ec must be > 0");
  if (!(jj_ratio >= 1.0)) throw ConfigError("coupler: jj_ratio must be >= 1");
  if (levels < 2) throw ConfigError("coupler: levels must be >= 2");
  if (!(max_frequency() > min_frequency()))
    throw ConfigError("coupler: SQUID band is empty (max <= min frequency)");
}

double TunableCouplerParams::max_frequency() const {
  return std::sqrt(8.0 * ej_sum * ec) - ec;
}

double TunableCouplerParams::min_frequency() const {
  const double ej_min = ej_sum * (jj_ratio - 1.0) / (jj_ratio + 1.0);
  return std::sqrt(8.0 * ej_min * ec) - ec;
}

void DeviceParams::validate() const {
  q1.validate("q1");
  q2.validate("q2");
  coupler.validate();
  if (!std::isfinite(rho_12) || !std::isfinite(rho_1c) || !std::isfinite(rho_2c))
    throw ConfigError("rho values must be finite");
  // Direct qubit-qubit coupling should be much weaker than the coupler
  // channels for a physically sensible preset. Warn, don't reject.
  const double r12 = std::abs(rho_12);
  if (r12 > 0.0 &&
      (r12 * 5.0 > std::abs(rho_1c) || r12 * 5.0 > std::abs(rho_2c))) {
    std::cerr << "warning: |rho_12| is not small compared to the "
                 "qubit-coupler rho values\n";
  }
}

std::string HilbertLabel::str() const {
  return std::to_string(n1) + std::to_string(n2) + "," + std::to_string(nc);
}

int label_to_index(const HilbertLabel& l, const DeviceParams& d) {
  return (l.n1 * d.q2.levels + l.n2) * d.coupler.levels + l.nc;
}

HilbertLabel index_to_label(int idx, const DeviceParams& d) {
  HilbertLabel l;
  l.nc = idx % d.coupler.levels;
  idx /= d.coupler.levels;
  l.n2 = idx % d.q2.levels;
  l.n1 = idx / d.q2.levels;
  return l;
}

std::vector<HilbertLabel> all_labels(const DeviceParams& d) {
  std::vector<HilbertLabel> out;
  out.reserve(d.dim());
  for (int i = 0; i < d.dim(); ++i) out.push_back(index_to_label(i, d));
  return out;
}

double squid_ej(const TunableCouplerParams& c, double flux) {
  const double ej1 = c.ej_sum * c.jj_ratio / (c.jj_ratio + 1.0);
  const double ej2 = c.ej_sum / (c.jj_ratio + 1.0);
  return std::sqrt(ej1 * ej1 + ej2 * ej2 +
                   2.0 * ej1 * ej2 * std::cos(2.0 * kPi * flux));
}

double flux_to_frequency(const TunableCouplerParams& c, double flux) {
  return std::sqrt(8.0 * squid_ej(c, flux) * c.ec) - c.ec;
}

double frequency_to_flux(const TunableCouplerParams& c, double target_mhz) {
  const double f_max = c.max_frequency();
  const double f_min = c.min_frequency();
  const double tol = 1e-9 * std::max(1.0, std::abs(target_mhz));
  if (target_mhz > f_max + tol || target_mhz < f_min - tol)
    throw OutOfRangeError("frequency_to_flux: target " +
                          std::to_string(target_mhz) + " MHz outside band [" +
                          std::to_string(f_min) + ", " + std::to_string(f_max) +
                          "]");
  const double clamped = std::min(std::max(target_mhz, f_min), f_max);
  // Closed-form inversion of the SQUID curve on the [0, 0.5] branch.
  const double ej = (clamped + c.ec) * (clamped + c.ec) / (8.0 * c.ec);
  const double ej1 = c.ej_sum * c.jj_ratio / (c.jj_ratio + 1.0);
  const double ej2 = c.ej_sum / (c.jj_ratio + 1.0);
  double cosarg = (ej * ej - ej1 * ej1 - ej2 * ej2) / (2.0 * ej1 * ej2);
  cosarg = std::min(1.0, std::max(-1.0, cosarg));
  return std::acos(cosarg) / (2.0 * kPi);
}

double coupling_g(double rho, double f_a, double f_b) {
  return rho * std::sqrt(f_a * f_b);
}

Eigen::MatrixXd build_hamiltonian(const DeviceParams& d, double coupler_freq_mhz,
                                  int dim_cap) {
  if (!(coupler_freq_mhz > 0.0))
    throw ConfigError("build_hamiltonian: coupler frequency must be > 0");
  const int n = d.dim();
  if (n > dim_cap)
    throw ConfigError("build_hamiltonian: dimension " + std::to_string(n) +
                      " exceeds cap " + std::to_string(dim_cap));

  const int l1 = d.q1.levels, l2 = d.q2.levels, lc = d.coupler.levels;
  const double g12 = coupling_g(d.rho_12, d.q1.bare_frequency, d.q2.bare_frequency);
  const double g1c = coupling_g(d.rho_1c, d.q1.bare_frequency, coupler_freq_mhz);
  const double g2c = coupling_g(d.rho_2c, d.q2.bare_frequency, coupler_freq_mhz);

  auto ladder_energy = [](double w, double eta, int m) {
    return w * m + 0.5 * eta * m * (m - 1);
  };

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  auto idx = [&](int n1, int n2, int nc) { return (n1 * l2 + n2) * lc + nc; };

  for (int n1 = 0; n1 < l1; ++n1)
    for (int n2 = 0; n2 < l2; ++n2)
      for (int nc = 0; nc < lc; ++nc) {
        const int i = idx(n1, n2, nc);
        h(i, i) = ladder_energy(d.q1.bare_frequency, d.q1.anharmonicity, n1) +
                  ladder_energy(d.q2.bare_frequency, d.q2.anharmonicity, n2) +
                  ladder_energy(coupler_freq_mhz, -d.coupler.ec, nc);
      }

  // (a^dag + a)(b^dag + b) coupling terms, written symmetrically.
  auto add_coupling = [&](double g, int mode_a, int mode_b) {
    if (g == 0.0) return;
    for (int n1 = 0; n1 < l1; ++n1)
      for (int n2 = 0; n2 < l2; ++n2)
        for (int nc = 0; nc < lc; ++nc) {
          int occ[3] = {n1, n2, nc};
          const int lim[3] = {l1, l2, lc};
          const int i = idx(n1, n2, nc);
          // raise/lower each of the two modes in all four combinations; only
          // upper-triangle targets are written, mirrored at the end.
          for (int da : {+1, -1})
            for (int db : {+1, -1}) {
              int occ2[3] = {occ[0], occ[1], occ[2]};
              occ2[mode_a] += da;
              occ2[mode_b] += db;
              bool ok = true;
              for (int m = 0; m < 3; ++m)
                if (occ2[m] < 0 || occ2[m] >= lim[m]) ok = false;
              if (!ok) continue;
              const int j = idx(occ2[0], occ2[1], occ2[2]);
              if (j <= i) continue;
              const double amp_a = (da > 0) ? std::sqrt(occ[mode_a] + 1.0)
                                            : std::sqrt(double(occ[mode_a]));
              const double amp_b = (db > 0) ? std::sqrt(occ[mode_b] + 1.0)
                                            : std::sqrt(double(occ[mode_b]));
              h(i, j) += g * amp_a * amp_b;
            }
        }
  };
  add_coupling(g1c, 0, 2);
  add_coupling(g2c, 1, 2);
  add_coupling(g12, 0, 1);

  // Mirror the upper triangle; the matrix is exactly Hermitian by construction.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) h(j, i) = h(i, j);
  return h;
}

}  // namespace czsim

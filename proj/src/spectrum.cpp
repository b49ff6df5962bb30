#include "czsim/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace czsim {

std::pair<Eigen::VectorXd, Eigen::MatrixXd> diagonalize(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailureError("diagonalize: eigensolver did not converge");
  Eigen::VectorXd evals = solver.eigenvalues();
  Eigen::MatrixXd evecs = solver.eigenvectors();
  for (int k = 0; k < evecs.cols(); ++k) {
    int imax = 0;
    evecs.col(k).cwiseAbs().maxCoeff(&imax);
    if (evecs(imax, k) < 0.0) evecs.col(k) = -evecs.col(k);
  }
  return {std::move(evals), std::move(evecs)};
}

namespace {

// Greedy one-to-one assignment of columns of b to columns of a by descending
// squared overlap. Returns perm with perm[col_a] = col_b and the smallest
// accepted squared overlap.
struct Assignment {
  std::vector<int> perm;
  double min_overlap_sq = 0.0;
};

Assignment greedy_match(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int n = static_cast<int>(a.cols());
  Eigen::MatrixXd ov = (a.transpose() * b).array().square();
  std::vector<int> perm(n, -1);
  std::vector<char> row_used(n, 0), col_used(n, 0);
  double min_ov = 1.0;
  for (int step = 0; step < n; ++step) {
    int bi = -1, bj = -1;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      if (row_used[i]) continue;
      for (int j = 0; j < n; ++j) {
        if (col_used[j]) continue;
        if (ov(i, j) > best) {
          best = ov(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    perm[bi] = bj;
    row_used[bi] = 1;
    col_used[bj] = 1;
    min_ov = std::min(min_ov, best);
  }
  return {std::move(perm), min_ov};
}

std::vector<int> compose(const std::vector<int>& first,
                         const std::vector<int>& second) {
  std::vector<int> out(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) out[i] = second[first[i]];
  return out;
}

// Permutation connecting eigenvectors at f_a to those at f_b, bisecting the
// interval whenever the best assignment dips below the overlap threshold.
std::vector<int> chain_match(const DeviceParams& device, double f_a,
                             const Eigen::MatrixXd& v_a, double f_b,
                             const Eigen::MatrixXd& v_b,
                             const TrackingOptions& opts, int depth) {
  Assignment asg = greedy_match(v_a, v_b);
  if (asg.min_overlap_sq >= opts.overlap_threshold) return asg.perm;
  if (depth >= opts.max_refine_depth)
    throw TrackingAmbiguousError(
        "track_spectrum: overlap " + std::to_string(asg.min_overlap_sq) +
            " below threshold after refinement near " +
            std::to_string(0.5 * (f_a + f_b)) + " MHz",
        0.5 * (f_a + f_b));
  const double f_m = 0.5 * (f_a + f_b);
  auto [em, vm] = diagonalize(build_hamiltonian(device, f_m));
  auto left = chain_match(device, f_a, v_a, f_m, vm, opts, depth + 1);
  auto right = chain_match(device, f_m, vm, f_b, v_b, opts, depth + 1);
  return compose(left, right);
}

}  // namespace

int TrackedSpectrum::label_index(const HilbertLabel& l) const {
  auto it = std::find(labels.begin(), labels.end(), l);
  if (it == labels.end())
    throw ConfigError("state " + l.str() + " is not tracked");
  return static_cast<int>(it - labels.begin());
}

double TrackedSpectrum::energy_at(const HilbertLabel& l, double freq_mhz) const {
  const int k = label_index(l);
  if (freq_mhz < grid.front() - 1e-9 || freq_mhz > grid.back() + 1e-9)
    throw OutOfRangeError("energy_at: frequency outside tracked grid");
  auto it = std::lower_bound(grid.begin(), grid.end(), freq_mhz);
  if (it == grid.begin()) return energies.front()(k);
  if (it == grid.end()) return energies.back()(k);
  const std::size_t hi = it - grid.begin();
  const std::size_t lo = hi - 1;
  const double t = (freq_mhz - grid[lo]) / (grid[hi] - grid[lo]);
  return (1.0 - t) * energies[lo](k) + t * energies[hi](k);
}

TrackedSpectrum track_spectrum(const DeviceParams& device,
                               const std::vector<double>& grid_mhz,
                               double anchor_mhz, const TrackingOptions& opts) {
  if (grid_mhz.size() < 1) throw ConfigError("track_spectrum: empty grid");
  if (!std::is_sorted(grid_mhz.begin(), grid_mhz.end()))
    throw ConfigError("track_spectrum: grid must be ascending");
  if (anchor_mhz < grid_mhz.front() || anchor_mhz > grid_mhz.back())
    throw ConfigError("track_spectrum: anchor outside grid range");

  const int n = device.dim();
  const std::size_t npts = grid_mhz.size();
  std::vector<Eigen::VectorXd> raw_e(npts);
  std::vector<Eigen::MatrixXd> raw_v(npts);
  for (std::size_t g = 0; g < npts; ++g) {
    auto [e, v] = diagonalize(build_hamiltonian(device, grid_mhz[g]));
    raw_e[g] = std::move(e);
    raw_v[g] = std::move(v);
  }

  std::size_t anchor = 0;
  double best = std::abs(grid_mhz[0] - anchor_mhz);
  for (std::size_t g = 1; g < npts; ++g) {
    const double d = std::abs(grid_mhz[g] - anchor_mhz);
    if (d < best) {
      best = d;
      anchor = g;
    }
  }

  // Anchor assignment against the bare basis.
  Assignment anchor_asg =
      greedy_match(Eigen::MatrixXd::Identity(n, n), raw_v[anchor]);
  if (anchor_asg.min_overlap_sq < opts.overlap_threshold)
    throw TrackingAmbiguousError(
        "track_spectrum: anchor state overlap with the bare basis below "
        "threshold at " +
            std::to_string(grid_mhz[anchor]) + " MHz",
        grid_mhz[anchor]);

  // perm[g][label] = raw eigenstate index at grid point g.
  std::vector<std::vector<int>> perm(npts);
  perm[anchor] = anchor_asg.perm;
  for (std::size_t g = anchor; g + 1 < npts; ++g) {
    auto step = chain_match(device, grid_mhz[g], raw_v[g], grid_mhz[g + 1],
                            raw_v[g + 1], opts, 0);
    perm[g + 1] = compose(perm[g], step);
  }
  for (std::size_t g = anchor; g > 0; --g) {
    auto step = chain_match(device, grid_mhz[g], raw_v[g], grid_mhz[g - 1],
                            raw_v[g - 1], opts, 0);
    perm[g - 1] = compose(perm[g], step);
  }

  TrackedSpectrum out;
  out.grid = grid_mhz;
  out.anchor_index = anchor;
  out.labels = all_labels(device);
  out.energies.resize(npts);
  out.vectors.resize(npts);
  for (std::size_t g = 0; g < npts; ++g) {
    out.energies[g].resize(n);
    out.vectors[g].resize(n, n);
    for (int k = 0; k < n; ++k) {
      out.energies[g](k) = raw_e[g](perm[g][k]);
      out.vectors[g].col(k) = raw_v[g].col(perm[g][k]);
    }
  }

  if (opts.continuity_jump_mhz > 0.0) {
    for (std::size_t g = 0; g + 1 < npts; ++g) {
      const double jump =
          (out.energies[g + 1] - out.energies[g]).cwiseAbs().maxCoeff();
      if (jump > opts.continuity_jump_mhz)
        throw TrackingAmbiguousError(
            "track_spectrum: energy jump " + std::to_string(jump) +
                " MHz exceeds continuity threshold",
            grid_mhz[g]);
    }
  }
  return out;
}

double zeta(const TrackedSpectrum& spectrum, double at_mhz) {
  const double e00 = spectrum.energy_at({0, 0, 0}, at_mhz);
  const double e10 = spectrum.energy_at({1, 0, 0}, at_mhz);
  const double e01 = spectrum.energy_at({0, 1, 0}, at_mhz);
  const double e11 = spectrum.energy_at({1, 1, 0}, at_mhz);
  return e11 - e10 - e01 + e00;
}

double zeta_direct(const DeviceParams& device, double coupler_freq_mhz) {
  auto [evals, evecs] = diagonalize(build_hamiltonian(device, coupler_freq_mhz));
  auto energy_of = [&](const HilbertLabel& l) {
    const int bare = label_to_index(l, device);
    int kbest = 0;
    double best = -1.0;
    for (int k = 0; k < evecs.cols(); ++k) {
      const double ov = evecs(bare, k) * evecs(bare, k);
      if (ov > best) {
        best = ov;
        kbest = k;
      }
    }
    if (best < 0.5)
      throw TrackingAmbiguousError(
          "zeta_direct: state " + l.str() + " has no dominant eigenvector at " +
              std::to_string(coupler_freq_mhz) + " MHz",
          coupler_freq_mhz);
    return evals(kbest);
  };
  return energy_of({1, 1, 0}) - energy_of({1, 0, 0}) - energy_of({0, 1, 0}) +
         energy_of({0, 0, 0});
}

double find_zz_zero(const DeviceParams& device, double lo_mhz, double hi_mhz) {
  constexpr double kZetaTolMHz = 1e-3;  // 1 kHz
  constexpr double kFlatMHz = 1e-9;
  double zlo = zeta_direct(device, lo_mhz);
  double zhi = zeta_direct(device, hi_mhz);
  const double zmid = zeta_direct(device, 0.5 * (lo_mhz + hi_mhz));
  if (std::abs(zlo) < kFlatMHz && std::abs(zhi) < kFlatMHz &&
      std::abs(zmid) < kFlatMHz)
    throw DegenerateFlatError("find_zz_zero: zeta is identically zero on the bracket");
  if (zlo == 0.0) return lo_mhz;
  if (zhi == 0.0) return hi_mhz;
  if (zlo * zhi > 0.0)
    throw NoSignChangeError("find_zz_zero: zeta does not change sign on bracket");
  double lo = lo_mhz, hi = hi_mhz;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double zm = zeta_direct(device, mid);
    if (std::abs(zm) < kZetaTolMHz || hi - lo < 1e-9) return mid;
    if (zm * zlo < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      zlo = zm;
    }
  }
  return 0.5 * (lo + hi);
}

HybridizationCurve hybridization(const TrackedSpectrum& spectrum,
                                 const HilbertLabel& state) {
  const int k = spectrum.label_index(state);
  HybridizationCurve curve;
  curve.grid = spectrum.grid;
  curve.weights.reserve(spectrum.grid.size());
  for (const auto& v : spectrum.vectors)
    curve.weights.push_back(v.col(k).array().square());
  return curve;
}

}  // namespace czsim

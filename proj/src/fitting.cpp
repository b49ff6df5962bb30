#include "czsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "czsim/spectrum.hpp"

namespace czsim {

void SpectroscopyDataset::validate() const {
  if (f1.size() != flux.size() || f2.size() != flux.size() ||
      fc.size() != flux.size() || zz.size() != flux.size())
    throw ConfigError("spectroscopy dataset: column lengths differ");
  for (std::size_t i = 0; i < flux.size(); ++i) {
    if (!std::isfinite(flux[i]))
      throw ConfigError("spectroscopy dataset: non-finite flux value");
    if (!f1[i] && !f2[i] && !fc[i] && !zz[i])
      throw ConfigError("spectroscopy dataset: point " + std::to_string(i) +
                        " has no observable");
  }
}

int FitMask::count() const {
  return int(ej_sum) + int(ec) + int(jj_ratio) + int(rho_12) + int(rho_1c) +
         int(rho_2c);
}

namespace {

std::vector<double> pack(const DeviceParams& d, const FitMask& m) {
  std::vector<double> v;
  if (m.ej_sum) v.push_back(d.coupler.ej_sum);
  if (m.ec) v.push_back(d.coupler.ec);
  if (m.jj_ratio) v.push_back(d.coupler.jj_ratio);
  if (m.rho_12) v.push_back(d.rho_12);
  if (m.rho_1c) v.push_back(d.rho_1c);
  if (m.rho_2c) v.push_back(d.rho_2c);
  return v;
}

DeviceParams unpack(const DeviceParams& base, const FitMask& m,
                    const std::vector<double>& v) {
  DeviceParams d = base;
  std::size_t i = 0;
  if (m.ej_sum) d.coupler.ej_sum = v[i++];
  if (m.ec) d.coupler.ec = v[i++];
  if (m.jj_ratio) d.coupler.jj_ratio = v[i++];
  if (m.rho_12) d.rho_12 = v[i++];
  if (m.rho_1c) d.rho_1c = v[i++];
  if (m.rho_2c) d.rho_2c = v[i++];
  return d;
}

}  // namespace

ModelPoint model_observables(const DeviceParams& device, double flux) {
  const double fc_bare = flux_to_frequency(device.coupler, flux);
  const Eigen::MatrixXd h = build_hamiltonian(device, fc_bare);
  auto [evals, evecs] = diagonalize(h);

  auto dressed_energy = [&](const HilbertLabel& l) {
    const int bare = label_to_index(l, device);
    int best = 0;
    double best_w = -1.0;
    for (int k = 0; k < evals.size(); ++k) {
      const double w = evecs(bare, k) * evecs(bare, k);
      if (w > best_w) {
        best_w = w;
        best = k;
      }
    }
    return evals(best);
  };

  const double e00 = dressed_energy({0, 0, 0});
  const double e10 = dressed_energy({1, 0, 0});
  const double e01 = dressed_energy({0, 1, 0});
  const double e11 = dressed_energy({1, 1, 0});
  const double ec1 = dressed_energy({0, 0, 1});
  ModelPoint p;
  p.f1 = e10 - e00;
  p.f2 = e01 - e00;
  p.fc = ec1 - e00;
  p.zz = e11 - e10 - e01 + e00;
  return p;
}

namespace {

Eigen::VectorXd residual_vector(const SpectroscopyDataset& data,
                                const DeviceParams& device, double zeta_scale) {
  std::vector<double> r;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ModelPoint m = model_observables(device, data.flux[i]);
    if (data.f1[i]) r.push_back(m.f1 - *data.f1[i]);
    if (data.f2[i]) r.push_back(m.f2 - *data.f2[i]);
    if (data.fc[i]) r.push_back(m.fc - *data.fc[i]);
    if (data.zz[i]) r.push_back(zeta_scale * (m.zz - *data.zz[i]));
  }
  return Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
}

}  // namespace

FitResult joint_fit(const SpectroscopyDataset& data, const DeviceParams& initial,
                    const FitMask& mask, const FitOptions& opts) {
  data.validate();
  initial.validate();

  FitResult result;
  result.params = initial;
  result.residuals = residual_vector(data, initial, opts.zeta_scale);
  result.objective = result.residuals.squaredNorm();
  if (mask.count() == 0) {
    result.converged = true;
    result.message = "no free parameters";
    return result;
  }

  std::vector<double> x = pack(initial, mask);
  const int np = static_cast<int>(x.size());
  Eigen::VectorXd r = result.residuals;
  double obj = result.objective;
  double lambda = 1e-3;

  auto jacobian = [&](const std::vector<double>& at) {
    Eigen::MatrixXd j(r.size(), np);
    for (int p = 0; p < np; ++p) {
      const double h = std::max(1e-8, 1e-6 * std::abs(at[p]));
      std::vector<double> up = at, dn = at;
      up[p] += h;
      dn[p] -= h;
      const Eigen::VectorXd ru =
          residual_vector(data, unpack(initial, mask, up), opts.zeta_scale);
      const Eigen::VectorXd rd =
          residual_vector(data, unpack(initial, mask, dn), opts.zeta_scale);
      j.col(p) = (ru - rd) / (2.0 * h);
    }
    return j;
  };

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const Eigen::MatrixXd j = jacobian(x);
    const Eigen::VectorXd grad = j.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <
        opts.gradient_tol * std::max(1.0, obj)) {
      result.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::VectorXd diag = jtj.diagonal();
    for (int p = 0; p < np; ++p) diag(p) = std::max(diag(p), 1e-12);

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
      if (ldlt.info() != Eigen::Success) {
        result.singular_jacobian = true;
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd step = ldlt.solve(-grad);
      std::vector<double> x_new = x;
      for (int p = 0; p < np; ++p) x_new[p] += step(p);
      Eigen::VectorXd r_new;
      double obj_new;
      try {
        r_new = residual_vector(data, unpack(initial, mask, x_new),
                                opts.zeta_scale);
        obj_new = r_new.squaredNorm();
      } catch (const std::exception&) {
        lambda *= 10.0;  // stepped outside the valid parameter region
        continue;
      }
      if (obj_new < obj) {
        const double step_norm = step.norm();
        x = x_new;
        r = r_new;
        obj = obj_new;
        lambda = std::max(1e-12, lambda / 3.0);
        accepted = true;
        if (step_norm < opts.step_tol) {
          result.converged = true;
          ++iter;
          goto done;
        }
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) {
      result.converged = true;  // no further descent possible
      result.message = "damping saturated";
      break;
    }
  }
done:
  result.params = unpack(initial, mask, x);
  result.residuals = r;
  result.objective = obj;
  result.iterations = iter;
  if (!result.converged && result.message.empty())
    result.message = "iteration limit reached";
  return result;
}

SearchResult parameter_search(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<std::pair<double, double>>& bounds, int budget,
    std::uint64_t seed) {
  if (budget < 1) throw ConfigError("parameter_search: budget must be >= 1");
  if (bounds.empty()) throw ConfigError("parameter_search: no bounds");
  for (const auto& [lo, hi] : bounds)
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi))
      throw ConfigError("parameter_search: bounds must be finite with lo <= hi");

  const std::size_t nd = bounds.size();
  std::mt19937_64 rng(seed);
  SearchResult result;
  result.best_value = std::numeric_limits<double>::infinity();
  int used = 0;

  auto evaluate = [&](const std::vector<double>& x) {
    const double v = objective(x);
    result.trace.emplace_back(x, v);
    ++used;
    if (v < result.best_value) {
      result.best_value = v;
      result.best = x;
    }
    return v;
  };

  // Latin hypercube over half the budget (at least one sample).
  const int n_lhs = std::max(1, budget / 2);
  std::vector<std::vector<int>> strata(nd, std::vector<int>(n_lhs));
  for (std::size_t d = 0; d < nd; ++d) {
    for (int s = 0; s < n_lhs; ++s) strata[d][s] = s;
    std::shuffle(strata[d].begin(), strata[d].end(), rng);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < n_lhs && used < budget; ++s) {
    std::vector<double> x(nd);
    for (std::size_t d = 0; d < nd; ++d) {
      const double u = (strata[d][s] + unit(rng)) / n_lhs;
      x[d] = bounds[d].first + u * (bounds[d].second - bounds[d].first);
    }
    evaluate(x);
  }

  // Coordinate descent from the best sample with a shrinking step.
  std::vector<double> step(nd);
  for (std::size_t d = 0; d < nd; ++d)
    step[d] = 0.25 * (bounds[d].second - bounds[d].first);
  while (used < budget) {
    bool improved = false;
    for (std::size_t d = 0; d < nd && used < budget; ++d) {
      if (step[d] <= 0.0) continue;
      for (const double sign : {+1.0, -1.0}) {
        if (used >= budget) break;
        std::vector<double> x = result.best;
        x[d] = std::clamp(x[d] + sign * step[d], bounds[d].first,
                          bounds[d].second);
        if (x[d] == result.best[d]) continue;
        const double before = result.best_value;
        if (evaluate(x) < before) {
          improved = true;
          break;
        }
      }
    }
    if (!improved)
      for (auto& s : step) s *= 0.5;
  }
  return result;
}

}  // namespace czsim

#include "czsim/rbstats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace czsim {

double normal_quantile(double p) {
  // Wichura's AS241 algorithm (PPND16).
  if (!(p > 0.0 && p < 1.0))
    throw ConfigError("normal_quantile: p must be in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -val : val;
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("logit: argument must be in (0,1)");
  return std::log(p / (1.0 - p));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void RBDataset::validate() const {
  if (depths.size() != successes.size() || depths.size() != trials.size())
    throw ConfigError("RBDataset: column lengths differ");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (trials[i] < 1) throw ConfigError("RBDataset: trials must be >= 1");
    if (successes[i] < 0 || successes[i] > trials[i])
      throw ConfigError("RBDataset: successes out of range");
    if (i > 0 && depths[i] <= depths[i - 1])
      throw ConfigError("RBDataset: depths must be strictly increasing");
  }
}

std::pair<double, double> wald_interval(long long k, long long n, double level,
                                        bool clamp) {
  if (n < 1 || k < 0 || k > n) throw ConfigError("wald_interval: bad counts");
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("wald_interval: level must be in (0,1)");
  const double phat = static_cast<double>(k) / static_cast<double>(n);
  const double z = normal_quantile(1.0 - 0.5 * (1.0 - level));
  const double half = z * std::sqrt(phat * (1.0 - phat) / static_cast<double>(n));
  double lo = phat - half, hi = phat + half;
  if (clamp) {
    lo = std::max(0.0, lo);
    hi = std::min(1.0, hi);
  }
  return {lo, hi};
}

std::pair<double, double> wilson_interval(long long k, long long n, double level) {
  if (n < 1 || k < 0 || k > n) throw ConfigError("wilson_interval: bad counts");
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("wilson_interval: level must be in (0,1)");
  const double phat = static_cast<double>(k) / static_cast<double>(n);
  const double z = normal_quantile(1.0 - 0.5 * (1.0 - level));
  const double z2 = z * z;
  const double nn = static_cast<double>(n);
  const double denom = 1.0 + z2 / nn;
  const double center = phat + z2 / (2.0 * nn);
  const double root =
      z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn));
  // The score simplifies exactly at the boundaries; avoid round-off there.
  const double lower = k == 0 ? 0.0 : (center - root) / denom;
  const double upper = k == n ? 1.0 : (center + root) / denom;
  return {lower, upper};
}

namespace {

struct Nll {
  const RBDataset& data;

  double operator()(const Eigen::Vector3d& u) const {
    const double a = sigmoid(u(0));
    const double c = sigmoid(u(1));
    const double b = c * (1.0 - a);
    const double p = sigmoid(u(2));
    double nll = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      double pi = a * std::pow(p, data.depths[i]) + b;
      pi = std::min(1.0 - 1e-15, std::max(1e-15, pi));
      const double k = static_cast<double>(data.successes[i]);
      const double n = static_cast<double>(data.trials[i]);
      nll -= k * std::log(pi) + (n - k) * std::log(1.0 - pi);
    }
    return nll;
  }

  Eigen::Vector3d gradient(const Eigen::Vector3d& u) const {
    Eigen::Vector3d g;
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d up = u, dn = u;
      up(j) += h;
      dn(j) -= h;
      g(j) = ((*this)(up) - (*this)(dn)) / (2.0 * h);
    }
    return g;
  }
};

}  // namespace

RBFit mle_fit(const RBDataset& data, std::optional<std::array<double, 3>> init_pab) {
  data.validate();
  if (data.size() < 3) throw ConfigError("mle_fit: need at least 3 depths");

  std::vector<double> y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    y[i] = static_cast<double>(data.successes[i]) /
           static_cast<double>(data.trials[i]);
  const double ymin = *std::min_element(y.begin(), y.end());
  const double ymax = *std::max_element(y.begin(), y.end());
  if (ymax - ymin < 1e-12)
    throw FitDegenerateError("mle_fit: all success fractions are equal");

  double p0, a0, b0;
  if (init_pab) {
    p0 = (*init_pab)[0];
    a0 = (*init_pab)[1];
    b0 = (*init_pab)[2];
  } else {
    // Log-linear heuristic on the depth decay above the floor.
    b0 = std::clamp(ymin - 0.05 * (ymax - ymin), 1e-3, 0.9);
    a0 = std::clamp(ymax - b0, 1e-3, 0.98 - b0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double v = (y[i] - b0) / a0;
      if (v <= 1e-6) continue;
      const double ly = std::log(v);
      const double x = data.depths[i];
      sx += x;
      sy += ly;
      sxx += x * x;
      sxy += x * ly;
      ++cnt;
    }
    p0 = 0.95;
    if (cnt >= 2) {
      const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      p0 = std::clamp(std::exp(slope), 0.2, 0.999999);
    }
  }
  const double c0 = std::clamp(b0 / (1.0 - a0), 1e-9, 1.0 - 1e-9);

  Eigen::Vector3d u(logit(std::clamp(a0, 1e-9, 1.0 - 1e-9)), logit(c0),
                    logit(std::clamp(p0, 1e-9, 1.0 - 1e-9)));
  const Nll nll{data};

  // BFGS with backtracking line search.
  Eigen::Matrix3d hinv = Eigen::Matrix3d::Identity();
  double f = nll(u);
  Eigen::Vector3d g = nll.gradient(u);
  int iter = 0;
  const int max_iter = 1000;
  const double gtol = 1e-8 * std::max(1.0, std::abs(f));
  for (; iter < max_iter; ++iter) {
    if (g.norm() < gtol) break;
    Eigen::Vector3d dir = -hinv * g;
    if (dir.dot(g) > 0.0) dir = -g;  // reset on loss of descent
    double step = 1.0;
    double f_new = f;
    Eigen::Vector3d u_new = u;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      u_new = u + step * dir;
      f_new = nll(u_new);
      if (f_new <= f + 1e-4 * step * g.dot(dir)) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok || (u_new - u).norm() < 1e-12) break;
    const Eigen::Vector3d g_new = nll.gradient(u_new);
    const Eigen::Vector3d s = u_new - u;
    const Eigen::Vector3d yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      const Eigen::Matrix3d i3 = Eigen::Matrix3d::Identity();
      hinv = (i3 - s * yv.transpose() / sy) * hinv *
                 (i3 - yv * s.transpose() / sy) +
             s * s.transpose() / sy;
    }
    u = u_new;
    f = f_new;
    g = g_new;
  }
  if (iter >= max_iter)
    throw ConvergenceFailureError("mle_fit: optimizer hit the iteration limit");

  // Covariance from the finite-difference Hessian of the negative
  // log-likelihood at the optimum.
  Eigen::Matrix3d hess;
  const double hstep = 1e-5;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      Eigen::Vector3d upp = u, upm = u, ump = u, umm = u;
      upp(i) += hstep;
      upp(j) += hstep;
      upm(i) += hstep;
      upm(j) -= hstep;
      ump(i) -= hstep;
      ump(j) += hstep;
      umm(i) -= hstep;
      umm(j) -= hstep;
      hess(i, j) = hess(j, i) =
          (nll(upp) - nll(upm) - nll(ump) + nll(umm)) / (4.0 * hstep * hstep);
    }

  RBFit fit;
  fit.unconstrained = u;
  fit.a = sigmoid(u(0));
  fit.b = sigmoid(u(1)) * (1.0 - fit.a);
  fit.p = sigmoid(u(2));
  fit.covariance = hess.fullPivLu().inverse();
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose().eval());
  fit.log_likelihood = -f;
  fit.iterations = iter;
  return fit;
}

double gate_error(double p_rb, double p_irb, int d) {
  if (d < 2) throw ConfigError("gate_error: d must be >= 2");
  if (!(p_rb > 0.0 && p_rb < 1.0 && p_irb > 0.0 && p_irb < 1.0))
    throw ConfigError("gate_error: p values must be in (0,1)");
  return (static_cast<double>(d - 1) / d) * (1.0 - p_irb / p_rb);
}

namespace {

// Portable Box-Muller normals from mt19937_64, so identical seeds give
// identical streams regardless of the standard library.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::acos(-1.0) * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  double uniform() { return (rng_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Any M with M M^T = cov works for sampling; the symmetric square root also
// handles singular covariances (including exactly zero) without jitter.
Eigen::Matrix3d cholesky_of(const Eigen::Matrix3d& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::Vector3d evals = es.eigenvalues();
  for (int i = 0; i < 3; ++i) {
    if (evals(i) < -1e-9 * scale)
      throw ConfigError("monte_carlo_ci: covariance is not positive semidefinite");
    evals(i) = std::sqrt(std::max(0.0, evals(i)));
  }
  return es.eigenvectors() * evals.asDiagonal();
}

}  // namespace

GateErrorEstimate monte_carlo_ci(const RBFit& fit_rb, const RBFit& fit_irb, int d,
                                 long long samples, double level,
                                 std::uint64_t seed) {
  if (samples < 1) throw ConfigError("monte_carlo_ci: samples must be >= 1");
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("monte_carlo_ci: level must be in (0,1)");
  const Eigen::Matrix3d l_rb = cholesky_of(fit_rb.covariance);
  const Eigen::Matrix3d l_irb = cholesky_of(fit_irb.covariance);
  NormalStream normals(seed);

  std::vector<double> kept;
  kept.reserve(samples);
  for (long long s = 0; s < samples; ++s) {
    Eigen::Vector3d z_rb(normals.next(), normals.next(), normals.next());
    Eigen::Vector3d z_irb(normals.next(), normals.next(), normals.next());
    const Eigen::Vector3d u_rb = fit_rb.unconstrained + l_rb * z_rb;
    const Eigen::Vector3d u_irb = fit_irb.unconstrained + l_irb * z_irb;
    const double p_rb = sigmoid(u_rb(2));
    const double p_irb = sigmoid(u_irb(2));
    const double r = (static_cast<double>(d - 1) / d) * (1.0 - p_irb / p_rb);
    if (r < 0.0 || r > 1.0) continue;  // remove non-physical values
    kept.push_back(r);
  }
  if (kept.size() * 2 < static_cast<std::size_t>(samples))
    throw InsufficientPhysicalSamplesError(
        "monte_carlo_ci: more than half of the samples were non-physical");

  std::sort(kept.begin(), kept.end());
  auto quantile = [&](double q) {
    const double idx = q * (kept.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, kept.size() - 1);
    const double frac = idx - lo;
    return (1.0 - frac) * kept[lo] + frac * kept[hi];
  };
  GateErrorEstimate est;
  est.level = level;
  est.seed = seed;
  est.samples_total = samples;
  est.samples_used = static_cast<long long>(kept.size());
  double sum = 0.0;
  for (double r : kept) sum += r;
  est.mean = sum / kept.size();
  double var = 0.0;
  for (double r : kept) var += (r - est.mean) * (r - est.mean);
  est.sigma = kept.size() > 1 ? std::sqrt(var / (kept.size() - 1)) : 0.0;
  const double alpha = 1.0 - level;
  est.lower = quantile(0.5 * alpha);
  est.upper = quantile(1.0 - 0.5 * alpha);
  return est;
}

double delta_method_sigma(const RBFit& fit_rb, const RBFit& fit_irb, int d) {
  auto var_p = [](const RBFit& f) {
    const double dp = f.p * (1.0 - f.p);  // dp/dgamma at the optimum
    return dp * dp * f.covariance(2, 2);
  };
  const double pr = fit_rb.p, pi = fit_irb.p;
  const double pref = static_cast<double>(d - 1) / d;
  const double dr_dpi = -pref / pr;
  const double dr_dpr = pref * pi / (pr * pr);
  return std::sqrt(dr_dpi * dr_dpi * var_p(fit_irb) +
                   dr_dpr * dr_dpr * var_p(fit_rb));
}

RBDataset synthesize_rb_counts(double p, double a, double b,
                               const std::vector<int>& depths,
                               long long shots_per_depth, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0 && a > 0.0 && a < 1.0 && b >= 0.0 && a + b < 1.0))
    throw ConfigError("synthesize_rb_counts: parameters outside the constrained region");
  if (shots_per_depth < 1)
    throw ConfigError("synthesize_rb_counts: shots must be >= 1");
  std::mt19937_64 rng(seed);
  RBDataset data;
  data.depths = depths;
  for (int m : depths) {
    const double prob = a * std::pow(p, m) + b;
    std::binomial_distribution<long long> bin(shots_per_depth, prob);
    data.successes.push_back(bin(rng));
    data.trials.push_back(shots_per_depth);
  }
  data.validate();
  return data;
}

}  // namespace czsim

#include "fkglab/infotheory.hpp"

#include <algorithm>
#include <cmath>

#include "fkglab/stats.hpp"

namespace fkglab::infotheory {

namespace {

constexpr double kStandardizedTol = 1e-8;

void require_standardized(const smoothing::SmoothedDensity& model) {
  const double m = model.mean(), v = model.variance();
  if (std::abs(m) > kStandardizedTol || std::abs(v - 1.0) > kStandardizedTol)
    throw NotStandardized(m, v);
}

std::string moments_message(double mean, double var) {
  return "model not standardized: mean = " + std::to_string(mean) +
         ", variance = " + std::to_string(var);
}

}  // namespace

NotStandardized::NotStandardized(double mean_, double var_)
    : std::invalid_argument(moments_message(mean_, var_)), mean(mean_), var(var_) {}

DirectEntropy relative_entropy_direct(const smoothing::SmoothedDensity& model,
                                      const QuadratureSpec& quad) {
  quad.validate();
  require_standardized(model);
  const double w = quad.half_width_sigmas;  // sigma = 1
  auto integrand = [&](double u) {
    const double lf = model.log_density(u);
    if (lf < -740.0) return 0.0;
    const double lphi = -0.5 * u * u - 0.5 * kLog2Pi;
    return std::exp(lf) * (lf - lphi);
  };
  const QuadResult q =
      integrate(integrand, -w, w, quad.with_feature_scale(std::sqrt(model.tau())));
  if (!q.converged) throw QuadratureError("relative_entropy_direct: tolerance not met");

  // tail bound: |f log(f/phi)| <= f (|log f| + |log phi|) with
  // |log f(u)| <= (|u| + A)^2/(2 tau) + log N + log(2 pi tau)/2
  const double tau = model.tau();
  const double n = static_cast<double>(model.centers().size());
  double amax = 0;
  for (double c : model.centers()) amax = std::max(amax, std::abs(c));
  const double c2 = 1.0 / tau + 0.5;
  const double c0 = amax * amax / tau + std::log(n) + 0.5 * std::abs(std::log(tau)) + kLog2Pi;
  Accum tail;
  for (double c : model.centers()) {
    tail.add(gauss_tail_quadratic(c, tau, w, true, c0, 0, c2));
    tail.add(gauss_tail_quadratic(c, tau, -w, false, c0, 0, c2));
  }
  DirectEntropy out;
  out.d = q.value;
  out.error = q.error + tail.value() / n;
  if (out.d < -(10.0 * out.error + 1e-9))
    throw QuadratureError("relative_entropy_direct: negative divergence beyond tolerance");
  return out;
}

DeBruijnResult debruijn_from_grid(std::span<const double> tau_grid, std::span<const double> j_st,
                                  std::span<const double> j_st_err, double var_u, double t_max) {
  const int n = static_cast<int>(tau_grid.size());
  if (n < 4 || j_st.size() != tau_grid.size() || j_st_err.size() != tau_grid.size())
    throw std::invalid_argument("debruijn_from_grid: bad grid");
  if (!(var_u > 0)) throw std::invalid_argument("debruijn_from_grid: variance must be positive");

  DeBruijnResult out;
  out.head_tau = tau_grid.front();
  out.tau_grid.assign(tau_grid.begin(), tau_grid.end());
  out.j_st.assign(j_st.begin(), j_st.end());
  out.tail_certificate = 0.5 * std::log1p(var_u / t_max);  // from J_st(U + Z_t) <= var_u / t

  // trapezoid in w = tau/(var_u + tau); integrand J_st/(2 (1-w))
  auto trapz = [&](int stride) {
    std::vector<int> idx;
    for (int i = 0; i < n; i += stride) idx.push_back(i);
    if (idx.back() != n - 1) idx.push_back(n - 1);
    Accum v, e;
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
      const int i = idx[k], j = idx[k + 1];
      const double wi = tau_grid[i] / (var_u + tau_grid[i]);
      const double wj = tau_grid[j] / (var_u + tau_grid[j]);
      v.add(0.25 * (j_st[i] / (1 - wi) + j_st[j] / (1 - wj)) * (wj - wi));
      e.add(0.25 * (j_st_err[i] / (1 - wi) + j_st_err[j] / (1 - wj)) * (wj - wi));
    }
    return std::pair{v.value(), e.value()};
  };
  const auto [full, err_full] = trapz(1);
  const auto [half, err_half] = trapz(2);
  (void)err_half;
  out.d = full;
  out.discretization_estimate = std::abs(full - half) / 3.0;  // halved-grid Richardson estimate
  out.quadrature_sum = err_full;
  out.combined_certificate =
      out.discretization_estimate + out.tail_certificate + out.quadrature_sum;
  return out;
}

DeBruijnResult relative_entropy_debruijn(std::span<const double> samples, const DeBruijnSpec& spec,
                                         const QuadratureSpec& quad) {
  if (samples.size() < 1) throw std::invalid_argument("relative_entropy_debruijn: no samples");
  if (!(spec.tau_min > 0) || !(spec.t_max > spec.tau_min) || spec.points < 4)
    throw std::invalid_argument("relative_entropy_debruijn: bad grid spec");
  {
    std::vector<double> v(samples.begin(), samples.end());
    const double m = mean(v);
    Accum a;
    for (double x : v) a.add((x - m) * (x - m));
    const double var = a.value() / static_cast<double>(v.size());
    if (std::abs(m) > kStandardizedTol || std::abs(var - 1.0) > kStandardizedTol)
      throw NotStandardized(m, var);
  }

  const double tail = 0.5 * std::log1p(1.0 / spec.t_max);
  if (spec.max_tail_certificate > 0 && tail > spec.max_tail_certificate)
    throw std::invalid_argument(
        "relative_entropy_debruijn: T_max too small for requested certificate");

  const int n = spec.points;
  const double lr = std::log(spec.t_max / spec.tau_min);
  std::vector<double> taus(n), jst(n), errs(n);
  const smoothing::SmoothedDensity base(std::vector<double>(samples.begin(), samples.end()),
                                        spec.tau_min);
  for (int i = 0; i < n; ++i) {
    const double tau = spec.tau_min * std::exp(lr * i / (n - 1));
    const auto fr = smoothing::fisher(base.with_bandwidth(tau), quad);
    taus[i] = tau;
    jst[i] = fr.j_st;
    errs[i] = fr.error * (1.0 + tau);  // error on J_st = sigma^2 J - 1
  }
  return debruijn_from_grid(taus, jst, errs, 1.0, spec.t_max);
}

GaussianDistances gaussian_distances(const smoothing::SmoothedDensity& model,
                                     const QuadratureSpec& quad) {
  quad.validate();
  require_standardized(model);
  const double w = quad.half_width_sigmas;
  auto absdiff = [&](double u) { return std::abs(model.density(u) - norm_pdf(u)); };
  const QuadResult q =
      integrate(absdiff, -w, w, quad.with_feature_scale(std::sqrt(model.tau())));
  if (!q.converged) throw QuadratureError("gaussian_distances: TV quadrature tolerance not met");

  GaussianDistances out;
  out.tv = q.value;
  const int dense = std::max(8192, quad.nodes);
  for (int i = 0; i <= dense; ++i) {
    const double u = -w + 2 * w * i / dense;
    out.sup = std::max(out.sup, absdiff(u));
  }
  out.j_st = smoothing::fisher(model, quad).j_st;
  const double root = std::sqrt(std::max(0.0, out.j_st));
  out.tv_bound = 4.0 * std::sqrt(3.0) * root;
  out.sup_bound = (1.0 + std::sqrt(6.0 / 3.141592653589793238)) * root;
  out.tv_slack = out.tv_bound - out.tv;
  out.sup_slack = out.sup_bound - out.sup;
  const double tol = 10 * q.error + 1e-8;
  out.tv_ok = out.tv_slack >= -tol;
  out.sup_ok = out.sup_slack >= -tol;
  return out;
}

InfoFunctionals info_functionals(std::span<const double> raw_draws, double tau,
                                 const DeBruijnSpec& spec_in, const QuadratureSpec& quad) {
  const auto draws = standardize_draws(raw_draws);
  DeBruijnSpec spec = spec_in;
  spec.tau_min = tau;  // both routes target the tau-smoothed standardized model
  InfoFunctionals out;
  const auto model = smoothing::smooth(draws, tau).standardized();
  out.direct = relative_entropy_direct(model, quad);
  out.debruijn = relative_entropy_debruijn(draws, spec, quad);
  out.distances = gaussian_distances(model, quad);
  return out;
}

std::vector<double> standardize_draws(std::span<const double> draws) {
  std::vector<double> v(draws.begin(), draws.end());
  if (v.size() < 2) throw std::invalid_argument("standardize_draws: need at least two draws");
  const double m = mean(v);
  Accum a;
  for (double x : v) a.add((x - m) * (x - m));
  const double sd = std::sqrt(a.value() / static_cast<double>(v.size()));
  if (!(sd > 0)) throw std::invalid_argument("standardize_draws: zero variance");
  for (auto& x : v) x = (x - m) / sd;
  return v;
}

}  // namespace fkglab::infotheory

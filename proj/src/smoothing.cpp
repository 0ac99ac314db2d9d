#include "fkglab/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fkglab/stats.hpp"

namespace fkglab::smoothing {

SmoothedDensity::SmoothedDensity(std::vector<double> centers, double tau)
    : centers_(std::move(centers)), tau_(tau) {
  if (!(tau_ > 0.0)) throw std::invalid_argument("SmoothedDensity: bandwidth tau must be positive");
  if (centers_.empty()) throw std::invalid_argument("SmoothedDensity: need at least one center");
  for (double c : centers_)
    if (!std::isfinite(c)) throw std::invalid_argument("SmoothedDensity: non-finite center");
  mean_ = fkglab::mean(centers_);
  Accum a;
  for (double c : centers_) a.add((c - mean_) * (c - mean_));
  cvar_ = a.value() / static_cast<double>(centers_.size());
}

double SmoothedDensity::density(double u) const {
  const double inv2t = 0.5 / tau_;
  Accum a;
  for (double c : centers_) {
    const double d = u - c;
    a.add(std::exp(-d * d * inv2t));
  }
  return a.value() / (static_cast<double>(centers_.size()) * kSqrt2Pi * std::sqrt(tau_));
}

double SmoothedDensity::log_density(double u) const {
  const double inv2t = 0.5 / tau_;
  double emax = -1e308;
  for (double c : centers_) {
    const double e = -(u - c) * (u - c) * inv2t;
    if (e > emax) emax = e;
  }
  Accum a;
  for (double c : centers_) {
    const double e = -(u - c) * (u - c) * inv2t;
    a.add(std::exp(e - emax));
  }
  return emax + std::log(a.value()) - std::log(static_cast<double>(centers_.size())) -
         0.5 * std::log(tau_) - 0.5 * kLog2Pi;
}

SmoothedDensity::Eval SmoothedDensity::eval(double u) const {
  if (!std::isfinite(u)) throw std::invalid_argument("SmoothedDensity::eval: non-finite point");
  const double inv2t = 0.5 / tau_;
  double emax = -1e308;
  for (double c : centers_) {
    const double e = -(u - c) * (u - c) * inv2t;
    if (e > emax) emax = e;
  }
  Accum w, wd;
  for (double c : centers_) {
    const double d = u - c;
    const double e = std::exp(-d * d * inv2t - emax);
    w.add(e);
    wd.add(e * d);
  }
  const double wsum = w.value();     // >= 1 by construction
  const double dsum = wd.value();
  const double norm = static_cast<double>(centers_.size()) * kSqrt2Pi * std::sqrt(tau_);
  const double scale = std::exp(emax);  // may underflow to 0 far out; score stays finite
  Eval ev;
  ev.f = scale * wsum / norm;
  ev.fprime = -scale * dsum / (tau_ * norm);
  ev.score = -dsum / (tau_ * wsum);
  return ev;
}

double SmoothedDensity::score(double u) const { return eval(u).score; }

SmoothedDensity SmoothedDensity::rescaled(double c) const {
  if (c == 0.0) throw std::invalid_argument("rescaled: scale factor must be nonzero");
  std::vector<double> cs(centers_.size());
  for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = c * centers_[i];
  return SmoothedDensity(std::move(cs), c * c * tau_);
}

SmoothedDensity SmoothedDensity::shifted(double a) const {
  std::vector<double> cs(centers_.size());
  for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = centers_[i] + a;
  return SmoothedDensity(std::move(cs), tau_);
}

SmoothedDensity SmoothedDensity::standardized() const {
  return shifted(-mean_).rescaled(1.0 / std::sqrt(variance()));
}

SmoothedDensity SmoothedDensity::with_bandwidth(double tau) const {
  return SmoothedDensity(centers_, tau);
}

FisherResult fisher(const SmoothedDensity& model, const QuadratureSpec& quad) {
  quad.validate();
  const double sd = std::sqrt(model.variance());
  const double lo = model.mean() - quad.half_width_sigmas * sd;
  const double hi = model.mean() + quad.half_width_sigmas * sd;
  auto integrand = [&](double u) {
    const auto ev = model.eval(u);
    return ev.f > 0.0 ? ev.f * ev.score * ev.score : 0.0;
  };
  // J can be as large as 1/tau; keep the tolerance meaningful on that scale
  QuadratureSpec q1 = quad.with_feature_scale(std::sqrt(model.tau()));
  q1.abs_tol = quad.abs_tol * std::max(1.0, 1.0 / model.tau());
  const QuadResult q = integrate(integrand, lo, hi, q1);
  if (!q.converged)
    throw QuadratureError("fisher: quadrature failed to meet tolerance (estimate " +
                          std::to_string(q.error) + ")");

  // analytic bound on the discarded tails:
  // f rho^2 <= sum_i phi_tau(u - s_i) (u - s_i)^2 / (N tau^2) pointwise
  Accum tail;
  const double tau = model.tau();
  for (double c : model.centers()) {
    tail.add(gauss_tail_quadratic(0.0, tau, hi - c, true, 0, 0, 1.0 / (tau * tau)));
    tail.add(gauss_tail_quadratic(0.0, tau, lo - c, false, 0, 0, 1.0 / (tau * tau)));
  }
  const double tail_bound = tail.value() / static_cast<double>(model.centers().size());

  FisherResult res;
  res.j = q.value;
  res.error = q.error + tail_bound;
  res.evals = q.evals;
  res.j_st = model.variance() * res.j - 1.0;

  const double guard = 10.0 * res.error + 1e-9;
  if (res.j > 1.0 / tau + guard)
    throw QuadratureError("fisher: J exceeds the 1/tau bound beyond tolerance");
  if (res.j_st < -(model.variance() * guard))
    throw QuadratureError("fisher: standardized information negative beyond tolerance");
  return res;
}

TailProfile tail_profile(const SmoothedDensity& model, std::span<const double> r_grid) {
  TailProfile prof;
  const double sigma2 = model.variance();
  const double sigma = std::sqrt(sigma2);
  const double tau = model.tau();
  const double m = model.mean();
  for (double r : r_grid) {
    if (r < 0) throw std::invalid_argument("tail_profile: R grid must be nonnegative");
    const double edge = r * sigma;
    Accum a;
    for (double c : model.centers()) {
      const double mu = c - m;  // centered component mean
      a.add(gauss_tail_quadratic(mu, tau, edge, true, 0, 0, 1));
      a.add(gauss_tail_quadratic(mu, tau, -edge, false, 0, 0, 1));
    }
    const double val = a.value() / static_cast<double>(model.centers().size());
    prof.radius.push_back(r);
    prof.value.push_back(val / sigma2);
  }
  // envelope fit: -log(value) ~ q R^2/2 over usable points
  Accum num, den;
  for (std::size_t i = 0; i < prof.radius.size(); ++i) {
    const double r = prof.radius[i], v = prof.value[i];
    if (r > 0 && v > 1e-300 && v < 1.0) {
      num.add((0.5 * r * r) * (-std::log(v)));
      den.add(0.25 * r * r * r * r);
    }
  }
  prof.envelope_exponent = den.value() > 0 ? num.value() / den.value() : 0.0;
  return prof;
}

SmoothedDensity smooth(std::span<const double> draws, double tau) {
  return SmoothedDensity(std::vector<double>(draws.begin(), draws.end()), tau);
}

}  // namespace fkglab::smoothing

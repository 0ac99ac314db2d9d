#include "fkglab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fkglab/rng.hpp"
#include "fkglab/stats.hpp"

namespace fkglab::inequalities {

namespace {

constexpr double kE = 2.718281828459045235360287;
constexpr double kPi = 3.141592653589793238462643;

struct Axis {
  std::vector<double> nodes, weights;
};

Axis scaled_axis(const std::vector<double>& centers, double tau, double pad, int n) {
  const auto [lo_it, hi_it] = std::minmax_element(centers.begin(), centers.end());
  const double lo = *lo_it - pad * std::sqrt(tau);
  const double hi = *hi_it + pad * std::sqrt(tau);
  const auto& rule = gauss_legendre(n);
  Axis ax;
  ax.nodes.resize(n);
  ax.weights.resize(n);
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  for (int i = 0; i < n; ++i) {
    ax.nodes[i] = c + h * rule[i].x;
    ax.weights[i] = h * rule[i].w;
  }
  return ax;
}

// kernel table exp(-(x_j - c_i)^2 / (2 tau)) for all nodes x j-major
std::vector<double> kernel_table(const Axis& ax, const std::vector<double>& centers, double tau) {
  const std::size_t n = ax.nodes.size(), m = centers.size();
  std::vector<double> tab(n * m);
  const double inv2t = 0.5 / tau;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = ax.nodes[j];
    double* row = tab.data() + j * m;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = x - centers[i];
      row[i] = std::exp(-d * d * inv2t);
    }
  }
  return tab;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

void Quad2DSpec::validate() const {
  if (nodes_per_axis < 32) throw std::invalid_argument("Quad2DSpec: need >= 32 nodes per axis");
  if (pad_sigmas < 6) throw std::invalid_argument("Quad2DSpec: window pad must be >= 6 sqrt(tau)");
  if (mc_draws < 1000) throw std::invalid_argument("Quad2DSpec: too few Monte Carlo draws");
}

JointSmoothedDensity::JointSmoothedDensity(std::vector<double> s, std::vector<double> t, double tau)
    : s_(std::move(s)),
      t_(std::move(t)),
      tau_(tau),
      margx_(s_, tau),
      margy_(t_, tau),
      cov_(0) {
  if (s_.size() != t_.size() || s_.empty())
    throw std::invalid_argument("JointSmoothedDensity: need equally many paired centers");
  if (!(tau_ > 0)) throw std::invalid_argument("JointSmoothedDensity: tau must be positive");
  const double ms = margx_.mean(), mt = margy_.mean();
  Accum a;
  for (std::size_t i = 0; i < s_.size(); ++i) a.add((s_[i] - ms) * (t_[i] - mt));
  cov_ = a.value() / static_cast<double>(s_.size());
}

JointSmoothedDensity::Eval JointSmoothedDensity::eval(double x, double y) const {
  const double inv2t = 0.5 / tau_;
  const std::size_t n = s_.size();
  double emax = -1e308;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x - s_[i], dy = y - t_[i];
    const double e = -(dx * dx + dy * dy) * inv2t;
    if (e > emax) emax = e;
  }
  Accum w, wx, wy;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x - s_[i], dy = y - t_[i];
    const double e = std::exp(-(dx * dx + dy * dy) * inv2t - emax);
    w.add(e);
    wx.add(e * dx);
    wy.add(e * dy);
  }
  const double wsum = w.value();
  const double norm = static_cast<double>(n) * 2.0 * kPi * tau_;
  const double scale = std::exp(emax);
  Eval ev;
  ev.p = scale * wsum / norm;
  ev.p1 = -scale * wx.value() / (tau_ * norm);
  ev.p2 = -scale * wy.value() / (tau_ * norm);
  ev.rho1 = -wx.value() / (tau_ * wsum);
  ev.rho2 = -wy.value() / (tau_ * wsum);
  return ev;
}

smoothing::SmoothedDensity JointSmoothedDensity::sum_model(double beta) const {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("sum_model: beta must lie in [0, 1]");
  const double sb = std::sqrt(beta), sb1 = std::sqrt(1.0 - beta);
  std::vector<double> c(s_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = sb * s_[i] + sb1 * t_[i];
  return smoothing::SmoothedDensity(std::move(c), tau_);
}

smoothing::SmoothedDensity JointSmoothedDensity::plain_sum_model() const {
  std::vector<double> c(s_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = s_[i] + t_[i];
  return smoothing::SmoothedDensity(std::move(c), 2.0 * tau_);
}

JointSmoothedDensity JointSmoothedDensity::shuffled(std::uint64_t seed) const {
  std::vector<double> tt = t_;
  Rng rng(seed, 0x5u);
  for (std::size_t i = tt.size(); i > 1; --i)
    std::swap(tt[i - 1], tt[rng.below(i)]);
  return JointSmoothedDensity(s_, std::move(tt), tau_);
}

MFunction m_function(const JointSmoothedDensity& joint, double a, double b, double x, double y) {
  const auto ev = joint.eval(x, y);
  const auto mx = joint.marginal_x().eval(x);
  const auto my = joint.marginal_y().eval(y);
  MFunction out;
  out.direct = a * (ev.rho1 - mx.score) + b * (ev.rho2 - my.score);
  out.density_route = (a * (ev.p1 - mx.fprime * my.f) + b * (ev.p2 - mx.f * my.fprime)) / ev.p +
                      (a * mx.score + b * my.score) * (mx.f * my.f - ev.p) / ev.p;
  return out;
}

double score_of_sum_residual(const JointSmoothedDensity& joint, double beta,
                             std::span<const double> z_grid, const QuadratureSpec& quad) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("score_of_sum_residual: beta must lie in [0, 1]");
  const double sb = std::sqrt(beta), sb1 = std::sqrt(1.0 - beta);
  const bool first_form = beta >= 0.5;  // divide by the larger weight
  const auto sum = joint.sum_model(beta);

  // orthogonal coordinates: x = sb z + sb1 v, y = sb1 z - sb v (unit Jacobian)
  std::vector<double> vc(joint.size());
  for (long i = 0; i < joint.size(); ++i)
    vc[i] = sb1 * joint.s_centers()[i] - sb * joint.t_centers()[i];
  const double pad = 12.0 * std::sqrt(joint.tau());
  const double vlo = *std::min_element(vc.begin(), vc.end()) - pad;
  const double vhi = *std::max_element(vc.begin(), vc.end()) + pad;

  double worst = 0;
  for (double z : z_grid) {
    auto num = [&](double v) {
      const double x = sb * z + sb1 * v, y = sb1 * z - sb * v;
      const auto ev = joint.eval(x, y);
      const double g = first_form ? ev.rho1 / sb : ev.rho2 / sb1;
      return ev.p * g;
    };
    auto den = [&](double v) {
      const double x = sb * z + sb1 * v, y = sb1 * z - sb * v;
      return joint.eval(x, y).p;
    };
    const auto q_local = quad.with_feature_scale(std::sqrt(joint.tau()));
    const QuadResult qn = integrate(num, vlo, vhi, q_local);
    const QuadResult qd = integrate(den, vlo, vhi, q_local);
    if (qd.value <= 0) continue;  // z far outside the mass: skip
    worst = std::max(worst, std::abs(sum.score(z) - qn.value / qd.value));
  }
  return worst;
}

namespace {

FunctionalSet decomposition_mc(const JointSmoothedDensity& joint, double beta,
                               const Quad2DSpec& q2) {
  const double sb = std::sqrt(beta), sb1 = std::sqrt(1.0 - beta);
  const auto sum = joint.sum_model(beta);
  const double tau = joint.tau();
  Rng rng(q2.mc_seed, 0x2dULL);
  const long n = joint.size();
  // Welford accumulators for (cross, m_term, delta)
  double m1[3] = {0, 0, 0}, m2[3] = {0, 0, 0};
  for (long k = 0; k < q2.mc_draws; ++k) {
    const long i = static_cast<long>(rng.below(static_cast<std::uint64_t>(n)));
    const double x = joint.s_centers()[i] + std::sqrt(tau) * rng.normal();
    const double y = joint.t_centers()[i] + std::sqrt(tau) * rng.normal();
    const auto ev = joint.eval(x, y);
    const double rx = joint.marginal_x().score(x);
    const double ry = joint.marginal_y().score(y);
    const double rw = sum.score(sb * x + sb1 * y);
    const double h = sb * rx + sb1 * ry - rw;
    const double mm = sb * (ev.rho1 - rx) + sb1 * (ev.rho2 - ry);
    const double vals[3] = {rx * ry, mm * rw, h * h};
    for (int q = 0; q < 3; ++q) {
      const double d = vals[q] - m1[q];
      m1[q] += d / (k + 1);
      m2[q] += d * (vals[q] - m1[q]);
    }
  }
  FunctionalSet f;
  f.used_mc = true;
  f.cross = m1[0];
  f.m_term = m1[1];
  f.delta = m1[2];
  const double dn = static_cast<double>(q2.mc_draws);
  f.mc_se_cross = std::sqrt(m2[0] / (dn - 1) / dn);
  f.mc_se_m = std::sqrt(m2[1] / (dn - 1) / dn);
  f.mc_se_delta = std::sqrt(m2[2] / (dn - 1) / dn);
  return f;
}

}  // namespace

FunctionalSet decomposition(const JointSmoothedDensity& joint, double beta, const Quad2DSpec& q2,
                            const QuadratureSpec& q1) {
  q2.validate();
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("decomposition: beta must lie in [0, 1]");

  const double tau = joint.tau();
  const double sb = std::sqrt(beta), sb1 = std::sqrt(1.0 - beta);
  const auto sum = joint.sum_model(beta);

  FunctionalSet f = (joint.size() > q2.mc_center_threshold) ? decomposition_mc(joint, beta, q2)
                                                            : FunctionalSet{};

  const auto frx = smoothing::fisher(joint.marginal_x(), q1);
  const auto fry = smoothing::fisher(joint.marginal_y(), q1);
  const auto frw = smoothing::fisher(sum, q1);
  f.j_x = frx.j;
  f.j_y = fry.j;
  f.j_sum = frw.j;
  f.j_err = frx.error + fry.error + frw.error;

  if (!f.used_mc) {
    const long n = joint.size();
    const Axis ax = scaled_axis(joint.s_centers(), tau, q2.pad_sigmas, q2.nodes_per_axis);
    const Axis ay = scaled_axis(joint.t_centers(), tau, q2.pad_sigmas, q2.nodes_per_axis);
    const auto ex = kernel_table(ax, joint.s_centers(), tau);
    const auto ey = kernel_table(ay, joint.t_centers(), tau);

    // marginal densities/scores along each axis from the same tables
    const auto axis_scores = [&](const Axis& ax_, const std::vector<double>& tab,
                                 const std::vector<double>& centers) {
      std::vector<double> rho(ax_.nodes.size());
      for (std::size_t j = 0; j < ax_.nodes.size(); ++j) {
        const double* row = tab.data() + j * centers.size();
        Accum w, wc;
        for (std::size_t i = 0; i < centers.size(); ++i) {
          w.add(row[i]);
          wc.add(row[i] * centers[i]);
        }
        const double wsum = w.value();
        rho[j] = wsum > 0 ? -(ax_.nodes[j] * wsum - wc.value()) / (tau * wsum)
                          : 0.0;  // density underflowed: the row is skipped below
      }
      return rho;
    };
    const auto rho_x = axis_scores(ax, ex, joint.s_centers());
    const auto rho_y = axis_scores(ay, ey, joint.t_centers());

    const double pnorm = 1.0 / (static_cast<double>(n) * 2.0 * kPi * tau);
    Accum acc_cross, acc_m, acc_delta;
    std::vector<double> st(n);
    for (long i = 0; i < n; ++i) st[i] = joint.t_centers()[i];
    for (std::size_t j = 0; j < ax.nodes.size(); ++j) {
      const double* exr = ex.data() + j * n;
      const double x = ax.nodes[j];
      const double rx = rho_x[j];
      for (std::size_t k = 0; k < ay.nodes.size(); ++k) {
        const double* eyr = ey.data() + k * n;
        const double y = ay.nodes[k];
        double s0 = 0, ss = 0, stt = 0;
        for (long i = 0; i < n; ++i) {
          const double prod = exr[i] * eyr[i];
          s0 += prod;
          ss += prod * joint.s_centers()[i];
          stt += prod * st[i];
        }
        if (s0 < 1e-290) continue;  // true density negligible here
        const double p = s0 * pnorm;
        const double rho1 = -(x * s0 - ss) / (tau * s0);
        const double rho2 = -(y * s0 - stt) / (tau * s0);
        const double ry = rho_y[k];
        const double rw = sum.score(sb * x + sb1 * y);
        const double h = sb * rx + sb1 * ry - rw;
        const double mm = sb * (rho1 - rx) + sb1 * (rho2 - ry);
        const double w = ax.weights[j] * ay.weights[k] * p;
        acc_cross.add(w * rx * ry);
        acc_m.add(w * mm * rw);
        acc_delta.add(w * h * h);
      }
    }
    f.cross = acc_cross.value();
    f.m_term = acc_m.value();
    f.delta = acc_delta.value();

    // analytic bound on the discarded window exterior: every integrand here is
    // dominated by p(x,y) (C0 + C2 (x^2 + y^2)) with envelope constants from
    // |rho_X(x)| <= (|x| + max|s|)/tau and its joint/sum analogues
    const double as = max_abs(joint.s_centers());
    const double at = max_abs(joint.t_centers());
    const double aw = max_abs(sum.centers());
    const double c2 = 18.0 / (tau * tau);
    const double c0 = (8 * as * as + 8 * at * at + 6 * (as * as + at * at + aw * aw)) / (tau * tau);
    const double xlo = ax.nodes.front() - 0.0, xhi = ax.nodes.back();
    const double ylo = ay.nodes.front(), yhi = ay.nodes.back();
    Accum tail;
    for (long i = 0; i < n; ++i) {
      const double si = joint.s_centers()[i], ti = joint.t_centers()[i];
      tail.add(gauss_tail_quadratic(si, tau, xhi, true, c0 + c2 * (ti * ti + tau), 0, c2));
      tail.add(gauss_tail_quadratic(si, tau, xlo, false, c0 + c2 * (ti * ti + tau), 0, c2));
      tail.add(gauss_tail_quadratic(ti, tau, yhi, true, c0 + c2 * (si * si + tau), 0, c2));
      tail.add(gauss_tail_quadratic(ti, tau, ylo, false, c0 + c2 * (si * si + tau), 0, c2));
    }
    f.tail_bound = tail.value() / static_cast<double>(n);
  }

  const double lhs =
      beta * f.j_x + (1 - beta) * f.j_y - f.j_sum + 2 * sb * sb1 * f.cross + 2 * f.m_term;
  f.residual = std::abs(lhs - f.delta);
  return f;
}

double delta(const JointSmoothedDensity& joint, double beta, const Quad2DSpec& q2,
             const QuadratureSpec& q1) {
  return decomposition(joint, beta, q2, q1).delta;
}

double decomposition_residual(const JointSmoothedDensity& joint, double beta, const Quad2DSpec& q2,
                           const QuadratureSpec& q1) {
  return decomposition(joint, beta, q2, q1).residual;
}

double c_tau_k(double tau, double k) {
  return std::sqrt(2.0) * std::pow(2.0 * k / (tau * kE), 0.5 * k);
}

double f1_scorebody(double tau, double k_bound) {
  return 8.0 * (3.0 + 2.0 * k_bound / tau) / (std::sqrt(tau) * kE);
}

namespace {

// conservative explicit chain for the in-box M-term bound
double assemble_f2(double tau, double k_bound, double& f1_x, double& f1_sum) {
  f1_x = f1_scorebody(tau, k_bound);
  f1_sum = f1_scorebody(2.0 * tau, 4.0 * k_bound);  // X + Y: bandwidth 2 tau, Var(S+T) <= 4K
  const double c_over_cov = 1.0 / (2.0 * kPi * std::pow(tau, 2.5) * kE * kE);
  const double iw = 4.0 * std::sqrt(2.0) * std::sqrt(tau) * f1_sum;  // int rho~^2 over L_B / B^4
  const double ix = 2.0 * f1_x * std::sqrt(tau);                     // int rho_X^2 over L_B / B^4
  const double term1 = std::sqrt(tau) * kE * std::sqrt(ix * iw);
  const double term2 = 4.0 * std::sqrt(tau) * std::sqrt(iw);  // area factor, B >= 1 absorbed
  return c_over_cov * (term1 + term2);
}

// off-region Hoelder/moment chain for E rho_X rho_Y outside L_B
double off_region_bound(double tau, double k_bound, double b, double& p_used) {
  const double cheb = 2.0 * (k_bound + tau) / (b * b * tau);
  double best = 1e308;
  p_used = 0;
  for (double p : {1.05, 1.1, 1.25, 1.5, 2.0, 3.0}) {
    const double moment = std::pow(2.0, 1.0 / (2.0 * p)) * 4.0 * p / (tau * kE);
    const double val = moment * std::pow(std::min(1.0, cheb), 1.0 - 1.0 / p);
    if (val < best) {
      best = val;
      p_used = p;
    }
  }
  return best;
}

}  // namespace

DecompositionReport subadditivity_gap(const JointSmoothedDensity& joint, double beta, double eps,
                                double k_bound, ExponentMode mode, double moment_delta,
                                const Quad2DSpec& q2, const QuadratureSpec& q1) {
  if (!(eps > 0 && eps < 1.0 / 3.0)) throw std::invalid_argument("subadditivity_gap: eps outside (0, 1/3)");
  const double vmax = std::max(joint.marginal_x().center_variance(),
                               joint.marginal_y().center_variance());
  if (k_bound < vmax * (1 - 1e-12))
    throw std::invalid_argument("subadditivity_gap: K must dominate the marginal variances");
  if (joint.cov() < -1e-9)
    throw std::invalid_argument("subadditivity_gap: negative center covariance (not the FKG direction)");

  DecompositionReport rep;
  rep.beta = beta;
  rep.k_bound = k_bound;
  rep.functionals = decomposition(joint, beta, q2, q1);
  rep.cov_st = joint.cov();
  rep.exponent = mode == ExponentMode::fixed_third
                     ? 1.0 / 3.0 - eps
                     : (2.0 + moment_delta) / (6.0 + moment_delta) - eps;
  rep.k_list = {2.0, 4.0};
  for (double k : rep.k_list) rep.c_tau_k.push_back(c_tau_k(joint.tau(), k));
  rep.f1 = f1_scorebody(joint.tau(), k_bound);
  double f1x, f1s;
  rep.f2 = assemble_f2(joint.tau(), k_bound, f1x, f1s);

  const auto& f = rep.functionals;
  const double gap = f.delta - (beta * f.j_x + (1 - beta) * f.j_y - f.j_sum);
  if (rep.cov_st < 1e-12) {
    rep.correction_skipped = true;
    rep.min_c = 0.0;
    rep.b_tradeoff = 0.0;
    rep.b_exceeds_one = false;
    rep.f4 = rep.f5 = 0.0;
    return rep;
  }
  rep.min_c = std::max(0.0, gap) / std::pow(rep.cov_st, rep.exponent);
  rep.b_tradeoff = std::pow(k_bound / rep.cov_st, 1.0 / 6.0);
  rep.b_exceeds_one = rep.b_tradeoff > 1.0;
  rep.f4 = rep.f1 / (kPi * kE * std::pow(joint.tau(), 1.5));
  double p_used;
  const double beff = std::max(rep.b_tradeoff, 1.0);
  rep.f5 = off_region_bound(joint.tau(), k_bound, beff, p_used) * beff * beff;
  return rep;
}

ThetaSeminorm theta_seminorm(const std::function<double(double)>& f, double tau,
                             int hermite_nodes) {
  if (!(tau > 0)) throw std::invalid_argument("theta_seminorm: tau must be positive");
  const double ref = 0.5 * tau;
  const double sd = std::sqrt(ref);
  const auto& rule = gauss_hermite(hermite_nodes);
  Accum eb, ea, e2;
  std::vector<double> fz(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double z = sd * rule[i].x;
    fz[i] = f(z);
    eb.add(rule[i].w * fz[i]);
    ea.add(rule[i].w * fz[i] * z);
    e2.add(rule[i].w * fz[i] * fz[i]);
  }
  ThetaSeminorm out;
  out.reference_tau = ref;
  out.b = eb.value();
  out.a = ea.value() / ref;
  out.raw_second_moment = e2.value();
  Accum res;  // integrate the squared residual directly: nonnegative by construction
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double z = sd * rule[i].x;
    const double r = fz[i] - out.a * z - out.b;
    res.add(rule[i].w * r * r);
  }
  out.residual = res.value();
  return out;
}

FactorizationAudit factorization_bounds(const JointSmoothedDensity& joint, double b_region,
                                        double k_bound, double a, double b, int grid_n) {
  if (b_region < 1.0) throw std::invalid_argument("factorization_bounds: B must be >= 1");
  if (joint.cov() < -1e-9)
    throw std::invalid_argument("factorization_bounds: pairs must carry nonnegative covariance");
  const double tau = joint.tau();
  const double cov = std::max(0.0, joint.cov());
  const long n = joint.size();
  const double lim = b_region * std::sqrt(tau);

  FactorizationAudit audit;
  audit.b = b_region;
  audit.cov_st = joint.cov();
  audit.a = a;
  audit.b_weight = b;
  audit.bound_p = cov / (2.0 * kPi * tau * tau * kE);
  audit.bound_p1 = cov / (kPi * std::pow(tau, 2.5) * kE * kE);
  audit.bound_p2 = audit.bound_p1;

  std::vector<double> xg(grid_n), yg(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    xg[i] = -lim + 2 * lim * i / (grid_n - 1);
    yg[i] = xg[i];
  }

  // rank-one accumulation of p, d1 p, d2 p and the marginals on the grid
  std::vector<double> P(grid_n * grid_n, 0.0), P1(grid_n * grid_n, 0.0), P2(grid_n * grid_n, 0.0);
  std::vector<double> fx(grid_n, 0.0), fx1(grid_n, 0.0), fy(grid_n, 0.0), fy1(grid_n, 0.0);
  std::vector<double> gx(grid_n), gx1(grid_n), gy(grid_n), gy1(grid_n);
  const double knorm = 1.0 / (kSqrt2Pi * std::sqrt(tau));
  for (long i = 0; i < n; ++i) {
    const double si = joint.s_centers()[i], ti = joint.t_centers()[i];
    for (int j = 0; j < grid_n; ++j) {
      const double dx = xg[j] - si;
      gx[j] = std::exp(-0.5 * dx * dx / tau) * knorm;
      gx1[j] = -(dx / tau) * gx[j];
      const double dy = yg[j] - ti;
      gy[j] = std::exp(-0.5 * dy * dy / tau) * knorm;
      gy1[j] = -(dy / tau) * gy[j];
      fx[j] += gx[j];
      fx1[j] += gx1[j];
      fy[j] += gy[j];
      fy1[j] += gy1[j];
    }
    for (int j = 0; j < grid_n; ++j) {
      const double gxj = gx[j], gx1j = gx1[j];
      double* prow = P.data() + static_cast<std::size_t>(j) * grid_n;
      double* p1row = P1.data() + static_cast<std::size_t>(j) * grid_n;
      double* p2row = P2.data() + static_cast<std::size_t>(j) * grid_n;
      for (int k = 0; k < grid_n; ++k) {
        prow[k] += gxj * gy[k];
        p1row[k] += gx1j * gy[k];
        p2row[k] += gxj * gy1[k];
      }
    }
  }
  const double invn = 1.0 / static_cast<double>(n);
  for (auto& v : P) v *= invn;
  for (auto& v : P1) v *= invn;
  for (auto& v : P2) v *= invn;
  for (int j = 0; j < grid_n; ++j) {
    fx[j] *= invn;
    fx1[j] *= invn;
    fy[j] *= invn;
    fy1[j] *= invn;
  }

  int arg_p = 0, arg_p1 = 0, arg_p2 = 0;
  audit.xi_min = 1e308;
  for (int j = 0; j < grid_n; ++j)
    for (int k = 0; k < grid_n; ++k) {
      const std::size_t idx = static_cast<std::size_t>(j) * grid_n + k;
      const double dp = std::abs(P[idx] - fx[j] * fy[k]);
      const double dp1 = std::abs(P1[idx] - fx1[j] * fy[k]);
      const double dp2 = std::abs(P2[idx] - fx[j] * fy1[k]);
      if (dp > audit.worst_p) {
        audit.worst_p = dp;
        arg_p = static_cast<int>(idx);
      }
      if (dp1 > audit.worst_p1) {
        audit.worst_p1 = dp1;
        arg_p1 = static_cast<int>(idx);
      }
      if (dp2 > audit.worst_p2) {
        audit.worst_p2 = dp2;
        arg_p2 = static_cast<int>(idx);
      }
      const double ref = gauss_pdf(xg[j], 0.5 * tau) * gauss_pdf(yg[k], 0.5 * tau);
      audit.xi_min = std::min(audit.xi_min, P[idx] / ref);
    }
  audit.ratio_p = audit.bound_p > 0 ? audit.worst_p / audit.bound_p : 0;
  audit.ratio_p1 = audit.bound_p1 > 0 ? audit.worst_p1 / audit.bound_p1 : 0;
  audit.ratio_p2 = audit.bound_p2 > 0 ? audit.worst_p2 / audit.bound_p2 : 0;

  // Monte Carlo noise allowance for each ratio: influence-function SE of the
  // left side at its arg max plus the covariance SE propagated to the bound
  const double cov_se = [&] {
    std::vector<double> sv(joint.s_centers().begin(), joint.s_centers().end());
    std::vector<double> tv(joint.t_centers().begin(), joint.t_centers().end());
    return covariance_se(sv, tv);
  }();
  auto allowance = [&](int idx, int which, double bound) {
    const int j = idx / grid_n, k = idx % grid_n;
    Accum m2;
    const double fxv = which == 1 ? fx1[j] : fx[j];
    const double fyv = which == 2 ? fy1[k] : fy[k];
    const auto& pvec = which == 0 ? P : which == 1 ? P1 : P2;
    const double pv = pvec[static_cast<std::size_t>(idx)];
    for (long i = 0; i < n; ++i) {
      const double dx = xg[j] - joint.s_centers()[i];
      const double dy = yg[k] - joint.t_centers()[i];
      double u = std::exp(-0.5 * dx * dx / tau) * knorm;
      double v = std::exp(-0.5 * dy * dy / tau) * knorm;
      if (which == 1) u *= -(dx / tau);
      if (which == 2) v *= -(dy / tau);
      const double psi = u * v - fyv * u - fxv * v - (pv - fxv * fyv - fxv * fyv);
      m2.add(psi * psi);
    }
    const double se_lhs = std::sqrt(std::max(0.0, m2.value())) / static_cast<double>(n);
    const double se_rhs = cov > 0 ? (bound / cov) * cov_se : cov_se;
    return bound > 0 ? 3.0 * (se_lhs + se_rhs) / bound : 0.0;
  };
  audit.noise_p = allowance(arg_p, 0, audit.bound_p);
  audit.noise_p1 = allowance(arg_p1, 1, audit.bound_p1);
  audit.noise_p2 = allowance(arg_p2, 2, audit.bound_p2);

  // in-box M-term bound through the explicit f2 chain
  audit.f2 = assemble_f2(tau, k_bound, audit.f1_x, audit.f1_sum);
  audit.m_term_bound = audit.f2 * (a + b) * std::pow(b_region, 4.0) * cov;
  {
    const auto plain = joint.plain_sum_model();
    const int m = 128;
    const auto& rule = gauss_legendre(m);
    Accum acc;
    const bool interp = n > 20000;
    std::vector<double> zg;
    std::vector<double> zs;
    if (interp) {
      const int fine = 4096;
      zg.resize(fine + 1);
      zs.resize(fine + 1);
      for (int q = 0; q <= fine; ++q) {
        zg[q] = -2 * lim + 4 * lim * q / fine;
        zs[q] = plain.score(zg[q]);
      }
    }
    for (int j = 0; j < m; ++j) {
      const double x = lim * rule[j].x;
      const double wx = lim * rule[j].w;
      const auto mx = joint.marginal_x().eval(x);
      for (int k = 0; k < m; ++k) {
        const double y = lim * rule[k].x;
        const double wy = lim * rule[k].w;
        const auto ev = joint.eval(x, y);
        const auto my = joint.marginal_y().eval(y);
        double rw;
        if (interp) {
          const double z = x + y;
          const double pos = (z - zg.front()) / (zg.back() - zg.front()) * (zg.size() - 1);
          const std::size_t q = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, pos)),
                                                      zg.size() - 2);
          const double frac = pos - static_cast<double>(q);
          rw = zs[q] * (1 - frac) + zs[q + 1] * frac;
        } else {
          rw = plain.score(x + y);
        }
        const double mm = a * (ev.rho1 - mx.score) + b * (ev.rho2 - my.score);
        acc.add(wx * wy * ev.p * mm * rw);
      }
    }
    audit.m_term_box = acc.value();
  }
  return audit;
}

namespace {

MomentAudit moment_audit_impl(const smoothing::SmoothedDensity& model,
                              const JointSmoothedDensity* joint, std::span<const double> ks,
                              std::span<const double> bs, double k_bound,
                              const QuadratureSpec& quad, int grid_n) {
  MomentAudit audit;
  const double tau = model.tau();
  audit.tau = tau;
  const auto two_tau = model.with_bandwidth(2.0 * tau);
  const double sd = std::sqrt(model.variance());
  const double glo = model.mean() - 10.0 * sd, ghi = model.mean() + 10.0 * sd;

  for (double k : ks) {
    if (k < 2 || std::fmod(k, 2.0) != 0.0)
      throw std::invalid_argument("moment_bound_audit: k must be an even integer >= 2");
    MomentAudit::PerK row;
    row.k = k;
    row.c_tau_k = c_tau_k(tau, k);
    row.worst_pointwise_ratio = 0;
    for (int i = 0; i < grid_n; ++i) {
      const double u = glo + (ghi - glo) * i / (grid_n - 1);
      const auto ev = model.eval(u);
      const double lhs = ev.f * std::pow(std::abs(ev.score), k);
      const double rhs = row.c_tau_k * two_tau.density(u);
      if (rhs > 0) row.worst_pointwise_ratio = std::max(row.worst_pointwise_ratio, lhs / rhs);
    }
    auto integrand = [&](double u) {
      const auto ev = model.eval(u);
      return ev.f > 0 ? ev.f * std::pow(std::abs(ev.score), k) : 0.0;
    };
    const QuadResult q = integrate(integrand, glo, ghi, quad.with_feature_scale(std::sqrt(tau)));
    row.moment = std::pow(q.value, 1.0 / k);
    row.moment_bound = std::sqrt(std::pow(2.0, 1.0 / k) * 2.0 * k / (tau * kE));
    audit.per_k.push_back(row);
  }

  for (double b : bs) {
    MomentAudit::PerB row;
    row.b = b;
    auto rho2 = [&](double u) {
      const double r = model.score(u);
      return r * r;
    };
    const double lim = b * std::sqrt(tau);
    row.integral = integrate(rho2, -lim, lim, quad.with_feature_scale(std::sqrt(tau))).value;
    row.bound = f1_scorebody(tau, k_bound) * b * b * b;
    audit.per_b.push_back(row);
  }

  if (joint) {
    // observed off-region decay of |E M_{1,1} rho~ 1(outside L_B)|
    const auto plain = joint->plain_sum_model();
    const double base_b = bs.empty() ? 2.0 : bs.front();
    auto m_rho_box = [&](double lim) {
      const int m = 96;
      const auto& rule = gauss_legendre(m);
      Accum acc;
      for (int j = 0; j < m; ++j) {
        const double x = lim * rule[j].x;
        const auto mx = joint->marginal_x().eval(x);
        for (int k2 = 0; k2 < m; ++k2) {
          const double y = lim * rule[k2].x;
          const auto ev = joint->eval(x, y);
          const auto my = joint->marginal_y().eval(y);
          const double mm = (ev.rho1 - mx.score) + (ev.rho2 - my.score);
          acc.add(lim * rule[j].w * lim * rule[k2].w * ev.p * mm * plain.score(x + y));
        }
      }
      return acc.value();
    };
    // full-window value as the B -> infinity reference
    const double full = m_rho_box(std::max({max_abs(joint->s_centers()),
                                            max_abs(joint->t_centers())}) +
                                  10.0 * std::sqrt(tau));
    for (double mult : {1.0, 1.4, 2.0, 2.8}) {
      const double b = base_b * mult;
      audit.off_b.push_back(b);
      audit.off_value.push_back(std::abs(full - m_rho_box(b * std::sqrt(tau))));
    }
    Accum sxx, sxy, sx, sy, cnt;
    for (std::size_t i = 0; i < audit.off_b.size(); ++i) {
      if (audit.off_value[i] <= 0) continue;
      const double lx = std::log(audit.off_b[i]), ly = std::log(audit.off_value[i]);
      sx.add(lx);
      sy.add(ly);
      sxx.add(lx * lx);
      sxy.add(lx * ly);
      cnt.add(1.0);
    }
    const double m = cnt.value();
    const double den = m * sxx.value() - sx.value() * sx.value();
    audit.off_exponent = (m >= 2 && den != 0)
                             ? -(m * sxy.value() - sx.value() * sy.value()) / den
                             : 0.0;
  }
  return audit;
}

}  // namespace

MomentAudit moment_bound_audit(const smoothing::SmoothedDensity& model, std::span<const double> ks,
                               std::span<const double> bs, double k_bound,
                               const QuadratureSpec& quad, int grid_n) {
  return moment_audit_impl(model, nullptr, ks, bs, k_bound, quad, grid_n);
}

MomentAudit moment_bound_audit(const JointSmoothedDensity& joint, std::span<const double> ks,
                               std::span<const double> bs, double k_bound,
                               const QuadratureSpec& quad, int grid_n) {
  return moment_audit_impl(joint.marginal_x(), &joint, ks, bs, k_bound, quad, grid_n);
}

ProductTermAudit product_term_audit(const JointSmoothedDensity& joint, double b_region,
                                    double k_bound, const Quad2DSpec& q2,
                                    const QuadratureSpec& q1) {
  if (b_region < 1.0) throw std::invalid_argument("product_term_audit: B must be >= 1");
  q2.validate();
  (void)q1;
  const double tau = joint.tau();
  ProductTermAudit audit;
  audit.b = b_region;

  // E rho_X rho_Y by the shared tensor rule (no sum-model scores needed)
  const long n = joint.size();
  const Axis ax = scaled_axis(joint.s_centers(), tau, q2.pad_sigmas, q2.nodes_per_axis);
  const Axis ay = scaled_axis(joint.t_centers(), tau, q2.pad_sigmas, q2.nodes_per_axis);
  const auto ex = kernel_table(ax, joint.s_centers(), tau);
  const auto ey = kernel_table(ay, joint.t_centers(), tau);
  std::vector<double> rho_x(ax.nodes.size()), rho_y(ay.nodes.size());
  for (std::size_t j = 0; j < ax.nodes.size(); ++j)
    rho_x[j] = joint.marginal_x().score(ax.nodes[j]);
  for (std::size_t k = 0; k < ay.nodes.size(); ++k)
    rho_y[k] = joint.marginal_y().score(ay.nodes[k]);
  const double pnorm = 1.0 / (static_cast<double>(n) * 2.0 * kPi * tau);
  Accum acc;
  for (std::size_t j = 0; j < ax.nodes.size(); ++j) {
    const double* exr = ex.data() + j * n;
    for (std::size_t k = 0; k < ay.nodes.size(); ++k) {
      const double* eyr = ey.data() + k * n;
      double s0 = 0;
      for (long i = 0; i < n; ++i) s0 += exr[i] * eyr[i];
      acc.add(ax.weights[j] * ay.weights[k] * s0 * pnorm * rho_x[j] * rho_y[k]);
    }
  }
  audit.product = acc.value();

  audit.f4 = f1_scorebody(tau, k_bound) / (kPi * kE * std::pow(tau, 1.5));
  audit.in_region_bound = audit.f4 * std::pow(b_region, 4.0) * std::max(0.0, joint.cov());
  audit.off_region_bound = off_region_bound(tau, k_bound, b_region, audit.holder_p);
  audit.f5_effective = audit.off_region_bound * b_region * b_region;
  audit.bound = audit.in_region_bound + audit.off_region_bound;
  audit.slack = audit.bound - audit.product;
  return audit;
}

}  // namespace fkglab::inequalities

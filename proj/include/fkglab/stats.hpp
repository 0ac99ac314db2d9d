#pragma once
// Small numeric helpers shared across modules: compensated sums, moment
// estimators, the standard normal, Gaussian partial moments.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace fkglab {

// Neumaier-compensated accumulator; summation order is fixed by the caller,
// which keeps parallel-free reductions bit-reproducible.
class Accum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double sum(std::span<const double> xs) {
  Accum a;
  for (double x : xs) a.add(x);
  return a.value();
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty range");
  return sum(xs) / static_cast<double>(xs.size());
}

// ddof = 1 gives the unbiased sample variance, ddof = 0 the population form.
inline double variance(std::span<const double> xs, int ddof = 1) {
  const auto n = xs.size();
  if (n <= static_cast<std::size_t>(ddof)) throw std::invalid_argument("variance: too few values");
  const double m = mean(xs);
  Accum a;
  for (double x : xs) a.add((x - m) * (x - m));
  return a.value() / static_cast<double>(n - ddof);
}

inline double covariance(std::span<const double> xs, std::span<const double> ys, int ddof = 1) {
  if (xs.size() != ys.size()) throw std::invalid_argument("covariance: size mismatch");
  const auto n = xs.size();
  if (n <= static_cast<std::size_t>(ddof)) throw std::invalid_argument("covariance: too few values");
  const double mx = mean(xs), my = mean(ys);
  Accum a;
  for (std::size_t i = 0; i < n; ++i) a.add((xs[i] - mx) * (ys[i] - my));
  return a.value() / static_cast<double>(n - ddof);
}

// standard error of the sample covariance via the influence function
inline double covariance_se(std::span<const double> xs, std::span<const double> ys) {
  const auto n = xs.size();
  if (n < 2 || ys.size() != n) throw std::invalid_argument("covariance_se: bad input");
  const double mx = mean(xs), my = mean(ys);
  const double c = covariance(xs, ys, 1);
  Accum a;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (xs[i] - mx) * (ys[i] - my) - c;
    a.add(d * d);
  }
  return std::sqrt(a.value()) / static_cast<double>(n);
}

inline constexpr double kSqrt2Pi = 2.506628274631000502415765;
inline constexpr double kLog2Pi = 1.837877066409345483560659;

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }
inline double norm_sf(double x) { return 0.5 * std::erfc(x * 0.70710678118654752440); }

inline double gauss_pdf(double x, double var) {
  return std::exp(-0.5 * x * x / var) / (kSqrt2Pi * std::sqrt(var));
}

// Upper partial moments of the standard normal over [a, inf):
//   m0 = P(Z >= a), m1 = E Z 1{Z>=a}, m2 = E Z^2 1{Z>=a}
struct PartialMoments {
  double m0, m1, m2;
};
inline PartialMoments norm_upper_moments(double a) {
  const double q = norm_sf(a);
  const double p = norm_pdf(a);
  return {q, p, q + a * p};
}

// Integral of phi_tau(x - mu) (c0 + c1 x + c2 x^2) over the tail
// {x >= edge} (upper = true) or {x <= edge}.
inline double gauss_tail_quadratic(double mu, double tau, double edge, bool upper, double c0,
                                   double c1, double c2) {
  const double sd = std::sqrt(tau);
  if (!upper) {  // reflect: x -> -x
    return gauss_tail_quadratic(-mu, tau, -edge, true, c0, -c1, c2);
  }
  const auto m = norm_upper_moments((edge - mu) / sd);
  const double ex0 = m.m0;
  const double ex1 = mu * m.m0 + sd * m.m1;
  const double ex2 = mu * mu * m.m0 + 2.0 * mu * sd * m.m1 + tau * m.m2;
  return c0 * ex0 + c1 * ex1 + c2 * ex2;
}

// inverse standard normal CDF by bisection (monotone, fully deterministic)
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("norm_quantile: p outside (0,1)");
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (norm_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Wilson-Hilferty approximation to the upper chi-square quantile; good to a
// fraction of a percent for the dof used in the sampler exactness tests.
inline double chi2_quantile_upper(double alpha, double dof) {
  const double z = norm_quantile(1.0 - alpha);
  const double c = 2.0 / (9.0 * dof);
  const double t = 1.0 - c + z * std::sqrt(c);
  return dof * t * t * t;
}

}  // namespace fkglab

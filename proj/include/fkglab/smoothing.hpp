#pragma once
// Gaussian-smoothed empirical measures as exact mixtures: density, score,
// Fisher information, analytic tail profiles.

#include <span>
#include <vector>

#include "fkglab/quadrature.hpp"

namespace fkglab::smoothing {

// Equal-weight Gaussian mixture sum_i phi_tau(u - s_i)/N with bandwidth tau
// in variance units. Immutable; model variance is exactly
// center variance (population) + tau.
class SmoothedDensity {
 public:
  SmoothedDensity(std::vector<double> centers, double tau);

  double tau() const { return tau_; }
  const std::vector<double>& centers() const { return centers_; }
  double mean() const { return mean_; }
  double center_variance() const { return cvar_; }
  double variance() const { return cvar_ + tau_; }

  double density(double u) const;
  double log_density(double u) const;

  struct Eval {
    double f, fprime, score;
  };
  // score evaluated through shifted-exponent responsibilities; finite for all
  // finite u even where f underflows
  Eval eval(double u) const;
  double score(double u) const;

  SmoothedDensity rescaled(double c) const;        // law of c U
  SmoothedDensity shifted(double a) const;         // law of U + a
  SmoothedDensity standardized() const;            // (U - mean)/sd, unit variance
  SmoothedDensity with_bandwidth(double tau) const;  // same centers, new bandwidth

 private:
  std::vector<double> centers_;
  double tau_;
  double mean_, cvar_;
};

struct FisherResult {
  double j = 0;      // E rho^2
  double j_st = 0;   // sigma^2 J - 1
  double error = 0;  // quadrature error estimate + analytic tail bound
  long evals = 0;
};

// J by quadrature over [mean - w sigma, mean + w sigma] with an analytic
// Gaussian bound on the discarded tails. Enforces J <= 1/tau and J_st >= 0
// up to the reported error; violations raise QuadratureError.
FisherResult fisher(const SmoothedDensity& model, const QuadratureSpec& quad);

struct TailProfile {
  std::vector<double> radius;  // R values
  std::vector<double> value;   // E X^2 1{|X| >= R sigma} / sigma^2, X centered
  double envelope_exponent = 0;  // least-squares slope of -log(value) vs R^2/2
};

// analytic per-component Gaussian partial moments; no quadrature
TailProfile tail_profile(const SmoothedDensity& model, std::span<const double> r_grid);

SmoothedDensity smooth(std::span<const double> draws, double tau);

}  // namespace fkglab::smoothing

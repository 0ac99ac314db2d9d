#pragma once
// Gauss-Legendre / Gauss-Hermite rules and a deterministic adaptive
// bisection integrator with an absolute-tolerance contract.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fkglab {

struct QuadratureError : std::runtime_error {
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureSpec {
  enum class Rule { fixed, adaptive };
  Rule rule = Rule::adaptive;
  int nodes = 512;                // total-node budget (fixed) / panel-order basis (adaptive)
  double half_width_sigmas = 12;  // integration window half-width in units of sigma
  double abs_tol = 1e-10;
  // Adaptive bisection only sees what its panel rules sample: narrow mixture
  // components can hide inside a wide first panel. Callers set this to the
  // integrand's feature scale (e.g. sqrt(tau)) so the initial split cannot
  // step over a component.
  double feature_scale = 0;  // 0: no initial split beyond the default
  void validate() const {
    if (nodes < 64) throw std::invalid_argument("QuadratureSpec: node count must be >= 64");
    if (half_width_sigmas < 8) throw std::invalid_argument("QuadratureSpec: half-width must be >= 8 sigma");
    if (abs_tol <= 0) throw std::invalid_argument("QuadratureSpec: tolerance must be positive");
  }
  QuadratureSpec with_feature_scale(double s) const {
    QuadratureSpec q = *this;
    q.feature_scale = s;
    return q;
  }
};

struct QuadResult {
  double value = 0;
  double error = 0;  // internal error estimate (not including analytic tail bounds)
  long evals = 0;
  bool converged = true;
};

struct QuadNode {
  double x, w;
};

// nodes/weights on [-1, 1], cached per order
const std::vector<QuadNode>& gauss_legendre(int n);

// probabilists' Gauss-Hermite: expectation weights for N(0,1) (weights sum to 1)
const std::vector<QuadNode>& gauss_hermite(int n);

// Integrate f over [a, b] with the supplied QuadratureSpec (fixed composite rule or
// adaptive bisection). Throws QuadratureError if the adaptive rule cannot
// reach the requested tolerance within its depth budget.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadratureSpec& spec);

}  // namespace fkglab

#pragma once
// Bivariate score calculus on paired Gaussian mixtures: joint scores, the
// M-function, the additivity-gap functional, the Fisher-decomposition
// identity, the affine-distance seminorm, and numerical audits of the
// covariance-controlled bounds.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fkglab/quadrature.hpp"
#include "fkglab/smoothing.hpp"

namespace fkglab::inequalities {

struct Quad2DSpec {
  int nodes_per_axis = 256;
  double pad_sigmas = 10.0;          // window = center range +- pad sqrt(tau) per axis
  long mc_center_threshold = 20000;  // tensor rule below this many centers
  long mc_draws = 200000;
  std::uint64_t mc_seed = 20240914;
  void validate() const;
};

// Equal-weight bivariate mixture sum_i phi_tau(x - s_i) phi_tau(y - t_i)/N.
// Both coordinates share the bandwidth, so for any beta in [0,1] the weighted
// sum sqrt(beta) X + sqrt(1-beta) Y is again an exact mixture at bandwidth tau.
class JointSmoothedDensity {
 public:
  JointSmoothedDensity(std::vector<double> s, std::vector<double> t, double tau);

  double tau() const { return tau_; }
  long size() const { return static_cast<long>(s_.size()); }
  const std::vector<double>& s_centers() const { return s_; }
  const std::vector<double>& t_centers() const { return t_; }
  const smoothing::SmoothedDensity& marginal_x() const { return margx_; }
  const smoothing::SmoothedDensity& marginal_y() const { return margy_; }
  double cov() const { return cov_; }  // exact (population) center covariance

  struct Eval {
    double p, p1, p2;        // density and partial derivatives
    double rho1, rho2;       // joint scores, responsibility-stabilized
  };
  Eval eval(double x, double y) const;

  smoothing::SmoothedDensity sum_model(double beta) const;  // sqrt(b) X + sqrt(1-b) Y
  smoothing::SmoothedDensity plain_sum_model() const;       // X + Y, bandwidth 2 tau
  JointSmoothedDensity shuffled(std::uint64_t seed) const;  // t-centers permuted

 private:
  std::vector<double> s_, t_;
  double tau_;
  smoothing::SmoothedDensity margx_, margy_;
  double cov_;
};

struct MFunction {
  double direct;         // a (rho1 - rho_X) + b (rho2 - rho_Y)
  double density_route;  // rearranged density-difference form
};
MFunction m_function(const JointSmoothedDensity& joint, double a, double b, double x, double y);

// max over the grid of |direct sum-model score - conditional-expectation form|
double score_of_sum_residual(const JointSmoothedDensity& joint, double beta,
                             std::span<const double> z_grid, const QuadratureSpec& quad);

// Everything the decomposition identity needs, from one shared sweep.
struct FunctionalSet {
  double j_x = 0, j_y = 0, j_sum = 0;
  double j_err = 0;          // summed 1-D Fisher error estimates
  double cross = 0;          // E rho_X(X) rho_Y(Y)
  double m_term = 0;         // E M_{sqrt(b), sqrt(1-b)}(X,Y) rho~(sum)
  double delta = 0;          // E (sqrt(b) rho_X + sqrt(1-b) rho_Y - rho~)^2
  double residual = 0;       // | lhs - delta | for the identity below
  double tail_bound = 0;     // analytic bound on mass outside the 2-D window
  bool used_mc = false;
  double mc_se_cross = 0, mc_se_m = 0, mc_se_delta = 0;
};
// identity: b J(X) + (1-b) J(Y) - J(sum) + 2 sqrt(b(1-b)) cross + 2 m_term = delta
FunctionalSet decomposition(const JointSmoothedDensity& joint, double beta, const Quad2DSpec& q2,
                            const QuadratureSpec& q1);

double delta(const JointSmoothedDensity& joint, double beta, const Quad2DSpec& q2,
             const QuadratureSpec& q1);
double decomposition_residual(const JointSmoothedDensity& joint, double beta, const Quad2DSpec& q2,
                           const QuadratureSpec& q1);

enum class ExponentMode { fixed_third, moment };

struct DecompositionReport {
  double beta = 0;
  FunctionalSet functionals;
  double cov_st = 0;
  double exponent = 0;       // 1/3 - eps, or (2+delta)/(6+delta) - eps
  double min_c = 0;          // minimal C with slack(C) >= 0
  double b_tradeoff = 0;     // (K / Cov)^(1/6)
  bool b_exceeds_one = true; // flagged when B <= 1 (score-body integral bound needs B > 1)
  bool correction_skipped = false;  // Cov below floor: independent case asserted
  double k_bound = 0;
  std::vector<double> k_list;
  std::vector<double> c_tau_k;       // sqrt(2) (2k/(tau e))^(k/2)
  double f1 = 0, f2 = 0, f4 = 0, f5 = 0;  // assembled constant chains at B
};

DecompositionReport subadditivity_gap(const JointSmoothedDensity& joint, double beta, double eps,
                                double k_bound, ExponentMode mode, double moment_delta,
                                const Quad2DSpec& q2, const QuadratureSpec& q1);

struct ThetaSeminorm {
  double reference_tau = 0;  // tau/2
  double raw_second_moment = 0;
  double a = 0, b = 0;       // best affine coefficients
  double residual = 0;       // E (f(Z) - aZ - b)^2, Z ~ N(0, tau/2)
};
ThetaSeminorm theta_seminorm(const std::function<double(double)>& f, double tau,
                             int hermite_nodes = 64);

double c_tau_k(double tau, double k);
double f1_scorebody(double tau, double k_bound);  // 8 (3 + 2K/tau) / (sqrt(tau) e)

struct FactorizationAudit {
  double b = 0;
  double cov_st = 0;
  // density-difference bounds on the L_B grid
  double bound_p = 0, bound_p1 = 0, bound_p2 = 0;     // right-hand sides
  double worst_p = 0, worst_p1 = 0, worst_p2 = 0;     // max |lhs|
  double ratio_p = 0, ratio_p1 = 0, ratio_p2 = 0;
  double noise_p = 0, noise_p1 = 0, noise_p2 = 0;     // 3 SE allowances on the ratios
  double xi_min = 0;  // min p / (phi_{tau/2}(x) phi_{tau/2}(y)) over the grid
  // M-term bound: E M rho~ 1(L_B) <= f2 (a+b) B^4 Cov
  double m_term_box = 0;
  double m_term_bound = 0;
  double f1_x = 0, f1_sum = 0, f2 = 0;
  double a = 1, b_weight = 1;
};
FactorizationAudit factorization_bounds(const JointSmoothedDensity& joint, double b_region,
                                        double k_bound, double a = 1.0, double b = 1.0,
                                        int grid_n = 200);

struct MomentAudit {
  double tau = 0;
  struct PerK {
    double k;
    double c_tau_k;
    double worst_pointwise_ratio;  // max over grid of p |rho|^k / (c p_2tau)
    double moment;                 // (E |rho|^k)^(1/k)
    double moment_bound;           // sqrt(2^{1/k} 2k/(tau e))
  };
  std::vector<PerK> per_k;
  struct PerB {
    double b;
    double integral;  // int_{-B sqrt(tau)}^{B sqrt(tau)} rho^2
    double bound;     // (8 B^3/(sqrt(tau) e)) (3 + 2K/tau)
  };
  std::vector<PerB> per_b;
  // off-region decay (joint variant only): |E M_{1,1} rho~ 1(outside L_B)|
  std::vector<double> off_b, off_value;
  double off_exponent = 0;  // fitted decay exponent
};
MomentAudit moment_bound_audit(const smoothing::SmoothedDensity& model, std::span<const double> ks,
                               std::span<const double> bs, double k_bound,
                               const QuadratureSpec& quad, int grid_n = 1000);
MomentAudit moment_bound_audit(const JointSmoothedDensity& joint, std::span<const double> ks,
                               std::span<const double> bs, double k_bound,
                               const QuadratureSpec& quad, int grid_n = 1000);

struct ProductTermAudit {
  double b = 0;
  double product = 0;        // E rho_X(X) rho_Y(Y)
  double f4 = 0;             // f1/(pi e tau^{3/2})
  double in_region_bound = 0;   // f4 B^4 Cov
  double f5_effective = 0;      // off_bound * B^2
  double off_region_bound = 0;  // Hoelder/moment chain, minimized over exponents
  double holder_p = 0;          // exponent achieving the minimum
  double bound = 0;
  double slack = 0;
};
ProductTermAudit product_term_audit(const JointSmoothedDensity& joint, double b_region,
                                    double k_bound, const Quad2DSpec& q2,
                                    const QuadratureSpec& q1);

}  // namespace fkglab::inequalities

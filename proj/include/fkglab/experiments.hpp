#pragma once
// End-to-end convergence sweeps over growing boxes and the sub-additive
// recursion audit; config parsing and CSV/JSON report emission.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fkglab/infotheory.hpp"
#include "fkglab/inequalities.hpp"
#include "fkglab/lattice.hpp"
#include "fkglab/quadrature.hpp"

namespace fkglab::experiments {

struct ExperimentConfig {
  lattice::ModelSpec model;
  std::vector<long> extents_2d{32, 32};   // lattice for 2-D sweeps (1-D sizes set their own)
  double tau = 1.0;
  std::vector<long> sizes{1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  long samples_per_size = 10000;
  std::uint64_t seed = 1;
  QuadratureSpec quad;
  infotheory::DeBruijnSpec debruijn;      // tau_min is replaced by the model tau in sweeps
  inequalities::Quad2DSpec quad2d;
  int kappa_points = 8;                   // tau-grid subset carried into the kappa table
  int batch_groups = 16;                  // batch-mean groups for J_st standard errors
  long cov_radius = 32;                   // susceptibility estimation radius
  std::string out_dir = ".";
  bool timings = false;                   // wall-clock runtime columns (off keeps output bit-stable)
  bool dump_samples = true;               // per-size samples_n<k>.csv for standalone reruns
  std::vector<std::pair<long, long>> audit_pairs{{1, 1}, {2, 2}, {4, 4}, {8, 8},
                                                 {16, 16}, {32, 32}, {64, 64}};
  double audit_eps = 0.05;
  void validate_sweep() const;
  void validate_audit() const;
};

// flat key=value text (namespaced keys), overridable; unknown keys rejected
ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv);
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

struct SizeRecord {
  long n = 0;
  std::string shape;            // realized box (e.g. "16" or "4x8")
  double j_st = 0, j_st_se = 0;
  double d_direct = 0;
  double d_debruijn = 0;
  double d_lo = 0, d_hi = 0;    // de Bruijn estimate +- combined certificate
  double d_certificate = 0;
  double tv = 0, sup = 0;
  double tv_bound = 0, sup_bound = 0;
  double tail_r3 = 0;           // tail profile at R = 3
  double tail_envelope = 0;
  double sigma2 = 0;
  long runtime_ms = 0;
  std::vector<double> grid_j_st;  // J_st along the de Bruijn tau-grid
  std::vector<double> draws;      // the standardized box sums behind the record
};

struct SweepReport {
  std::vector<SizeRecord> records;
  std::vector<double> kappa_taus;
  std::vector<std::vector<double>> kappa;       // [size index][tau index], running sup over larger sizes
  std::vector<double> condition3_partial;       // per size: int kappa/(1+tau) over the grid
  double condition3_tail = 0;                   // certified bound beyond T_max
  double susceptibility = 0;
  double susceptibility_se = 0;
  bool jst_nonincreasing = true;                // within 2 SE
  bool d_nonincreasing = true;                  // within interval overlap
  bool kappa_monotone = true;
  std::vector<double> debruijn_taus;
};

SweepReport run_sweep(const ExperimentConfig& config);
void write_sweep_outputs(const SweepReport& report, const ExperimentConfig& config);

struct AuditRecord {
  long m = 0, n = 0;
  double beta = 0;
  double jst_m = 0, jst_n = 0, jst_sum = 0;
  double weighted_rhs = 0;      // (m Jst(m) + n Jst(n)) / (m+n)
  double delta = 0;
  double d_emp = 0;             // Jst(sum) - weighted + delta
  double d_emp_se = 0;          // batch-group spread
  double c_mn = 0, c_mn_se = 0; // Cov(U_y, U~_z)
  double min_c = 0;
  double b_tradeoff = 0;
  double residual = 0;
};

struct AuditSweepReport {
  std::vector<AuditRecord> records;
  std::vector<double> ladder_gaps;  // d_emp along the (2^k, 2^k) ladder, descriptive
  bool d_decreasing = true;         // within 2 SE
};

AuditSweepReport run_audit(const ExperimentConfig& config);
void write_audit_outputs(const AuditSweepReport& report, const ExperimentConfig& config);

}  // namespace fkglab::experiments

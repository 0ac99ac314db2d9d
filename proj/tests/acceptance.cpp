// Acceptance suite: one pass/fail line per criterion, each pinned to its
// stated tolerance and runtime budget. Run as: acceptance [path-to-cli]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fkglab/experiments.hpp"
#include "fkglab/infotheory.hpp"
#include "fkglab/inequalities.hpp"
#include "fkglab/io.hpp"
#include "fkglab/lattice.hpp"
#include "fkglab/rng.hpp"
#include "fkglab/smoothing.hpp"
#include "fkglab/stats.hpp"

using namespace fkglab;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++g_failures;
    g_notes.push_back(what);
    std::printf("    FAILED: %s\n", what.c_str());
  }
}

struct Criterion {
  int id;
  const char* label;
  double budget_s;
  std::function<void()> body;
};

QuadratureSpec quad() {
  QuadratureSpec q;
  return q;
}

inequalities::JointSmoothedDensity seeded_joint(std::uint64_t seed, long max_centers = 200) {
  Rng rng(seed);
  const long n = 60 + static_cast<long>(rng.below(max_centers - 60 + 1));
  const double tau = 0.6 + 0.9 * rng.uniform();
  const double corr = 0.5 * rng.uniform();
  std::vector<double> s(n), t(n);
  for (long i = 0; i < n; ++i) {
    const double a = rng.normal(), b = rng.normal();
    s[i] = 1.1 * a;
    t[i] = 1.1 * (corr * a + std::sqrt(1 - corr * corr) * b);
  }
  return inequalities::JointSmoothedDensity(s, t, tau);
}

// ---------------------------------------------------------------- criterion 1
void gaussian_null() {
  smoothing::SmoothedDensity g({0.0}, 1.0);
  const auto fr = smoothing::fisher(g, quad());
  expect(std::abs(fr.j - 1.0) <= 1e-8, "J(N(0,1)) = 1 within 1e-8");
  expect(fr.j_st <= 1e-8 && fr.j_st >= -1e-8, "J_st(N(0,1)) <= 1e-8");
  const auto de = infotheory::relative_entropy_direct(g, quad());
  expect(std::abs(de.d) <= 1e-8, "D(N(0,1) || phi) <= 1e-8");
}

// ---------------------------------------------------------------- criterion 2
void debruijn_route_agreement() {
  const std::vector<double> draws{-1.0, 1.0};
  infotheory::DeBruijnSpec spec;  // tau_min 1e-4, T_max 1e3, 200 points
  const auto db = infotheory::relative_entropy_debruijn(draws, spec, quad());
  const auto model = smoothing::SmoothedDensity(draws, spec.tau_min).standardized();
  const auto direct = infotheory::relative_entropy_direct(model, quad());
  std::printf("    D_direct = %.6f, D_debruijn = %.6f, certificate = %.6f\n", direct.d, db.d,
              db.combined_certificate);
  expect(std::abs(direct.d - db.d) <= db.combined_certificate,
         "|D_direct - D_debruijn| within the combined certificate");
  expect(db.combined_certificate <= 5e-3, "combined certificate <= 5e-3");
}

// ---------------------------------------------------------------- criterion 3
void decomposition_identity() {
  inequalities::Quad2DSpec q2;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto joint = seeded_joint(seed);
    for (double beta : {0.25, 0.5, 0.75}) {
      const auto f = inequalities::decomposition(joint, beta, q2, quad());
      expect(f.residual <= 1e-5, "identity residual <= 1e-5 (seed " + std::to_string(seed) +
                                     ", beta " + std::to_string(beta) + ")");
    }
  }
}

// ---------------------------------------------------------------- criterion 4
void independent_subadditivity() {
  inequalities::Quad2DSpec q2;
  q2.nodes_per_axis = 128;
  const double beta = 0.5;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto joint = seeded_joint(seed).shuffled(seed * 7 + 1);
    const auto frx = smoothing::fisher(joint.marginal_x(), quad());
    const auto fry = smoothing::fisher(joint.marginal_y(), quad());
    const auto frw = smoothing::fisher(joint.sum_model(beta), quad());
    // reshuffle spread measures the Monte Carlo scale of J(sum) under pairing noise
    std::vector<double> jsums;
    for (std::uint64_t r = 1; r <= 16; ++r)
      jsums.push_back(
          smoothing::fisher(joint.shuffled(seed * 131 + r).sum_model(beta), quad()).j);
    const double se = std::sqrt(variance(jsums, 1)) + frx.error + fry.error + frw.error;
    expect(frw.j <= beta * frx.j + (1 - beta) * fry.j + 3 * se,
           "J(sum) <= beta J(X) + (1-beta) J(Y) + 3 SE (seed " + std::to_string(seed) + ")");
    const double d = inequalities::delta(joint, beta, q2, quad());
    expect(d >= -1e-10, "Delta >= -1e-10 (seed " + std::to_string(seed) + ")");
  }
}

// ---------------------------------------------------------------- criterion 5
void shimizu_bounds() {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed * 977 + 3);
    const int n = 1 + static_cast<int>(rng.below(30));
    std::vector<double> centers(n);
    for (auto& c : centers) c = 2.0 * rng.normal();
    const double tau = 0.1 + 3.9 * rng.uniform();
    const auto m = smoothing::SmoothedDensity(centers, tau).standardized();
    const auto gd = infotheory::gaussian_distances(m, quad());
    expect(gd.tv_slack >= -1e-9, "TV <= 4 sqrt(3) sqrt(J_st), seed " + std::to_string(seed));
    expect(gd.sup_slack >= -1e-9,
           "sup <= (1 + sqrt(6/pi)) sqrt(J_st), seed " + std::to_string(seed));
  }
}

// ---------------------------------------------------------------- criterion 6
void moment_tail_bounds() {
  const double ks[2] = {2.0, 4.0};
  const double bs[3] = {1.5, 2.0, 4.0};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 553 + 11);
    const int n = 1 + static_cast<int>(rng.below(40));
    std::vector<double> centers(n);
    for (auto& c : centers) c = 1.5 * rng.normal();
    const double cm = n > 0 ? mean(centers) : 0.0;
    for (auto& c : centers) c -= cm;  // score-body integral bound assumes mean-zero inputs
    const double tau = 0.3 + 2.7 * rng.uniform();
    smoothing::SmoothedDensity model(centers, tau);
    const double k_bound = std::max(model.center_variance(), 1e-6);
    const auto audit = inequalities::moment_bound_audit(model, ks, bs, k_bound, quad(), 1000);
    for (const auto& row : audit.per_k)
      expect(row.worst_pointwise_ratio <= 1.0 + 1e-9,
             "pointwise c_tau_k bound, seed " + std::to_string(seed) + ", k " +
                 std::to_string(static_cast<int>(row.k)));
    for (const auto& row : audit.per_b)
      expect(row.integral <= row.bound, "score-body integral bound, seed " +
                                            std::to_string(seed) + ", B " + std::to_string(row.b));
  }
}

// ---------------------------------------------------------------- criterion 7
void fkg_audits() {
  lattice::ModelSpec spec;
  spec.kind = lattice::ModelKind::ising1d;
  spec.coupling = 0.5;
  const long n = 100000;
  const auto samples = lattice::sample_system(spec, {16}, n, 20240907);
  const auto a = lattice::box_sums(samples, {{8}}, {0});
  const auto b = lattice::box_sums(samples, {{8}}, {8});
  const auto rep = lattice::quadrant_dependence(a.draws, b.draws, {41, 41});
  std::printf("    min H = %.3e (SE %.3e), Cov(S,T) = %.4f\n", rep.min_h, rep.se_at_min,
              rep.cov_st);
  expect(rep.min_h >= -3 * rep.se_at_min, "min H >= -3 SE on the evaluation grid");

  inequalities::JointSmoothedDensity joint(a.draws, b.draws, 1.0);
  const double k_bound = std::max(joint.marginal_x().center_variance(),
                                  joint.marginal_y().center_variance());
  const auto audit = inequalities::factorization_bounds(joint, 2.0, k_bound);
  std::printf("    density-bound ratios: %.3f, %.3f, %.3f (allowances %.3f, %.3f, %.3f)\n",
              audit.ratio_p, audit.ratio_p1, audit.ratio_p2, audit.noise_p, audit.noise_p1,
              audit.noise_p2);
  expect(audit.ratio_p <= 1.0 + audit.noise_p, "|p_XY - p_X p_Y| bound on the 200x200 grid");
  expect(audit.ratio_p1 <= 1.0 + audit.noise_p1, "|d1 p - p_X' p_Y| bound on the 200x200 grid");
  expect(audit.ratio_p2 <= 1.0 + audit.noise_p2, "|d2 p - p_X p_Y'| bound on the 200x200 grid");
}

// ---------------------------------------------------------------- criterion 8
void covariance_oracle() {
  lattice::ModelSpec spec;
  spec.kind = lattice::ModelKind::ising1d;
  spec.coupling = 0.5;
  const long n = 100000;
  const auto samples = lattice::sample_system(spec, {128}, n, 77);
  const auto prof = lattice::covariance_profile(samples, 32);
  const double t = std::tanh(0.5);
  for (const auto& oc : prof.covariances) {
    const long r = std::abs(oc.offset[0]);
    if (r > 8) continue;
    const double expectv = std::pow(t, r);
    // at lag 0 the estimator is a sample variance whose O(1/n) ddof bias can
    // exceed its own (vanishingly small) influence SE for +-1 data
    const double bias_allow = r == 0 ? 3.0 / n : 0.0;
    expect(std::abs(oc.cov - expectv) <= 3 * oc.se + bias_allow,
           "lag-" + std::to_string(r) + " covariance within 3 SE of tanh(1/2)^r");
  }
  const double v = (1 + t) / (1 - t);
  std::printf("    susceptibility estimate %.4f vs (1+t)/(1-t) = %.4f\n", prof.susceptibility, v);
  expect(std::abs(prof.susceptibility - v) <= 0.05 * v, "susceptibility within 5% at R = 32");
}

// ---------------------------------------------------------------- criterion 9
void convergence_sweep() {
  experiments::ExperimentConfig cfg;
  cfg.model.kind = lattice::ModelKind::ising1d;
  cfg.model.coupling = 0.5;
  cfg.tau = 1.0;
  cfg.sizes = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  cfg.samples_per_size = 10000;
  cfg.seed = 9;
  cfg.out_dir = "/tmp/fkglab_acceptance_sweep";
  const auto rep = experiments::run_sweep(cfg);
  experiments::write_sweep_outputs(rep, cfg);
  std::printf("    J_st: first %.4f -> last %.6f; D interval last [%.2e, %.2e]\n",
              rep.records.front().j_st, rep.records.back().j_st, rep.records.back().d_lo,
              rep.records.back().d_hi);
  expect(rep.jst_nonincreasing, "J_st(V_n) non-increasing within 2 SE across the schedule");
  expect(rep.records.back().j_st <= 0.05, "J_st(V_1024) <= 0.05");
  expect(rep.d_nonincreasing, "D intervals shrink along the schedule");
}

// --------------------------------------------------------------- criterion 10
std::string g_cli_path;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "<missing:" + path + ">";
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

void reproducibility() {
  namespace fs = std::filesystem;
  if (g_cli_path.empty()) {
    expect(false, "CLI path not supplied (pass it as argv[1])");
    return;
  }
  const std::string dir = "/tmp/fkglab_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::string cfg_path = dir + "/sweep.cfg";
  write_text_file(cfg_path,
                  "model.kind = ising1d\nmodel.J = 0.5\nsweep.sizes = 1,2,4\n"
                  "sweep.samples = 1000\nsweep.cov_radius = 4\ndebruijn.points = 8\n"
                  "debruijn.tmax = 50\nkappa.points = 3\nsweep.batch_groups = 4\nseed = 4\n");
  const std::string audit_cfg = dir + "/audit.cfg";
  write_text_file(audit_cfg,
                  "model.kind = ising1d\nmodel.J = 0.5\naudit.pairs = 2:2;4:4\n"
                  "sweep.samples = 1000\nquad2d.nodes = 96\nseed = 4\n");

  struct Step {
    std::string args;
    std::vector<std::string> outputs;
  };
  const std::vector<Step> steps{
      {"sample --kind ising1d --J 0.5 --extents 24 --count 200 --seed 5 --out " + dir + "/s.csv",
       {dir + "/s.csv", dir + "/s.csv.json"}},
      {"fisher --input " + dir + "/s1.csv --tau 1.0 --out " + dir + "/fisher.json",
       {dir + "/fisher.json"}},
      {"entropy --input " + dir + "/s1.csv --tau 0.01 --points 40 --out " + dir + "/entropy.json",
       {dir + "/entropy.json"}},
      {"verify --input " + dir + "/pairs.csv --tau 1.0 --beta 0.5 --nodes2d 96 --out " + dir +
           "/verify.json",
       {dir + "/verify.json"}},
      {"sweep --config " + cfg_path + " --set output.dir=" + dir + "/sweep_out",
       {dir + "/sweep_out/sweep.csv", dir + "/sweep_out/sweep.json"}},
      {"audit --config " + audit_cfg + " --set output.dir=" + dir + "/audit_out",
       {dir + "/audit_out/audit.csv", dir + "/audit_out/audit.json"}},
  };

  // inputs for fisher/entropy/verify
  {
    lattice::ModelSpec spec;
    spec.kind = lattice::ModelKind::ising1d;
    spec.coupling = 0.5;
    const auto samples = lattice::sample_system(spec, {16}, 400, 6);
    const auto set = lattice::box_sums(samples, {{16}});
    write_csv_column(dir + "/s1.csv", set.draws);
    const auto a = lattice::box_sums(samples, {{8}}, {0});
    const auto bx = lattice::box_sums(samples, {{8}}, {8});
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < a.draws.size(); ++i) rows.push_back({a.draws[i], bx.draws[i]});
    write_csv_rows(dir + "/pairs.csv", {"s", "t"}, rows);
  }

  for (const auto& step : steps) {
    expect(run_cli(step.args) == 0, "CLI run succeeds: " + step.args.substr(0, 40));
    std::vector<std::string> first;
    for (const auto& out : step.outputs) first.push_back(slurp(out));
    expect(run_cli(step.args) == 0, "CLI rerun succeeds: " + step.args.substr(0, 40));
    for (std::size_t i = 0; i < step.outputs.size(); ++i)
      expect(slurp(step.outputs[i]) == first[i],
             "bit-identical across two invocations: " + step.outputs[i]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];

  const std::vector<Criterion> criteria{
      {1, "Gaussian null: J = 1, J_st <= 1e-8, D <= 1e-8", 1.0, gaussian_null},
      {2, "de Bruijn route agreement within certificate <= 5e-3", 60.0, debruijn_route_agreement},
      {3, "decomposition identity residual <= 1e-5 (5 joints x 3 betas)", 120.0,
       decomposition_identity},
      {4, "independent sub-additivity after shuffling, Delta >= -1e-10", 600.0,
       independent_subadditivity},
      {5, "Shimizu bounds on 100 seeded mixtures", 600.0, shimizu_bounds},
      {6, "moment/score-body bounds on 20 corpus models", 600.0, moment_tail_bounds},
      {7, "FKG audits at N = 1e5: quadrant dependence + density bounds", 300.0, fkg_audits},
      {8, "covariance oracle: lags and susceptibility", 600.0, covariance_oracle},
      {9, "convergence sweep to n = 1024", 600.0, convergence_sweep},
      {10, "bit-identical CLI runs under fixed seed and config", 600.0, reproducibility},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const int before = g_failures;
    const auto t0 = std::chrono::steady_clock::now();
    c.body();
    const double secs =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
            .count() /
        1000.0;
    bool ok = g_failures == before;
    if (secs > c.budget_s) {
      ok = false;
      std::printf("    FAILED: runtime %.1f s exceeds the %.0f s budget\n", secs, c.budget_s);
    }
    if (!ok) ++failed;
    std::printf("[%s] criterion %2d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", c.id, c.label, secs);
    std::fflush(stdout);
  }
  if (failed) std::printf("%d criterion(s) failed\n", failed);
  return failed;
}

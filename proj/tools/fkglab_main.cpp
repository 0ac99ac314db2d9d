// Command-line front end: sampling, Fisher/entropy functionals, inequality
// audits, and the sweep/audit experiment drivers.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "fkglab/experiments.hpp"
#include "fkglab/infotheory.hpp"
#include "fkglab/inequalities.hpp"
#include "fkglab/io.hpp"
#include "fkglab/lattice.hpp"
#include "fkglab/smoothing.hpp"
#include "fkglab/stats.hpp"

namespace {

using namespace fkglab;

void emit(const Json& j, const std::string& out_path) {
  const std::string text = j.dump();
  if (out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text_file(out_path, text);
}

struct QuadFlags {
  std::string rule = "adaptive";
  int nodes = 512;
  double halfwidth = 12.0;
  double tol = 1e-10;
  QuadratureSpec spec() const {
    QuadratureSpec q;
    q.rule = rule == "fixed" ? QuadratureSpec::Rule::fixed : QuadratureSpec::Rule::adaptive;
    q.nodes = nodes;
    q.half_width_sigmas = halfwidth;
    q.abs_tol = tol;
    return q;
  }
  void attach(CLI::App* app) {
    app->add_option("--quad-rule", rule, "quadrature rule: adaptive|fixed");
    app->add_option("--quad-nodes", nodes, "node budget (>= 64)");
    app->add_option("--quad-halfwidth", halfwidth, "window half-width in sigmas (>= 8)");
    app->add_option("--quad-tol", tol, "absolute tolerance");
  }
};

int cmd_sample(const std::string& kind, double J, double h, const std::vector<long>& extents,
               long count, std::uint64_t seed, const std::string& boundary, long burnin,
               long sweeps_between, long chains, const std::string& out) {
  lattice::ModelSpec spec;
  if (kind == "independent") spec.kind = lattice::ModelKind::independent;
  else if (kind == "ising1d") spec.kind = lattice::ModelKind::ising1d;
  else if (kind == "ising2d") spec.kind = lattice::ModelKind::ising2d;
  else throw std::invalid_argument("unknown model kind: " + kind);
  spec.coupling = J;
  spec.field = h;
  spec.boundary = boundary == "free" ? lattice::Boundary::free : lattice::Boundary::periodic;
  spec.burn_in = burnin;
  spec.sweeps_between = sweeps_between;
  spec.chains = chains;

  const auto samples = lattice::sample_system(spec, extents, count, seed);
  std::vector<std::vector<double>> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(s.values);
  write_csv_rows(out, {}, rows);

  Json side = Json::object();
  side.set("kind", kind)
      .set("J", J)
      .set("h", h)
      .set("boundary", boundary)
      .set("burn_in", static_cast<long long>(burnin))
      .set("sweeps_between", static_cast<long long>(sweeps_between))
      .set("chains", static_cast<long long>(chains))
      .set("seed", static_cast<long long>(seed))
      .set("count", static_cast<long long>(count));
  Json ext = Json::array();
  for (long e : extents) ext.push(Json::integer(e));
  side.set("extents", std::move(ext));
  write_text_file(out + ".json", side.dump());
  return 0;
}

int cmd_fisher(const std::string& input, double tau, const QuadFlags& qf, const std::string& out) {
  const auto draws = read_csv_column(input);
  const auto model = smoothing::smooth(draws, tau);
  const auto fr = smoothing::fisher(model, qf.spec());
  Json j = Json::object();
  j.set("J", fr.j)
      .set("J_st", fr.j_st)
      .set("error", fr.error)
      .set("sigma2", model.variance())
      .set("N", static_cast<long long>(draws.size()));
  emit(j, out);
  return 0;
}

int cmd_entropy(const std::string& input, double tau, double tmax, int points,
                const std::string& route, const QuadFlags& qf, const std::string& out) {
  const auto raw = read_csv_column(input);
  const auto draws = infotheory::standardize_draws(raw);
  const auto quad = qf.spec();
  Json j = Json::object();
  j.set("N", static_cast<long long>(draws.size())).set("tau", tau).set("route", route);

  const auto model = smoothing::smooth(draws, tau).standardized();
  if (route == "direct" || route == "both") {
    const auto de = infotheory::relative_entropy_direct(model, quad);
    j.set("D_direct", de.d).set("D_direct_error", de.error);
  }
  if (route == "debruijn" || route == "both") {
    infotheory::DeBruijnSpec spec;
    spec.tau_min = tau;
    spec.t_max = tmax;
    spec.points = points;
    const auto db = infotheory::relative_entropy_debruijn(draws, spec, quad);
    j.set("D_debruijn", db.d)
        .set("tail_certificate", db.tail_certificate)
        .set("discretization_estimate", db.discretization_estimate)
        .set("quadrature_sum", db.quadrature_sum)
        .set("combined_certificate", db.combined_certificate)
        .set("head_tau", db.head_tau)
        .set("head_note",
             "the [0, head_tau) contribution is not estimated; the estimate targets the "
             "head_tau-smoothed model");
  }
  const auto gd = infotheory::gaussian_distances(model, quad);
  Json shim = Json::object();
  shim.set("TV", gd.tv)
      .set("sup", gd.sup)
      .set("J_st", gd.j_st)
      .set("TV_bound", gd.tv_bound)
      .set("sup_bound", gd.sup_bound)
      .set("TV_ok", gd.tv_ok)
      .set("sup_ok", gd.sup_ok);
  j.set("shimizu", std::move(shim));
  emit(j, out);
  return 0;
}

int cmd_verify(const std::string& input, double tau, double beta, double eps,
               const std::vector<double>& ks, double B, const std::vector<std::string>& audits,
               const QuadFlags& qf, int nodes2d, const std::string& out) {
  std::vector<double> s, t;
  read_paired_csv(input, s, t);
  inequalities::JointSmoothedDensity joint(s, t, tau);
  const auto quad = qf.spec();
  inequalities::Quad2DSpec q2;
  q2.nodes_per_axis = nodes2d;

  auto wants = [&](const std::string& name) {
    if (audits.empty()) return true;
    for (const auto& a : audits)
      if (a == name) return true;
    return false;
  };

  int exit_code = 0;
  Json j = Json::object();
  j.set("N", static_cast<long long>(s.size()))
      .set("tau", tau)
      .set("beta", beta)
      .set("cov_st", joint.cov());

  const double kb = std::max(joint.marginal_x().center_variance(),
                             joint.marginal_y().center_variance()) *
                    1.0001;

  if (wants("decomposition")) {
    const auto rep = inequalities::subadditivity_gap(joint, beta, eps, kb,
                                               inequalities::ExponentMode::fixed_third, 0, q2, quad);
    Json d = Json::object();
    d.set("J_X", rep.functionals.j_x)
        .set("J_Y", rep.functionals.j_y)
        .set("J_sum", rep.functionals.j_sum)
        .set("cross_term", rep.functionals.cross)
        .set("m_term", rep.functionals.m_term)
        .set("delta", rep.functionals.delta)
        .set("identity_residual", rep.functionals.residual)
        .set("min_C", rep.min_c)
        .set("exponent", rep.exponent)
        .set("B_tradeoff", rep.b_tradeoff)
        .set("B_exceeds_one", rep.b_exceeds_one)
        .set("correction_skipped", rep.correction_skipped)
        .set("f1", rep.f1)
        .set("f2", rep.f2)
        .set("f4", rep.f4)
        .set("f5", rep.f5);
    Json ctk = Json::array();
    for (double c : rep.c_tau_k) ctk.push(c);
    d.set("c_tau_k", std::move(ctk));
    j.set("decomposition", std::move(d));
    if (rep.functionals.residual > 1e-4) exit_code = 2;
    if (rep.functionals.delta < -1e-10) exit_code = 2;
  }
  if (wants("factorization")) {
    const auto fa = inequalities::factorization_bounds(joint, std::max(1.0, B), kb);
    Json d = Json::object();
    d.set("B", fa.b)
        .set("ratio_p", fa.ratio_p)
        .set("ratio_p1", fa.ratio_p1)
        .set("ratio_p2", fa.ratio_p2)
        .set("noise_p", fa.noise_p)
        .set("noise_p1", fa.noise_p1)
        .set("noise_p2", fa.noise_p2)
        .set("bound_p", fa.bound_p)
        .set("bound_p1", fa.bound_p1)
        .set("worst_p", fa.worst_p)
        .set("worst_p1", fa.worst_p1)
        .set("worst_p2", fa.worst_p2)
        .set("xi_min", fa.xi_min)
        .set("m_term_box", fa.m_term_box)
        .set("m_term_bound", fa.m_term_bound)
        .set("f2", fa.f2);
    j.set("factorization", std::move(d));
    if (fa.ratio_p > 1 + fa.noise_p || fa.ratio_p1 > 1 + fa.noise_p1 ||
        fa.ratio_p2 > 1 + fa.noise_p2)
      exit_code = 2;
    if (fa.m_term_box > fa.m_term_bound) exit_code = 2;
  }
  if (wants("moments")) {
    std::vector<double> bs{std::max(1.0, B)};
    const auto ma = inequalities::moment_bound_audit(joint, ks, bs, kb, quad);
    Json d = Json::object();
    Json per_k = Json::array();
    for (const auto& row : ma.per_k) {
      Json r = Json::object();
      r.set("k", row.k)
          .set("c_tau_k", row.c_tau_k)
          .set("worst_pointwise_ratio", row.worst_pointwise_ratio)
          .set("moment", row.moment)
          .set("moment_bound", row.moment_bound);
      per_k.push(std::move(r));
      if (row.worst_pointwise_ratio > 1.0 + 1e-9 || row.moment > row.moment_bound)
        exit_code = 2;
    }
    d.set("per_k", std::move(per_k));
    Json per_b = Json::array();
    for (const auto& row : ma.per_b) {
      Json r = Json::object();
      r.set("B", row.b).set("integral", row.integral).set("bound", row.bound);
      per_b.push(std::move(r));
      if (row.integral > row.bound) exit_code = 2;
    }
    d.set("per_b", std::move(per_b));
    Json offb = Json::array(), offv = Json::array();
    for (double v : ma.off_b) offb.push(v);
    for (double v : ma.off_value) offv.push(v);
    d.set("off_B", std::move(offb)).set("off_value", std::move(offv));
    d.set("off_exponent", ma.off_exponent);
    j.set("moments", std::move(d));
  }
  if (wants("product")) {
    const auto pa = inequalities::product_term_audit(joint, std::max(1.0, B), kb, q2, quad);
    Json d = Json::object();
    d.set("product", pa.product)
        .set("f4", pa.f4)
        .set("in_region_bound", pa.in_region_bound)
        .set("off_region_bound", pa.off_region_bound)
        .set("f5_effective", pa.f5_effective)
        .set("holder_p", pa.holder_p)
        .set("bound", pa.bound)
        .set("slack", pa.slack);
    j.set("product", std::move(d));
    if (pa.slack < 0) exit_code = 2;
  }
  if (wants("theta")) {
    const auto model = joint.sum_model(beta);
    const auto th =
        inequalities::theta_seminorm([&](double z) { return model.score(z); }, tau, 96);
    Json d = Json::object();
    d.set("reference_tau", th.reference_tau)
        .set("a", th.a)
        .set("b", th.b)
        .set("raw_second_moment", th.raw_second_moment)
        .set("residual", th.residual);
    j.set("theta", std::move(d));
  }
  j.set("exit_code", static_cast<long long>(exit_code));
  emit(j, out);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale information-theoretic CLT laboratory for FKG systems"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "draw lattice configurations to CSV");
  std::string kind = "independent", boundary = "periodic", out = "samples.csv";
  double J = 0, h = 0;
  std::vector<long> extents{64};
  long count = 1000, burnin = 1000, sweeps_between = 10, chains = 4;
  std::uint64_t seed = 1;
  sample->add_option("--kind", kind, "independent|ising1d|ising2d");
  sample->add_option("--J", J, "coupling (>= 0)");
  sample->add_option("--field", h, "external field h");
  sample->add_option("--extents", extents, "site counts per axis")->expected(1, 2);
  sample->add_option("--count", count, "number of configurations");
  sample->add_option("--seed", seed, "RNG seed");
  sample->add_option("--boundary", boundary, "periodic|free");
  sample->add_option("--burnin", burnin, "Gibbs burn-in sweeps");
  sample->add_option("--sweeps-between", sweeps_between, "Gibbs sweeps between samples");
  sample->add_option("--chains", chains, "Gibbs chains");
  sample->add_option("--out", out, "output CSV path (JSON sidecar written next to it)");

  // fisher
  auto* fisher = app.add_subcommand("fisher", "Fisher information of a smoothed sample set");
  std::string fin, fout;
  double ftau = 1.0;
  QuadFlags fq;
  fisher->add_option("--input", fin, "CSV of scalar samples")->required();
  fisher->add_option("--tau", ftau, "bandwidth (variance units)");
  fq.attach(fisher);
  fisher->add_option("--out", fout, "output JSON path (stdout if omitted)");

  // entropy
  auto* entropy = app.add_subcommand("entropy", "relative entropy to the standard normal");
  std::string ein, eout, route = "both";
  double etau = 1e-4, etmax = 1e3;
  int epoints = 200;
  QuadFlags eq;
  entropy->add_option("--input", ein, "CSV of scalar samples")->required();
  entropy->add_option("--tau", etau, "model bandwidth / grid start");
  entropy->add_option("--tmax", etmax, "grid end T_max");
  entropy->add_option("--points", epoints, "grid points");
  entropy->add_option("--route", route, "direct|debruijn|both");
  eq.attach(entropy);
  entropy->add_option("--out", eout, "output JSON path (stdout if omitted)");

  // verify
  auto* verify = app.add_subcommand("verify", "bivariate decomposition and bound audits");
  std::string vin, vout;
  double vtau = 1.0, vbeta = 0.5, veps = 0.05, vB = 2.0;
  std::vector<double> vks{2, 4};
  std::vector<std::string> vaudits;
  QuadFlags vq;
  int vnodes2d = 256;
  verify->add_option("--input", vin, "paired CSV (columns s,t)")->required();
  verify->add_option("--tau", vtau, "bandwidth");
  verify->add_option("--beta", vbeta, "mixing weight in [0,1]");
  verify->add_option("--eps", veps, "exponent epsilon in (0, 1/3)");
  verify->add_option("--k", vks, "even moment orders");
  verify->add_option("--B", vB, "region parameter (>= 1)");
  verify->add_option("--audits", vaudits,
                     "subset of decomposition,factorization,moments,product,theta (default all)");
  verify->add_option("--nodes2d", vnodes2d, "tensor nodes per axis");
  vq.attach(verify);
  verify->add_option("--out", vout, "output JSON path (stdout if omitted)");

  // sweep / audit
  auto* sweep = app.add_subcommand("sweep", "convergence sweep over growing boxes");
  auto* audit = app.add_subcommand("audit", "sub-additive recursion audit");
  std::string sweep_cfg, audit_cfg;
  std::vector<std::string> sweep_set, audit_set;
  sweep->add_option("--config", sweep_cfg, "key=value config file");
  sweep->add_option("--set", sweep_set, "override, e.g. --set sweep.samples=2000");
  audit->add_option("--config", audit_cfg, "key=value config file");
  audit->add_option("--set", audit_set, "override, e.g. --set audit.pairs=8:8;16:16");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed())
      return cmd_sample(kind, J, h, extents, count, seed, boundary, burnin, sweeps_between, chains,
                        out);
    if (fisher->parsed()) return cmd_fisher(fin, ftau, fq, fout);
    if (entropy->parsed()) return cmd_entropy(ein, etau, etmax, epoints, route, eq, eout);
    if (verify->parsed())
      return cmd_verify(vin, vtau, vbeta, veps, vks, vB, vaudits, vq, vnodes2d, vout);
    if (sweep->parsed()) {
      const auto cfg = fkglab::experiments::load_config(sweep_cfg, sweep_set);
      const auto rep = fkglab::experiments::run_sweep(cfg);
      fkglab::experiments::write_sweep_outputs(rep, cfg);
      std::printf("sweep: %zu sizes -> %s/sweep.{csv,json}\n", rep.records.size(),
                  cfg.out_dir.c_str());
      return 0;
    }
    if (audit->parsed()) {
      const auto cfg = fkglab::experiments::load_config(audit_cfg, audit_set);
      const auto rep = fkglab::experiments::run_audit(cfg);
      fkglab::experiments::write_audit_outputs(rep, cfg);
      std::printf("audit: %zu pairs -> %s/audit.{csv,json}\n", rep.records.size(),
                  cfg.out_dir.c_str());
      return 0;
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}

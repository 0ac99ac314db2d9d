#include "fkglab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "fkglab/io.hpp"
#include "fkglab/smoothing.hpp"
#include "fkglab/stats.hpp"

namespace fkglab::experiments {

namespace {

long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<long> parse_long_list(const std::string& s, char sep = ',') {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.empty()) continue;
    out.push_back(std::stol(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate_sweep() const {
  model.validate();
  if (!(tau > 0)) throw std::invalid_argument("config: tau must be positive");
  if (sizes.empty()) throw std::invalid_argument("config: empty size schedule");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1])
      throw std::invalid_argument("config: size schedule must be strictly increasing");
  if (samples_per_size < 1000)
    throw std::invalid_argument("config: convergence sweeps need at least 10^3 samples per size");
  quad.validate();
  if (batch_groups < 2) throw std::invalid_argument("config: need >= 2 batch groups");
}

void ExperimentConfig::validate_audit() const {
  model.validate();
  if (!(tau > 0)) throw std::invalid_argument("config: tau must be positive");
  if (audit_pairs.empty()) throw std::invalid_argument("config: no audit pairs");
  for (auto [m, n] : audit_pairs)
    if (m < n || n < 1) throw std::invalid_argument("config: audit pairs need m >= n >= 1");
  quad.validate();
}

ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv) {
  ExperimentConfig c;
  if (const char* env = std::getenv("FKGLAB_OUTDIR")) c.out_dir = env;
  for (const auto& [key, val] : kv) {
    if (key == "model.kind") {
      if (val == "independent") c.model.kind = lattice::ModelKind::independent;
      else if (val == "ising1d") c.model.kind = lattice::ModelKind::ising1d;
      else if (val == "ising2d") c.model.kind = lattice::ModelKind::ising2d;
      else throw std::invalid_argument("config: unknown model.kind " + val);
    } else if (key == "model.J") c.model.coupling = std::stod(val);
    else if (key == "model.h") c.model.field = std::stod(val);
    else if (key == "model.boundary") {
      if (val == "periodic") c.model.boundary = lattice::Boundary::periodic;
      else if (val == "free") c.model.boundary = lattice::Boundary::free;
      else throw std::invalid_argument("config: unknown model.boundary " + val);
    } else if (key == "model.burnin") c.model.burn_in = std::stol(val);
    else if (key == "model.sweeps_between") c.model.sweeps_between = std::stol(val);
    else if (key == "model.chains") c.model.chains = std::stol(val);
    else if (key == "model.site_values") c.model.site.values = parse_double_list(val);
    else if (key == "model.site_probs") c.model.site.probs = parse_double_list(val);
    else if (key == "model.extents") c.extents_2d = parse_long_list(val);
    else if (key == "sweep.sizes") c.sizes = parse_long_list(val);
    else if (key == "sweep.samples") c.samples_per_size = std::stol(val);
    else if (key == "sweep.tau") c.tau = std::stod(val);
    else if (key == "sweep.batch_groups") c.batch_groups = std::stoi(val);
    else if (key == "sweep.cov_radius") c.cov_radius = std::stol(val);
    else if (key == "seed") c.seed = std::stoull(val);
    else if (key == "quad.rule") {
      if (val == "adaptive") c.quad.rule = QuadratureSpec::Rule::adaptive;
      else if (val == "fixed") c.quad.rule = QuadratureSpec::Rule::fixed;
      else throw std::invalid_argument("config: unknown quad.rule " + val);
    } else if (key == "quad.nodes") c.quad.nodes = std::stoi(val);
    else if (key == "quad.halfwidth") c.quad.half_width_sigmas = std::stod(val);
    else if (key == "quad.tol") c.quad.abs_tol = std::stod(val);
    else if (key == "debruijn.tau_min") c.debruijn.tau_min = std::stod(val);
    else if (key == "debruijn.tmax") c.debruijn.t_max = std::stod(val);
    else if (key == "debruijn.points") c.debruijn.points = std::stoi(val);
    else if (key == "kappa.points") c.kappa_points = std::stoi(val);
    else if (key == "quad2d.nodes") c.quad2d.nodes_per_axis = std::stoi(val);
    else if (key == "quad2d.pad") c.quad2d.pad_sigmas = std::stod(val);
    else if (key == "audit.pairs") {
      c.audit_pairs.clear();
      for (const auto& item : [&] {
             std::vector<std::string> parts;
             std::stringstream ss(val);
             std::string p;
             while (std::getline(ss, p, ';')) parts.push_back(p);
             return parts;
           }()) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
          throw std::invalid_argument("config: audit.pairs entries look like m:n");
        c.audit_pairs.emplace_back(std::stol(item.substr(0, colon)),
                                   std::stol(item.substr(colon + 1)));
      }
    } else if (key == "audit.eps") c.audit_eps = std::stod(val);
    else if (key == "output.dir") c.out_dir = val;
    else if (key == "output.timings") c.timings = (val == "1" || val == "true");
    else if (key == "output.dump_samples") c.dump_samples = (val == "1" || val == "true");
    else throw std::invalid_argument("config: unknown key " + key);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  auto kv = path.empty() ? std::map<std::string, std::string>{} : parse_config_file(path);
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("override must be key=value: " + ov);
    kv[ov.substr(0, eq)] = ov.substr(eq + 1);
  }
  return config_from_kv(kv);
}

namespace {

struct ShapeDraws {
  std::string shape;
  lattice::SampleSet set;
};

// A box of volume n must sit inside a strictly larger lattice: on a lattice of
// exactly n sites the periodic wrap distorts the window law badly at small n
// (an L = 2 ring doubles its single bond). The margin buries wrap effects at
// the t^margin level.
constexpr long kLatticeMargin = 16;

// realizations of "a box of volume n": 1-D uses {1..n}; 2-D every factorization
// a*b = n that fits the lattice (the sup over shapes is taken by the caller)
std::vector<ShapeDraws> draws_for_size(const ExperimentConfig& cfg, long n, std::uint64_t seed) {
  std::vector<ShapeDraws> out;
  if (cfg.model.kind == lattice::ModelKind::ising2d) {
    const auto samples = lattice::sample_system(cfg.model, cfg.extents_2d, cfg.samples_per_size, seed);
    for (long a = 1; a <= n; ++a) {
      if (n % a != 0) continue;
      const long b = n / a;
      if (a > cfg.extents_2d[0] || b > cfg.extents_2d[1]) continue;
      lattice::BoxSpec box{{a, b}};
      out.push_back({std::to_string(a) + "x" + std::to_string(b), lattice::box_sums(samples, box)});
    }
    if (out.empty()) throw std::invalid_argument("sweep: no box of volume " + std::to_string(n) +
                                                 " fits the lattice");
  } else {
    const auto samples =
        lattice::sample_system(cfg.model, {n + 2 * kLatticeMargin}, cfg.samples_per_size, seed);
    lattice::BoxSpec box{{n}};
    out.push_back({std::to_string(n), lattice::box_sums(samples, box, {kLatticeMargin})});
  }
  return out;
}

double batch_se(const std::vector<double>& draws, double tau, int groups,
                const QuadratureSpec& quad) {
  const long g = std::min<long>(groups, static_cast<long>(draws.size()) / 2);
  if (g < 2) return 0.0;
  std::vector<double> vals;
  const long per = static_cast<long>(draws.size()) / g;
  for (long i = 0; i < g; ++i) {
    std::vector<double> part(draws.begin() + i * per, draws.begin() + (i + 1) * per);
    vals.push_back(smoothing::fisher(smoothing::smooth(part, tau), quad).j_st);
  }
  return std::sqrt(variance(vals, 1) / static_cast<double>(g));
}

}  // namespace

SweepReport run_sweep(const ExperimentConfig& config) {
  config.validate_sweep();
  SweepReport report;

  // common absolute tau-grid across sizes: the grid starts at the model
  // bandwidth, so the integral targets D of the standardized V_n itself and
  // the J_st values double as the kappa-table ingredients
  if (config.debruijn.t_max <= config.tau * 1.0001)
    throw std::invalid_argument("sweep: debruijn.tmax must exceed the model tau");
  std::vector<double> grid_taus(config.debruijn.points);
  {
    const double lr = std::log(config.debruijn.t_max / config.tau);
    for (int i = 0; i < config.debruijn.points; ++i)
      grid_taus[i] = config.tau * std::exp(lr * i / (config.debruijn.points - 1));
  }
  report.debruijn_taus = grid_taus;

  for (std::size_t si = 0; si < config.sizes.size(); ++si) {
    const long n = config.sizes[si];
    const long t0 = now_ms();
    const auto shapes = draws_for_size(config, n, config.seed + si);

    SizeRecord best;
    bool have = false;
    for (const auto& sh : shapes) {
      SizeRecord rec;
      rec.n = n;
      rec.shape = sh.shape;

      // Box sums are standardized to unit variance before smoothing, so every
      // size is smoothed at the same noise-to-signal ratio (the v(x)-scaled
      // normalization); J_st then decreases along the schedule instead of
      // transiently rising where dependence first concentrates the sum.
      const auto std_draws = infotheory::standardize_draws(sh.set.draws);
      const auto model = smoothing::smooth(std_draws, config.tau);
      rec.sigma2 = sh.set.variance + config.tau;  // variance of the raw smoothed sum
      rec.draws = std_draws;
      const auto fr = smoothing::fisher(model, config.quad);
      rec.j_st = fr.j_st;
      rec.j_st_se = batch_se(std_draws, config.tau, config.batch_groups, config.quad);

      const double var_u = 1.0;
      std::vector<double> jst(grid_taus.size()), errs(grid_taus.size());
      for (std::size_t gi = 0; gi < grid_taus.size(); ++gi) {
        const auto g = smoothing::fisher(model.with_bandwidth(grid_taus[gi]), config.quad);
        jst[gi] = g.j_st;
        errs[gi] = g.error * (var_u + grid_taus[gi]);
      }
      const auto dbr =
          infotheory::debruijn_from_grid(grid_taus, jst, errs, var_u, config.debruijn.t_max);
      rec.d_debruijn = dbr.d;
      rec.d_certificate = dbr.combined_certificate;
      rec.d_lo = std::max(0.0, dbr.d - dbr.combined_certificate);
      rec.d_hi = dbr.d + dbr.combined_certificate;
      rec.grid_j_st = dbr.j_st;

      const auto std_model = model.standardized();
      rec.d_direct = infotheory::relative_entropy_direct(std_model, config.quad).d;
      const auto gd = infotheory::gaussian_distances(std_model, config.quad);
      rec.tv = gd.tv;
      rec.sup = gd.sup;
      rec.tv_bound = gd.tv_bound;
      rec.sup_bound = gd.sup_bound;

      const double rg[5] = {0, 1, 2, 3, 4};
      const auto tp = smoothing::tail_profile(model, std::span<const double>(rg, 5));
      rec.tail_r3 = tp.value[3];
      rec.tail_envelope = tp.envelope_exponent;

      if (!have || rec.j_st > best.j_st) {
        best = rec;
        have = true;
      }
    }
    best.runtime_ms = config.timings ? now_ms() - t0 : 0;
    report.records.push_back(std::move(best));
  }

  // susceptibility estimate from a dedicated covariance run at the largest size
  {
    const long n_max = config.sizes.back();
    const std::vector<long> ext = config.model.kind == lattice::ModelKind::ising2d
                                      ? config.extents_2d
                                      : std::vector<long>{std::max<long>(n_max, 2 * config.cov_radius + 2)};
    const long radius = std::min<long>(config.cov_radius,
                                       (*std::min_element(ext.begin(), ext.end())) / 2 - 1);
    const auto samples = lattice::sample_system(config.model, ext, config.samples_per_size,
                                                config.seed + 7777);
    const auto prof = lattice::covariance_profile(samples, radius);
    report.susceptibility = prof.susceptibility;
    Accum se2;
    for (const auto& oc : prof.covariances) se2.add(oc.se * oc.se);
    report.susceptibility_se = std::sqrt(se2.value());
  }

  // kappa table on a subset of the de Bruijn grid, running sup over sizes >= n
  if (!report.records.empty() && !report.debruijn_taus.empty()) {
    const int total = static_cast<int>(report.debruijn_taus.size());
    const int kp = std::min(config.kappa_points, total);
    std::vector<int> pick;
    for (int i = 0; i < kp; ++i) pick.push_back(i * (total - 1) / std::max(1, kp - 1));
    pick.erase(std::unique(pick.begin(), pick.end()), pick.end());
    for (int idx : pick) report.kappa_taus.push_back(report.debruijn_taus[idx]);
    const std::size_t ns = report.records.size();
    report.kappa.assign(ns, std::vector<double>(pick.size(), 0.0));
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t q = 0; q < pick.size(); ++q) {
        double sup = 0;
        for (std::size_t k = i; k < ns; ++k)
          if (!report.records[k].grid_j_st.empty())
            sup = std::max(sup, report.records[k].grid_j_st[pick[q]]);
        report.kappa[i][q] = sup;
      }
    // Condition-3 style diagnostic: trapezoid of kappa/(1+tau) over the subset
    for (std::size_t i = 0; i < ns; ++i) {
      Accum a;
      for (std::size_t q = 0; q + 1 < report.kappa_taus.size(); ++q) {
        const double t0 = report.kappa_taus[q], t1 = report.kappa_taus[q + 1];
        a.add(0.5 * (report.kappa[i][q] / (1 + t0) + report.kappa[i][q + 1] / (1 + t1)) * (t1 - t0));
      }
      report.condition3_partial.push_back(a.value());
    }
    // the grid J_st values are for unit-variance inputs: kappa <= 1/tau
    report.condition3_tail = std::log1p(1.0 / config.debruijn.t_max);
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t q = 0; q < report.kappa_taus.size(); ++q)
        if (i + 1 < ns && report.kappa[i + 1][q] > report.kappa[i][q] + 1e-15)
          report.kappa_monotone = false;
  }

  for (std::size_t i = 0; i + 1 < report.records.size(); ++i) {
    const auto& a = report.records[i];
    const auto& b = report.records[i + 1];
    if (b.j_st > a.j_st + 2.0 * std::sqrt(a.j_st_se * a.j_st_se + b.j_st_se * b.j_st_se))
      report.jst_nonincreasing = false;
    if (b.d_lo > a.d_hi) report.d_nonincreasing = false;
  }
  return report;
}

void write_sweep_outputs(const SweepReport& report, const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  std::vector<std::vector<double>> rows;
  for (const auto& r : report.records)
    rows.push_back({static_cast<double>(r.n), r.j_st, r.j_st_se, r.d_lo, r.d_hi, r.tv,
                    static_cast<double>(r.runtime_ms)});
  write_csv_rows(config.out_dir + "/sweep.csv",
                 {"n", "Jst", "Jst_se", "D_lo", "D_hi", "TV", "runtime_ms"}, rows);
  if (config.dump_samples)
    for (const auto& r : report.records)
      write_csv_column(config.out_dir + "/samples_n" + std::to_string(r.n) + ".csv", r.draws);

  Json root = Json::object();
  Json recs = Json::array();
  for (const auto& r : report.records) {
    Json j = Json::object();
    j.set("n", static_cast<long long>(r.n))
        .set("shape", r.shape)
        .set("Jst", r.j_st)
        .set("Jst_se", r.j_st_se)
        .set("D_direct", r.d_direct)
        .set("D_debruijn", r.d_debruijn)
        .set("D_certificate", r.d_certificate)
        .set("D_lo", r.d_lo)
        .set("D_hi", r.d_hi)
        .set("TV", r.tv)
        .set("sup", r.sup)
        .set("TV_bound", r.tv_bound)
        .set("sup_bound", r.sup_bound)
        .set("tail_r3", r.tail_r3)
        .set("tail_envelope", r.tail_envelope)
        .set("sigma2", r.sigma2)
        .set("runtime_ms", static_cast<long long>(r.runtime_ms));
    Json grid = Json::array();
    for (double v : r.grid_j_st) grid.push(v);
    j.set("grid_Jst", std::move(grid));
    recs.push(std::move(j));
  }
  root.set("records", std::move(recs));
  Json taus = Json::array();
  for (double t : report.debruijn_taus) taus.push(t);
  root.set("debruijn_taus", std::move(taus));
  Json ktaus = Json::array();
  for (double t : report.kappa_taus) ktaus.push(t);
  root.set("kappa_taus", std::move(ktaus));
  Json kap = Json::array();
  for (const auto& row : report.kappa) {
    Json rj = Json::array();
    for (double v : row) rj.push(v);
    kap.push(std::move(rj));
  }
  root.set("kappa", std::move(kap));
  Json c3 = Json::array();
  for (double v : report.condition3_partial) c3.push(v);
  root.set("condition3_partial", std::move(c3));
  root.set("condition3_tail", report.condition3_tail);
  root.set("susceptibility", report.susceptibility);
  root.set("susceptibility_se", report.susceptibility_se);
  root.set("jst_nonincreasing", report.jst_nonincreasing);
  root.set("d_nonincreasing", report.d_nonincreasing);
  root.set("kappa_monotone", report.kappa_monotone);
  write_text_file(config.out_dir + "/sweep.json", root.dump());
}

AuditSweepReport run_audit(const ExperimentConfig& config) {
  config.validate_audit();
  const bool twod = config.model.kind == lattice::ModelKind::ising2d;
  AuditSweepReport report;

  for (std::size_t pi = 0; pi < config.audit_pairs.size(); ++pi) {
    const auto [m, n] = config.audit_pairs[pi];
    const long total = m + n;
    lattice::SampleSet set_m, set_n;
    if (twod) {
      // split by a cut parallel to the second axis: boxes (h x E1) stacked
      // along axis 0 share the full cross-section
      const long e0 = config.extents_2d[0], e1 = config.extents_2d[1];
      if (m % e1 != 0 || n % e1 != 0 || total / e1 > e0)
        throw std::invalid_argument(
            "audit: (m, n) cannot be split into stacked full-width boxes on this lattice");
      const long h1 = m / e1, h2 = n / e1;
      const auto samples = lattice::sample_system(config.model, config.extents_2d,
                                                  config.samples_per_size, config.seed + 31 * pi);
      set_m = lattice::box_sums(samples, {{h1, e1}}, {0, 0});
      set_n = lattice::box_sums(samples, {{h2, e1}}, {h1, 0});
    } else {
      const auto samples = lattice::sample_system(config.model, {total + 2 * kLatticeMargin},
                                                  config.samples_per_size, config.seed + 31 * pi);
      set_m = lattice::box_sums(samples, {{m}}, {kLatticeMargin});
      set_n = lattice::box_sums(samples, {{n}}, {kLatticeMargin + m});
    }
    inequalities::JointSmoothedDensity joint(set_m.draws, set_n.draws, config.tau);

    AuditRecord rec;
    rec.m = m;
    rec.n = n;
    rec.beta = static_cast<double>(m) / total;
    const auto frm = smoothing::fisher(joint.marginal_x(), config.quad);
    const auto frn = smoothing::fisher(joint.marginal_y(), config.quad);
    const auto frs = smoothing::fisher(joint.sum_model(rec.beta), config.quad);
    rec.jst_m = frm.j_st;
    rec.jst_n = frn.j_st;
    rec.jst_sum = frs.j_st;
    rec.weighted_rhs = rec.beta * rec.jst_m + (1 - rec.beta) * rec.jst_n;
    const auto fs = inequalities::decomposition(joint, rec.beta, config.quad2d, config.quad);
    rec.delta = fs.delta;
    rec.residual = fs.residual;
    rec.d_emp = rec.jst_sum - rec.weighted_rhs + rec.delta;
    rec.c_mn = joint.cov();
    {
      std::vector<double> a(set_m.draws.begin(), set_m.draws.end());
      std::vector<double> b(set_n.draws.begin(), set_n.draws.end());
      rec.c_mn_se = covariance_se(a, b);
    }
    const double kb = std::max(joint.marginal_x().center_variance(),
                               joint.marginal_y().center_variance());
    const auto gap = inequalities::subadditivity_gap(joint, rec.beta, config.audit_eps, kb * 1.0001,
                                               inequalities::ExponentMode::fixed_third, 0,
                                               config.quad2d, config.quad);
    rec.min_c = gap.min_c;
    rec.b_tradeoff = gap.b_tradeoff;

    // batch-group spread of d_emp (1-D quantities only: delta held fixed)
    {
      const int g = 4;
      const long per = static_cast<long>(set_m.draws.size()) / g;
      std::vector<double> vals;
      for (int q = 0; q < g && per >= 64; ++q) {
        std::vector<double> dm(set_m.draws.begin() + q * per, set_m.draws.begin() + (q + 1) * per);
        std::vector<double> dn(set_n.draws.begin() + q * per, set_n.draws.begin() + (q + 1) * per);
        inequalities::JointSmoothedDensity jq(dm, dn, config.tau);
        const double jm = smoothing::fisher(jq.marginal_x(), config.quad).j_st;
        const double jn = smoothing::fisher(jq.marginal_y(), config.quad).j_st;
        const double js = smoothing::fisher(jq.sum_model(rec.beta), config.quad).j_st;
        vals.push_back(js - rec.beta * jm - (1 - rec.beta) * jn + rec.delta);
      }
      rec.d_emp_se = vals.size() >= 2
                         ? std::sqrt(variance(vals, 1) / static_cast<double>(vals.size()))
                         : 0.0;
    }
    report.records.push_back(rec);
  }

  for (const auto& r : report.records)
    if (r.m == r.n && (r.m & (r.m - 1)) == 0) report.ladder_gaps.push_back(r.d_emp);
  for (std::size_t i = 0; i + 1 < report.records.size(); ++i) {
    const auto& a = report.records[i];
    const auto& b = report.records[i + 1];
    if (b.m <= a.m) continue;
    if (b.d_emp > a.d_emp + 2.0 * std::sqrt(a.d_emp_se * a.d_emp_se + b.d_emp_se * b.d_emp_se))
      report.d_decreasing = false;
  }
  return report;
}

void write_audit_outputs(const AuditSweepReport& report, const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  std::vector<std::vector<double>> rows;
  for (const auto& r : report.records)
    rows.push_back({static_cast<double>(r.m), static_cast<double>(r.n), r.beta, r.jst_m, r.jst_n,
                    r.jst_sum, r.weighted_rhs, r.delta, r.d_emp, r.d_emp_se, r.c_mn, r.c_mn_se,
                    r.min_c, r.b_tradeoff, r.residual});
  write_csv_rows(config.out_dir + "/audit.csv",
                 {"m", "n", "beta", "Jst_m", "Jst_n", "Jst_sum", "weighted_rhs", "delta", "d_emp",
                  "d_emp_se", "c_mn", "c_mn_se", "min_C", "B_tradeoff", "residual"},
                 rows);
  Json root = Json::object();
  Json recs = Json::array();
  for (const auto& r : report.records) {
    Json j = Json::object();
    j.set("m", static_cast<long long>(r.m))
        .set("n", static_cast<long long>(r.n))
        .set("beta", r.beta)
        .set("Jst_m", r.jst_m)
        .set("Jst_n", r.jst_n)
        .set("Jst_sum", r.jst_sum)
        .set("weighted_rhs", r.weighted_rhs)
        .set("delta", r.delta)
        .set("d_emp", r.d_emp)
        .set("d_emp_se", r.d_emp_se)
        .set("c_mn", r.c_mn)
        .set("c_mn_se", r.c_mn_se)
        .set("min_C", r.min_c)
        .set("B_tradeoff", r.b_tradeoff)
        .set("residual", r.residual);
    recs.push(std::move(j));
  }
  root.set("records", std::move(recs));
  Json ladder = Json::array();
  for (double v : report.ladder_gaps) ladder.push(v);
  root.set("ladder_gaps", std::move(ladder));
  root.set("d_decreasing", report.d_decreasing);
  write_text_file(config.out_dir + "/audit.json", root.dump());
}

}  // namespace fkglab::experiments

#include "fkglab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fkglab/rng.hpp"
#include "fkglab/stats.hpp"

namespace fkglab::lattice {

namespace {

long checked_volume(const std::vector<long>& extents) {
  if (extents.empty() || extents.size() > 2)
    throw std::invalid_argument("extents must have one or two axes");
  long v = 1;
  for (long e : extents) {
    if (e <= 0) throw std::invalid_argument("extents must be positive");
    if (v > 100'000'000L / e) throw std::invalid_argument("extents overflow");
    v *= e;
  }
  return v;
}

}  // namespace

double SiteDistribution::mean() const {
  Accum a;
  for (std::size_t i = 0; i < values.size(); ++i) a.add(values[i] * probs[i]);
  return a.value();
}

double SiteDistribution::variance() const {
  const double m = mean();
  Accum a;
  for (std::size_t i = 0; i < values.size(); ++i) a.add(probs[i] * (values[i] - m) * (values[i] - m));
  return a.value();
}

void SiteDistribution::validate() const {
  if (values.empty() || values.size() != probs.size())
    throw std::invalid_argument("site distribution: values/probs mismatch");
  double s = 0;
  for (double p : probs) {
    if (p < 0) throw std::invalid_argument("site distribution: negative probability");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("site distribution: probabilities must sum to 1");
}

void ModelSpec::validate() const {
  if (coupling < 0.0)
    throw std::invalid_argument("coupling J must be nonnegative (FKG requires ferromagnetic sign)");
  if (burn_in < 0 || sweeps_between < 0 || chains < 1)
    throw std::invalid_argument("sampler controls must be nonnegative (chains >= 1)");
  if (kind == ModelKind::independent) site.validate();
}

long BoxSpec::volume() const {
  long v = 1;
  for (long c : corner) {
    if (c <= 0) throw std::invalid_argument("box corner entries must be positive");
    v *= c;
  }
  return v;
}

void BoxSpec::validate(const std::vector<long>& extents) const {
  if (corner.size() != extents.size()) throw std::invalid_argument("box dimension mismatch");
  for (std::size_t i = 0; i < corner.size(); ++i)
    if (corner[i] <= 0 || corner[i] > extents[i])
      throw std::invalid_argument("box exceeds lattice extents");
}

namespace {

void sample_independent(const ModelSpec& spec, long n_sites, long n_samples, std::uint64_t seed,
                        std::vector<LatticeSample>& out) {
  const double m = spec.site.mean();
  std::vector<double> cdf(spec.site.probs.size());
  double acc = 0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += spec.site.probs[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  for (long k = 0; k < n_samples; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    auto& smp = out[k];
    for (long j = 0; j < n_sites; ++j) {
      const double u = rng.uniform();
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const std::size_t idx = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
      smp.values[j] = spec.site.values[idx] - m;
    }
    smp.chain_index = k;
  }
}

// Exact 1-D Ising at h = 0. Free boundary: forward pass with
// P(x_{i+1} = x_i) = e^J / (e^J + e^{-J}). Periodic boundary: the same pass
// with the transfer-matrix closure weight lambda2/lambda1 = tanh(J)^k for the
// k bonds remaining back to x_0.
void sample_ising1d_exact(const ModelSpec& spec, long length, long n_samples, std::uint64_t seed,
                          std::vector<LatticeSample>& out) {
  const double J = spec.coupling;
  const double t = std::tanh(J);
  const bool periodic = spec.boundary == Boundary::periodic;
  std::vector<double> tpow;
  if (periodic) {
    tpow.resize(static_cast<std::size_t>(length) + 1);
    tpow[0] = 1.0;
    for (long k = 1; k <= length; ++k) tpow[k] = tpow[k - 1] * t;
  }
  for (long k = 0; k < n_samples; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    auto& smp = out[k];
    int x0 = rng.pm1(0.5);
    smp.values[0] = x0;
    int prev = x0;
    for (long i = 0; i + 1 < length; ++i) {
      double p_plus;
      if (periodic) {
        const double r = tpow[length - 1 - i];
        const double wp = std::exp(J * prev) * (1.0 + x0 * r);
        const double wm = std::exp(-J * prev) * (1.0 - x0 * r);
        p_plus = wp / (wp + wm);
      } else {
        const double wp = std::exp(J * prev);
        p_plus = wp / (wp + std::exp(-J * prev));
      }
      prev = rng.pm1(p_plus);
      smp.values[i + 1] = prev;
    }
    smp.chain_index = k;
  }
}

struct Neighbors {
  long idx[4];
  int count;
};

void gibbs_sweep(std::vector<int>& x, const std::vector<Neighbors>& nbrs, double J, double h,
                 Rng& rng) {
  const long n = static_cast<long>(x.size());
  for (long j = 0; j < n; ++j) {
    double local = h;
    const auto& nb = nbrs[j];
    for (int q = 0; q < nb.count; ++q) local += J * x[nb.idx[q]];
    const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * local));
    x[j] = rng.pm1(p_plus);
  }
}

void sample_gibbs(const ModelSpec& spec, const std::vector<long>& extents, long n_samples,
                  std::uint64_t seed, std::vector<LatticeSample>& out) {
  const long n_sites = checked_volume(extents);
  const bool periodic = spec.boundary == Boundary::periodic;
  std::vector<Neighbors> nbrs(n_sites);
  if (extents.size() == 1) {
    const long L = extents[0];
    for (long i = 0; i < L; ++i) {
      auto& nb = nbrs[i];
      nb.count = 0;
      if (i > 0 || periodic) nb.idx[nb.count++] = (i - 1 + L) % L;
      if (i + 1 < L || periodic) nb.idx[nb.count++] = (i + 1) % L;
      if (L == 1) nb.count = 0;
    }
  } else {
    const long R = extents[0], C = extents[1];
    for (long r = 0; r < R; ++r)
      for (long c = 0; c < C; ++c) {
        auto& nb = nbrs[r * C + c];
        nb.count = 0;
        if (r > 0 || (periodic && R > 1)) nb.idx[nb.count++] = ((r - 1 + R) % R) * C + c;
        if (r + 1 < R || (periodic && R > 1)) nb.idx[nb.count++] = ((r + 1) % R) * C + c;
        if (c > 0 || (periodic && C > 1)) nb.idx[nb.count++] = r * C + (c - 1 + C) % C;
        if (c + 1 < C || (periodic && C > 1)) nb.idx[nb.count++] = r * C + (c + 1) % C;
      }
  }

  const long chains = std::min<long>(spec.chains, n_samples);
  const long per_chain = (n_samples + chains - 1) / chains;
  for (long c = 0; c < chains; ++c) {
    Rng rng(seed, 0x100000000ULL + static_cast<std::uint64_t>(c));
    std::vector<int> x(n_sites);
    for (auto& v : x) v = rng.pm1(0.5);
    for (long s = 0; s < spec.burn_in; ++s) gibbs_sweep(x, nbrs, spec.coupling, spec.field, rng);
    const long lo = c * per_chain, hi = std::min(n_samples, lo + per_chain);
    for (long k = lo; k < hi; ++k) {
      for (long s = 0; s < std::max<long>(1, spec.sweeps_between); ++s)
        gibbs_sweep(x, nbrs, spec.coupling, spec.field, rng);
      auto& smp = out[k];
      for (long j = 0; j < n_sites; ++j) smp.values[j] = x[j];
      smp.chain_index = c;
    }
  }
}

}  // namespace

std::vector<LatticeSample> sample_system(const ModelSpec& spec, const std::vector<long>& extents,
                                         long n_samples, std::uint64_t seed) {
  spec.validate();
  const long n_sites = checked_volume(extents);
  if (n_samples < 1) throw std::invalid_argument("n_samples must be positive");
  if (spec.kind == ModelKind::ising1d && extents.size() != 1)
    throw std::invalid_argument("ising1d requires one-dimensional extents");
  if (spec.kind == ModelKind::ising2d && extents.size() != 2)
    throw std::invalid_argument("ising2d requires two-dimensional extents");

  std::vector<LatticeSample> out(n_samples);
  const auto prov = std::make_shared<const ModelSpec>(spec);
  for (auto& smp : out) {
    smp.dimension = static_cast<int>(extents.size());
    smp.extents = extents;
    smp.values.assign(n_sites, 0.0);
    smp.provenance = prov;
    smp.seed = seed;
  }

  const bool exact1d = spec.kind == ModelKind::ising1d && spec.field == 0.0;
  if (spec.kind == ModelKind::independent)
    sample_independent(spec, n_sites, n_samples, seed, out);
  else if (exact1d)
    sample_ising1d_exact(spec, extents[0], n_samples, seed, out);
  else
    sample_gibbs(spec, extents, n_samples, seed, out);

  // centering: exact model mean where known (h = 0 Ising is symmetric, the
  // independent path already subtracted the exact site mean); otherwise the
  // empirical grand mean across all configurations
  if (spec.kind != ModelKind::independent && spec.field != 0.0) {
    Accum a;
    for (const auto& smp : out)
      for (double v : smp.values) a.add(v);
    const double grand = a.value() / (static_cast<double>(n_samples) * n_sites);
    for (auto& smp : out)
      for (auto& v : smp.values) v -= grand;
  }
  return out;
}

SampleSet box_sums(const std::vector<LatticeSample>& samples, const BoxSpec& box) {
  return box_sums(samples, box, std::vector<long>(box.corner.size(), 0));
}

SampleSet box_sums(const std::vector<LatticeSample>& samples, const BoxSpec& box,
                   const std::vector<long>& offset) {
  if (samples.size() < 2) throw std::invalid_argument("box_sums: need at least 2 configurations");
  if (offset.size() != box.corner.size()) throw std::invalid_argument("box_sums: offset dimension mismatch");
  const auto& extents = samples.front().extents;
  box.validate(extents);
  for (std::size_t i = 0; i < offset.size(); ++i)
    if (offset[i] < 0 || offset[i] + box.corner[i] > extents[i])
      throw std::invalid_argument("box exceeds lattice extents at given offset");

  const long vol = box.volume();
  const double norm = std::sqrt(static_cast<double>(vol));
  SampleSet set;
  set.box_volume = vol;
  set.draws.reserve(samples.size());
  for (const auto& smp : samples) {
    if (smp.extents != extents) throw std::invalid_argument("box_sums: inhomogeneous samples");
    Accum a;
    if (extents.size() == 1) {
      for (long i = 0; i < box.corner[0]; ++i) a.add(smp.values[offset[0] + i]);
    } else {
      const long C = extents[1];
      for (long r = 0; r < box.corner[0]; ++r)
        for (long c = 0; c < box.corner[1]; ++c)
          a.add(smp.values[(offset[0] + r) * C + (offset[1] + c)]);
    }
    set.draws.push_back(a.value() / norm);
  }
  set.mean = fkglab::mean(set.draws);
  set.variance = fkglab::variance(set.draws, 1);
  set.vx = set.variance * static_cast<double>(vol);
  return set;
}

namespace {

// covariance estimated across configurations between two fixed sites
void site_pair_cov(const std::vector<LatticeSample>& samples, long ia, long ib, double& cov,
                   double& se) {
  const auto n = samples.size();
  std::vector<double> a(n), b(n);
  for (std::size_t k = 0; k < n; ++k) {
    a[k] = samples[k].values[ia];
    b[k] = samples[k].values[ib];
  }
  cov = covariance(a, b, 1);
  se = covariance_se(a, b);
}

}  // namespace

CovarianceProfile covariance_profile(const std::vector<LatticeSample>& samples, long max_radius,
                                     bool spatial_average) {
  if (samples.size() < 2) throw std::invalid_argument("covariance_profile: need >= 2 configurations");
  const auto& first = samples.front();
  const auto& extents = first.extents;
  // Under periodic boundaries the reference site is the origin and offsets
  // wrap; under free boundaries wrapping would read the far end of the chain,
  // so the reference moves to the middle and the lattice must hold the radius.
  const bool free_boundary =
      first.provenance && first.provenance->boundary == Boundary::free;
  if (spatial_average && free_boundary)
    throw std::invalid_argument("covariance_profile: spatial averaging needs periodic boundaries");

  CovarianceProfile prof;
  prof.max_radius = max_radius;
  const long n_cfg = static_cast<long>(samples.size());

  auto flat = [&](long r, long c) { return r * extents[1] + c; };

  if (extents.size() == 1) {
    const long L = extents[0];
    if (max_radius < 0 || max_radius >= L || (free_boundary && 2 * max_radius + 1 > L))
      throw std::invalid_argument("radius too large for lattice");
    std::vector<double> cov_at(static_cast<std::size_t>(2 * max_radius + 1));
    std::vector<double> se_at(cov_at.size());
    for (long u = -max_radius; u <= max_radius; ++u) {
      double cov, se;
      if (spatial_average) {
        std::vector<double> prod;
        prod.reserve(samples.size());
        // spatially averaged (periodic wrap) estimator, one value per configuration
        std::vector<double> means(n_cfg);
        Accum gm;
        for (long k = 0; k < n_cfg; ++k) {
          Accum a;
          for (double v : samples[k].values) a.add(v);
          means[k] = a.value() / static_cast<double>(L);
          gm.add(means[k]);
        }
        const double grand = gm.value() / n_cfg;
        for (long k = 0; k < n_cfg; ++k) {
          Accum a;
          for (long i = 0; i < L; ++i) {
            const long j = ((i + u) % L + L) % L;
            a.add((samples[k].values[i] - grand) * (samples[k].values[j] - grand));
          }
          prod.push_back(a.value() / static_cast<double>(L));
        }
        cov = fkglab::mean(prod);
        se = std::sqrt(fkglab::variance(prod, 1) / static_cast<double>(n_cfg));
      } else {
        const long ref = free_boundary ? max_radius : 0;
        const long other = free_boundary ? ref + u : ((u % L) + L) % L;
        site_pair_cov(samples, ref, other, cov, se);
      }
      cov_at[u + max_radius] = cov;
      se_at[u + max_radius] = se;
    }
    for (long u = -max_radius; u <= max_radius; ++u)
      prof.covariances.push_back({{u}, cov_at[u + max_radius], se_at[u + max_radius]});
    prof.partial_sums.resize(max_radius + 1);
    for (long r = 0; r <= max_radius; ++r) {
      Accum a;
      for (long u = -r; u <= r; ++u) a.add(cov_at[u + max_radius]);
      prof.partial_sums[r] = a.value();
    }
  } else {
    const long R = extents[0], C = extents[1];
    if (max_radius < 0 || max_radius >= std::min(R, C) ||
        (free_boundary && 2 * max_radius + 1 > std::min(R, C)))
      throw std::invalid_argument("radius too large for lattice");
    const long m = max_radius;
    std::vector<std::vector<double>> cov_at(2 * m + 1, std::vector<double>(2 * m + 1));
    std::vector<std::vector<double>> se_at = cov_at;
    for (long du = -m; du <= m; ++du)
      for (long dv = -m; dv <= m; ++dv) {
        double cov, se;
        long ia, ib;
        if (free_boundary) {
          ia = flat(m, m);
          ib = flat(m + du, m + dv);
        } else {
          ia = flat(0, 0);
          ib = flat(((du % R) + R) % R, ((dv % C) + C) % C);
        }
        site_pair_cov(samples, ia, ib, cov, se);
        cov_at[du + m][dv + m] = cov;
        se_at[du + m][dv + m] = se;
      }
    for (long du = -m; du <= m; ++du)
      for (long dv = -m; dv <= m; ++dv)
        prof.covariances.push_back({{du, dv}, cov_at[du + m][dv + m], se_at[du + m][dv + m]});
    prof.partial_sums.resize(m + 1);
    for (long r = 0; r <= m; ++r) {
      Accum a;
      for (long du = -r; du <= r; ++du)
        for (long dv = -r; dv <= r; ++dv) a.add(cov_at[du + m][dv + m]);
      prof.partial_sums[r] = a.value();
    }
  }

  prof.susceptibility = prof.partial_sums.back();
  for (long r = 1; 4 * r <= max_radius; r *= 2) {
    const double kr = prof.partial_sums[r];
    if (kr != 0.0)
      prof.slow_variation.push_back({r, prof.partial_sums[2 * r] / kr, prof.partial_sums[4 * r] / kr});
  }
  return prof;
}

QuadrantReport quadrant_dependence(std::span<const double> s, std::span<const double> t,
                                   const QuadrantGrid& grid) {
  const long n = static_cast<long>(s.size());
  if (n < 100) throw std::invalid_argument("quadrant_dependence: need at least 100 pairs");
  if (t.size() != s.size()) throw std::invalid_argument("quadrant_dependence: size mismatch");
  if (grid.ns < 2 || grid.nt < 2) throw std::invalid_argument("quadrant_dependence: grid too small");

  const auto [smin_it, smax_it] = std::minmax_element(s.begin(), s.end());
  const auto [tmin_it, tmax_it] = std::minmax_element(t.begin(), t.end());
  std::vector<double> sg(grid.ns), tg(grid.nt);
  for (int i = 0; i < grid.ns; ++i)
    sg[i] = *smin_it + (*smax_it - *smin_it) * i / (grid.ns - 1);
  for (int j = 0; j < grid.nt; ++j)
    tg[j] = *tmin_it + (*tmax_it - *tmin_it) * j / (grid.nt - 1);

  // counts of pairs with S >= sg[i] and T >= tg[j] via a suffix-summed histogram
  std::vector<std::vector<long>> cnt(grid.ns, std::vector<long>(grid.nt, 0));
  std::vector<long> cs(grid.ns, 0), ct(grid.nt, 0);
  for (long k = 0; k < n; ++k) {
    // bi = largest grid index with sg[bi] <= S (u is the first index with sg > S)
    const long bi = std::upper_bound(sg.begin(), sg.end(), s[k]) - sg.begin() - 1;
    const long bj = std::upper_bound(tg.begin(), tg.end(), t[k]) - tg.begin() - 1;
    if (bi >= 0 && bj >= 0) cnt[bi][bj] += 1;
    if (bi >= 0) cs[bi] += 1;
    if (bj >= 0) ct[bj] += 1;
  }
  for (int i = grid.ns - 1; i >= 0; --i)
    for (int j = grid.nt - 1; j >= 0; --j) {
      if (i + 1 < grid.ns) cnt[i][j] += cnt[i + 1][j];
      if (j + 1 < grid.nt) cnt[i][j] += cnt[i][j + 1];
      if (i + 1 < grid.ns && j + 1 < grid.nt) cnt[i][j] -= cnt[i + 1][j + 1];
    }
  for (int i = grid.ns - 2; i >= 0; --i) cs[i] += cs[i + 1];
  for (int j = grid.nt - 2; j >= 0; --j) ct[j] += ct[j + 1];

  QuadrantReport rep;
  double best = 1e300;
  int bi = 0, bj = 0;
  for (int i = 0; i < grid.ns; ++i)
    for (int j = 0; j < grid.nt; ++j) {
      const double p12 = static_cast<double>(cnt[i][j]) / n;
      const double p1 = static_cast<double>(cs[i]) / n;
      const double p2 = static_cast<double>(ct[j]) / n;
      const double h = p12 - p1 * p2;
      if (h < best) {
        best = h;
        bi = i;
        bj = j;
      }
    }
  {
    const double p12 = static_cast<double>(cnt[bi][bj]) / n;
    const double p1 = static_cast<double>(cs[bi]) / n;
    const double p2 = static_cast<double>(ct[bj]) / n;
    // delta-method variance of p12_hat - p1_hat * p2_hat
    const double e2 = p12 + p2 * p2 * p1 + p1 * p1 * p2 - 2 * p2 * p12 - 2 * p1 * p12 +
                      2 * p1 * p2 * p12;
    const double m = p12 - 2 * p1 * p2;
    const double var = std::max(0.0, e2 - m * m);
    rep.min_h = best;
    rep.se_at_min = std::sqrt(var / n);
    rep.s_at_min = sg[bi];
    rep.t_at_min = tg[bj];
  }

  rep.cov_st = covariance(s, t, 1);
  rep.cov_st_se = covariance_se(s, t);

  // smooth increasing test functions f(x) = tanh(alpha (x - c)); |f'|_inf = alpha
  const double sd_s = std::sqrt(variance(s, 1));
  const double sd_t = std::sqrt(variance(t, 1));
  const double alphas[3] = {0.5, 1.0, 2.0};
  const double shifts[3] = {-0.5, 0.0, 0.5};
  std::vector<double> fs(n), gt(n);
  rep.worst_function_slack = 1e300;
  for (double af : alphas)
    for (double cf : shifts)
      for (double ag : alphas)
        for (double cg : shifts) {
          const double a1 = af / sd_s, a2 = ag / sd_t;
          const double c1 = mean(s) + cf * sd_s;
          const double c2 = mean(t) + cg * sd_t;
          for (long k = 0; k < n; ++k) {
            fs[k] = std::tanh(a1 * (s[k] - c1));
            gt[k] = std::tanh(a2 * (t[k] - c2));
          }
          QuadrantReport::FunctionCheck chk;
          chk.alpha_f = a1;
          chk.shift_f = c1;
          chk.alpha_g = a2;
          chk.shift_g = c2;
          chk.cov_fg = covariance(fs, gt, 1);
          chk.cov_fg_se = covariance_se(fs, gt);
          chk.bound = a1 * a2 * rep.cov_st;
          chk.slack = chk.bound - chk.cov_fg;
          if (chk.slack < rep.worst_function_slack) {
            rep.worst_function_slack = chk.slack;
            rep.worst_function_se = chk.cov_fg_se + a1 * a2 * rep.cov_st_se;
          }
          rep.function_checks.push_back(chk);
        }
  return rep;
}

}  // namespace fkglab::lattice

#include "lnse/lambda_nse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lnse/operators.hpp"
#include "lnse/regression.hpp"
#include "lnse/rng.hpp"

namespace lnse {

namespace {

constexpr double kFourPiSq = 39.478417604357434475337963999505;
constexpr double kSmoothOrder = 40.0;  // corner rounding of the schedule

// log of the power-mean soft minimum / maximum of two positive numbers.
double soft_min_log(double la, double lb) {
  double hi = std::max(la, lb), lo = std::min(la, lb);
  return lo - std::log1p(std::exp(-kSmoothOrder * (hi - lo))) / kSmoothOrder;
}
double soft_max_log(double la, double lb) {
  double hi = std::max(la, lb), lo = std::min(la, lb);
  return hi + std::log1p(std::exp(-kSmoothOrder * (hi - lo))) / kSmoothOrder;
}

CutoffProfile sharp_cut() { return CutoffProfile{true}; }

double energy_of(const SpectralField& u) {
  double e = norm_l2(u);
  return 0.5 * e * e;
}

double enstrophy_of(const SpectralField& u) {
  double acc = 0.0;
  for (int c = 0; c < u.n_components(); ++c)
    u.for_each_mode(c, [&](int k0, int k1, int k2, const cplx& v) {
      acc += kFourPiSq * (double(k0) * k0 + double(k1) * k1 + double(k2) * k2) * std::norm(v);
    });
  return acc;
}

// Per-mode viscous decay table indexed by |xi|^2.
std::vector<double> decay_table(const Dims& d, double nu, double dt) {
  int kmax = d.n0 / 2 * (d.n0 / 2) + d.n1 / 2 * (d.n1 / 2) + d.n2 / 2 * (d.n2 / 2);
  std::vector<double> tab(size_t(kmax) + 1);
  for (int k = 0; k <= kmax; ++k) tab[size_t(k)] = std::exp(-nu * kFourPiSq * k * dt);
  return tab;
}

void apply_decay(SpectralField& f, const std::vector<double>& tab) {
  for (int c = 0; c < f.n_components(); ++c)
    f.for_each_mode(c, [&](int k0, int k1, int k2, cplx& v) {
      v *= tab[size_t(k0 * k0 + k1 * k1 + k2 * k2)];
    });
}

SpectralField nonlinearity_on(const SpectralField& u, double lambda, Dims conv) {
  SpectralField v = project_below(resample(u, conv), lambda, sharp_cut());
  SpectralField t = outer_product(v, v, 1);
  SpectralField n = leray_project(project_below(divergence(t), lambda, sharp_cut()));
  n *= -1.0;
  return resample(n, u.dims());
}

}  // namespace

double LambdaSchedule::operator()(double t) const {
  double ly;
  if (t <= 0.0) {
    ly = std::log(cap) + 1.0;  // beyond the cap corner
  } else {
    ly = exponent * std::log(t) + std::log1p(-1e-4);
  }
  double l1 = soft_min_log(std::log(cap), ly);
  return std::exp(soft_max_log(l1, std::log(floor_level)));
}

const SpectralField& SolverRun::nearest(double t, double* actual) const {
  if (stored.empty()) throw std::logic_error("SolverRun::nearest: no stored fields");
  size_t best = 0;
  for (size_t i = 1; i < stored_times.size(); ++i)
    if (std::abs(stored_times[i] - t) < std::abs(stored_times[best] - t)) best = i;
  if (actual) *actual = stored_times[best];
  return stored[best];
}

SpectralField truncated_nonlinearity(const SpectralField& u, double lambda) {
  return nonlinearity_on(u, lambda, u.dims());
}

SolverRun solve(const SpectralField& v0, const SolverConfig& cfg) {
  if (v0.n_components() != 3) throw std::invalid_argument("solve: v0 must be a 3-vector field");
  if (div_defect(v0) > 1e-8) throw std::invalid_argument("solve: v0 is not divergence-free");
  for (int c = 0; c < 3; ++c)
    if (std::abs(v0.coeff(c, 0, 0, 0)) > 1e-12)
      throw std::invalid_argument("solve: v0 is not mean-free");
  if (cfg.dt <= 0.0 || cfg.t_end <= 0.0) throw std::invalid_argument("solve: need dt, t_end > 0");

  const Dims d = v0.dims();
  int nyq = std::min(std::min(d.n0, d.n1), d.n2) / 2;
  double lam_eff = std::min(cfg.schedule.cap, double(nyq));
  int conv_n = 2 * (int(std::ceil(1.6 * lam_eff)) + 2);
  conv_n = std::min({conv_n, d.n0, d.n1, d.n2});
  Dims conv{conv_n, conv_n, conv_n};

  int n_steps = int(std::llround(cfg.t_end / cfg.dt));
  if (n_steps < 1 || std::abs(n_steps * cfg.dt - cfg.t_end) > 1e-9 * cfg.t_end)
    throw std::invalid_argument("solve: t_end must be an integer multiple of dt");

  // Target storage times: t = 0, the geometric tail, and the horizon.
  std::vector<double> targets;
  for (int j = cfg.geometric_levels; j >= 0; --j) targets.push_back(cfg.t_end * std::ldexp(1.0, -j));

  std::vector<double> e_tab = decay_table(d, cfg.nu, cfg.dt);
  std::vector<double> e2_tab = decay_table(d, cfg.nu, cfg.dt / 2.0);

  SolverRun run;
  run.cfg = cfg;
  run.v0 = v0;
  SpectralField u = v0;
  run.times.push_back(0.0);
  run.energy.push_back(energy_of(u));
  run.enstrophy.push_back(enstrophy_of(u));
  run.stored_times.push_back(0.0);
  run.stored.push_back(u);
  size_t next_target = 0;

  for (int s = 1; s <= n_steps; ++s) {
    double t = (s - 1) * cfg.dt;
    double dt = cfg.dt;

    SpectralField k1 = nonlinearity_on(u, cfg.schedule(t), conv);
    SpectralField y = u;
    {
      SpectralField tmp = k1;
      tmp *= dt / 2.0;
      y += tmp;
    }
    apply_decay(y, e2_tab);
    SpectralField k2 = nonlinearity_on(y, cfg.schedule(t + dt / 2.0), conv);

    SpectralField uh = u;
    apply_decay(uh, e2_tab);
    y = k2;
    y *= dt / 2.0;
    y += uh;
    SpectralField k3 = nonlinearity_on(y, cfg.schedule(t + dt / 2.0), conv);

    SpectralField uf = uh;
    apply_decay(uf, e2_tab);  // E = E2 * E2
    y = k3;
    apply_decay(y, e2_tab);
    y *= dt;
    y += uf;
    SpectralField k4 = nonlinearity_on(y, cfg.schedule(t + dt), conv);

    apply_decay(k1, e_tab);
    SpectralField k23 = k2;
    k23 += k3;
    apply_decay(k23, e2_tab);
    k23 *= 2.0;
    k1 += k23;
    k1 += k4;
    k1 *= dt / 6.0;
    u = uf;
    u += k1;
    u = leray_project(u);

    double e_new = energy_of(u);
    if (e_new > cfg.growth_guard * run.energy.back() + 1e-14)
      throw std::runtime_error("solve: energy growth at step " + std::to_string(s) +
                               ", reduce dt");
    double t_new = s * cfg.dt;
    run.times.push_back(t_new);
    run.energy.push_back(e_new);
    run.enstrophy.push_back(enstrophy_of(u));

    bool want = cfg.store_every > 0 && s % cfg.store_every == 0;
    while (next_target < targets.size() && targets[next_target] <= t_new + 1e-12) {
      want = true;
      ++next_target;
    }
    if (want || s == n_steps) {
      if (run.stored_times.back() != t_new) {
        run.stored_times.push_back(t_new);
        run.stored.push_back(u);
      }
    }
  }
  return run;
}

std::vector<double> energy_balance_residual(const SolverRun& run) {
  double e0 = run.energy.front();
  if (e0 <= 0.0) return std::vector<double>(run.times.size(), 0.0);
  std::vector<double> out;
  double integral = 0.0;
  out.push_back(0.0);
  for (size_t i = 1; i < run.times.size(); ++i) {
    integral += 0.5 * (run.enstrophy[i - 1] + run.enstrophy[i]) *
                (run.times[i] - run.times[i - 1]);
    out.push_back(std::abs(run.energy[i] + run.cfg.nu * integral - e0) / e0);
  }
  return out;
}

std::vector<HighModeRow> high_mode_nonlinearity(const SolverRun& run,
                                                const std::vector<double>& t_star_sweep) {
  std::vector<double> q(run.stored.size()), band(run.stored.size());
  for (size_t i = 0; i < run.stored.size(); ++i) {
    double lam = run.cfg.schedule(run.stored_times[i]);
    const SpectralField& u = run.stored[i];
    SpectralField v = project_below(u, lam, sharp_cut());
    SpectralField s = traceless_part(outer_product(v, v, 2));
    q[i] = norm_lp(project_high(s, lam, sharp_cut()), 1.0);
    band[i] = norm_l2(project_band(u, lam / 6.0, 2.0 * lam, true));
  }
  std::vector<HighModeRow> rows;
  for (double ts : t_star_sweep) {
    HighModeRow row;
    row.t_star = ts;
    for (size_t i = 0; i < run.stored.size(); ++i)
      if (run.stored_times[i] <= ts + 1e-12) {
        row.sup_l1 = std::max(row.sup_l1, q[i]);
        row.band_l2 = band[i];
      }
    rows.push_back(row);
  }
  return rows;
}

RegularityReport regularity_report(const SolverRun& run, const std::vector<double>& s_list,
                                   const std::vector<double>& t_list) {
  RegularityReport rep;
  rep.s_list = s_list;
  double v0n = norm_l2(run.v0);
  for (double s : s_list) {
    std::vector<double> ts, ns;
    double cmax = 0.0;
    for (double t : t_list) {
      double actual = 0.0;
      const SpectralField& u = run.nearest(t, &actual);
      RegularityRow row;
      row.s = s;
      row.t = actual;
      row.hs_norm = norm_hs_dot(u, s);
      row.envelope = (1.0 + std::pow(actual, -s / 2.0)) * v0n;
      rep.rows.push_back(row);
      if (actual > 0.0 && row.hs_norm > 0.0) {
        ts.push_back(actual);
        ns.push_back(row.hs_norm);
        cmax = std::max(cmax, row.hs_norm / row.envelope);
      }
    }
    rep.fitted_exponent.push_back(ts.size() >= 2 ? fit_loglog(ts, ns) : 0.0);
    rep.constant.push_back(cmax);
  }
  return rep;
}

RefinementReport refinement_convergence(const SpectralField& v0, const SolverConfig& cfg,
                                        const std::vector<int>& grids,
                                        const std::vector<double>& dts) {
  RefinementReport rep;
  rep.grids = grids;
  rep.dts = dts;

  if (grids.size() >= 2) {
    std::vector<SolverRun> runs;
    for (int n : grids) runs.push_back(solve(resample(v0, {n, n, n}), cfg));
    for (size_t i = 0; i + 1 < runs.size(); ++i) {
      Dims fine = runs[i + 1].v0.dims();
      double dist = 0.0;
      for (size_t j = 0; j < runs[i].stored.size(); ++j) {
        SpectralField diff = resample(runs[i].stored[j], fine);
        diff -= runs[i + 1].stored[j];
        dist = std::max(dist, norm_l2(diff));
      }
      rep.grid_distances.push_back(dist);
    }
  }

  if (dts.size() >= 2) {
    std::vector<double> sorted = dts;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double ref_dt = sorted.back();
    SolverConfig c = cfg;
    c.dt = ref_dt;
    SolverRun ref = solve(v0, c);
    std::vector<double> xs, ys;
    for (size_t i = 0; i + 1 < sorted.size(); ++i) {
      c.dt = sorted[i];
      SolverRun r = solve(v0, c);
      SpectralField diff = r.stored.back();
      diff -= ref.stored.back();
      rep.dt_distances.push_back(norm_l2(diff));
      xs.push_back(sorted[i]);
      ys.push_back(rep.dt_distances.back());
    }
    rep.dt_order = xs.size() >= 2 ? fit_loglog(xs, ys) : 0.0;
  }
  return rep;
}

StressSeries build_R0(const SolverRun& run, const ConvolutionPath* z0) {
  StressSeries out;
  for (size_t i = 0; i < run.stored.size(); ++i) {
    double t = run.stored_times[i];
    double lam = run.cfg.schedule(t);
    const SpectralField& u = run.stored[i];
    SpectralField lo = project_below(u, lam, sharp_cut());
    SpectralField hi = u;
    hi -= lo;
    SpectralField r = project_high(traceless_part(outer_product(lo, lo, 2)), lam, sharp_cut());
    r += traceless_part(outer_product(lo, hi, 2));
    r += traceless_part(outer_product(hi, u, 2));
    if (z0) {
      size_t zi = z0->times.size();
      for (size_t j = 0; j < z0->times.size(); ++j)
        if (std::abs(z0->times[j] - t) < 1e-9) zi = j;
      if (zi == z0->times.size())
        throw std::invalid_argument("build_R0: noise series not aligned with stored times");
      SpectralField z = z0->z[zi];
      if (!(z.dims() == u.dims())) z = resample(z, u.dims());
      r += traceless_part(outer_product(u, z, 2));
      r += traceless_part(outer_product(z, u, 2));
      r += traceless_part(outer_product(z, z, 2));
    }
    out.times.push_back(t);
    out.r.push_back(symmetric_part(r));
  }
  return out;
}

std::vector<double> stress_decay_table(const StressSeries& series,
                                       const std::vector<double>& t_star_sweep) {
  std::vector<double> l1(series.r.size());
  for (size_t i = 0; i < series.r.size(); ++i) l1[i] = norm_lp(series.r[i], 1.0);
  std::vector<double> out;
  for (double ts : t_star_sweep) {
    double sup = 0.0;
    for (size_t i = 0; i < series.r.size(); ++i)
      if (series.times[i] <= ts + 1e-12) sup = std::max(sup, l1[i]);
    out.push_back(sup);
  }
  return out;
}

SpectralField taylor_green(int n) {
  SpectralField f({n, n, n}, 3);
  const cplx mi(0.0, -1.0);
  for (int s0 = -1; s0 <= 1; s0 += 2)
    for (int s1 = -1; s1 <= 1; s1 += 2)
      for (int s2 = -1; s2 <= 1; s2 += 2) {
        f.coeff(0, s0, s1, s2) = mi * double(s0) / 8.0;
        f.coeff(1, s0, s1, s2) = -mi * double(s1) / 8.0;
      }
  return f;
}

SpectralField random_initial(int n, double slope, uint64_t seed) {
  SpectralField f({n, n, n}, 3);
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2) {
        int k0 = freq_of(i0, n), k1 = freq_of(i1, n), k2 = freq_of(i2, n);
        if (k0 == 0 && k1 == 0 && k2 == 0) continue;
        if (2 * std::abs(k0) >= n || 2 * std::abs(k1) >= n || 2 * std::abs(k2) >= n) continue;
        bool canon = k0 != 0 ? k0 > 0 : (k1 != 0 ? k1 > 0 : k2 > 0);
        if (!canon) continue;
        double ksq = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
        double amp = std::pow(ksq, -slope / 2.0);
        cplx eta[3];
        for (int c = 0; c < 3; ++c) {
          double g0, g1;
          uint64_t key = (uint64_t(uint32_t(k0 + 4096)) << 26) |
                         (uint64_t(uint32_t(k1 + 4096)) << 13) | uint64_t(uint32_t(k2 + 4096));
          normal_pair(seed, 0x696e6974ULL, key, uint64_t(c), 0, g0, g1);
          eta[c] = amp * cplx(g0, g1);
        }
        cplx dot = (eta[0] * double(k0) + eta[1] * double(k1) + eta[2] * double(k2)) / ksq;
        for (int c = 0; c < 3; ++c) {
          double kc = c == 0 ? k0 : (c == 1 ? k1 : k2);
          cplx v = eta[c] - dot * kc;
          f.coeff(c, k0, k1, k2) = v;
          f.coeff(c, -k0, -k1, -k2) = std::conj(v);
        }
      }
  double nrm = norm_l2(f);
  if (nrm > 0.0) f *= 1.0 / nrm;
  return f;
}

}  // namespace lnse

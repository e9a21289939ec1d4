// Acceptance suite: one criterion per invocation, `acceptance <index> <cli>`.
// Each criterion prints a single PASS/FAIL line with the measured values and
// the stated tolerance; the exit code mirrors the verdict.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "lnse/ci_step.hpp"
#include "lnse/jets.hpp"
#include "lnse/lambda_nse.hpp"
#include "lnse/noise.hpp"
#include "lnse/operators.hpp"
#include "lnse/regression.hpp"
#include "lnse/schedule.hpp"
#include "test_util.hpp"
#include "toy_state.hpp"

using namespace lnse;
using namespace lnse::testutil;
namespace fs = std::filesystem;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

bool report(int idx, bool pass, const char* name, const std::string& detail) {
  std::printf("criterion %d %s %s: %s\n", idx, pass ? "PASS" : "FAIL", name, detail.c_str());
  return pass;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// 1. Energy balance of the truncated system on Taylor-Green data.
bool crit1() {
  Timer tm;
  SolverConfig cfg;
  cfg.nu = 0.05;
  cfg.t_end = 0.5;
  cfg.dt = 6.25e-4;
  cfg.schedule.cap = 4.0;
  cfg.geometric_levels = 2;
  SolverRun run = solve(taylor_green(64), cfg);
  auto res = energy_balance_residual(run);
  double worst = 0.0;
  for (double r : res) worst = std::max(worst, r);
  double secs = tm.seconds();
  bool pass = worst < 1e-5 && secs < 120.0;
  return report(1, pass, "energy balance",
                fmt("max relative residual %.3e (tol 1e-5), %.1f s (limit 120)", worst, secs));
}

// Desk solver configuration for the decay diagnostics: the canonical t^{-1/8}
// cutoff only spans one octave over the pinned T* sweep, so the desk runs use
// a steeper admissible schedule (nonincreasing, capped) that descends from 16
// to 2.8 across the sweep and exposes the decay mechanism at compressed
// scales.
SolverConfig decay_config() {
  SolverConfig cfg;
  cfg.nu = 1e-3;
  cfg.t_end = 0.125;
  cfg.dt = 4.8828125e-4;  // 2^-11
  cfg.schedule.cap = 12.0;
  cfg.schedule.floor_level = 1.0;
  cfg.schedule.exponent = -0.55;
  cfg.geometric_levels = 5;
  cfg.store_every = 4;
  return cfg;
}

// 2. Vanishing high-mode nonlinearity on rough data.
bool crit2() {
  SolverConfig cfg = decay_config();
  // band limit the rough data below the cap so the product spectrum starts
  // under the cutoff and the descending cutoff sweeps through it
  SolverRun run = solve(resample(random_initial(8, 1.1, 12), {32, 32, 32}), cfg);
  std::vector<double> sweep;
  for (int j = 8; j >= 3; --j) sweep.push_back(std::pow(2.0, -j));
  auto rows = high_mode_nonlinearity(run, sweep);
  bool increasing = true;
  std::string table;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (i && !(rows[i].sup_l1 > rows[i - 1].sup_l1)) increasing = false;
    table += fmt("%s%.3e", i ? " " : "", rows[i].sup_l1);
  }
  double lo = rows.front().sup_l1, hi = rows.back().sup_l1;
  bool pass = increasing && lo < 0.2 * hi;
  return report(2, pass, "high-mode nonlinearity",
                fmt("sup L1 over T* sweep: [%s], ratio %.3f (< 0.2), %s", table.c_str(),
                    lo / hi, increasing ? "strictly increasing" : "NOT increasing"));
}

// 3. Initial stress decay for regular data.
bool crit3() {
  SolverConfig cfg = decay_config();
  SolverRun run = solve(random_initial(32, 5.5, 13), cfg);
  StressSeries rs = build_R0(run);
  std::vector<double> sweep;
  for (int j = 8; j >= 3; --j) sweep.push_back(std::pow(2.0, -j));
  std::vector<double> decay = stress_decay_table(rs, sweep);
  double slope = fit_loglog(sweep, decay);
  bool pass = slope >= 0.25;
  return report(3, pass, "regular-data stress decay",
                fmt("fitted T*-exponent %.3f (need >= 0.25, target 0.3)", slope));
}

// 4. Geometric decomposition.
bool crit4() {
  const WaveVectorSet& set = WaveVectorSet::builtin_345();
  double worst = 0.0;
  bool positive = true;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Matrix3d e;
    double g[6];
    for (int i = 0; i < 3; ++i)
      normal_pair(18, uint64_t(trial), uint64_t(i), 0, 0, g[2 * i], g[2 * i + 1]);
    e << g[0], g[3], g[4], g[3], g[1], g[5], g[4], g[5], g[2];
    e /= e.norm();
    double u = uniform01(17, uint64_t(trial));
    Eigen::Matrix3d s = Eigen::Matrix3d::Identity() + (u * set.eps_u()) * e;
    std::array<double, 6> c = set.gamma_squared(s);
    Eigen::Matrix3d rec = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 6; ++k) {
      if (c[size_t(k)] <= 0.0) positive = false;
      const Eigen::Vector3d& k1 = set.frames()[size_t(k)].k1;
      rec += c[size_t(k)] * k1 * k1.transpose();
    }
    worst = std::max(worst, (rec - s).norm());
  }
  auto cert = set.certify_radius(100);
  bool pass = worst < 1e-12 && positive && cert.eps_u > 0.0;
  return report(4, pass, "geometric lemma",
                fmt("max reconstruction residual %.3e (tol 1e-12), coefficients %s, "
                    "radius certificate %.4f (> 0)",
                    worst, positive ? "all positive" : "NOT all positive", cert.eps_u));
}

// 5. Inverse divergence identity and the stationary-phase gain.
bool crit5() {
  SpectralField v = project_nonzero(random_field({24, 24, 24}, 3, 10, 22));
  v *= 1.0 / norm_l2(v);
  SpectralField r = inverse_divergence(v);
  double div_err = max_abs_diff(divergence(r), v);
  double sym = symmetry_defect(r);
  double tr = trace_linf(r);

  // || |grad|^-1 P_{!=0}(a P_{>=k} f) ||_L2 against k: f band-limited along
  // one axis so the high frequencies stay representable on a thin grid; the
  // spectrum must extend far past the sweep so tail truncation cannot bend
  // the fit
  Dims d{1024, 8, 8};
  SpectralField f(d, 1);
  for (int j = 1; j <= 400; ++j) {
    double g0, g1;
    normal_pair(31, uint64_t(j), 0, 0, 0, g0, g1);
    f.coeff(0, j, 0, 0) = 0.05 / std::sqrt(double(j)) * cplx(g0, g1);
  }
  f.enforce_hermitian();
  SpectralField a = random_field(d, 1, 3, 32);
  std::vector<double> ks{8, 16, 32, 64}, vals;
  for (double k : ks) {
    SpectralField hi = project_high(f, k, CutoffProfile{true});
    SpectralField prod = project_nonzero(pointwise_multiply(a, hi));
    SpectralField smooth(d, 1);
    prod.for_each_mode(0, [&](int k0, int k1, int k2, const cplx& c) {
      double x2 = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
      if (x2 > 0.0) smooth.coeff(0, k0, k1, k2) = c / (2.0 * M_PI * std::sqrt(x2));
    });
    vals.push_back(norm_l2(smooth));
  }
  double slope = fit_loglog(ks, vals);
  bool pass = div_err < 1e-13 && sym < 1e-13 && tr < 1e-12 && slope <= -0.9;
  return report(5, pass, "inverse divergence",
                fmt("per-mode div residual %.3e (tol 1e-13), symmetry %.3e, trace %.3e, "
                    "stationary-phase k-exponent %.3f (<= -0.9)",
                    div_err, sym, tr, slope));
}

// 6. Jet identities and the L^p scaling table.
bool crit6() {
  Timer tm;
  JetParams p = JetParams::desk(32.0, 1);
  p.shifts = choose_shifts(p);
  JetTerms jt = jet_terms(0, p, 2, 1);
  int need = required_grid(jt, p);
  Dims d{need + (need % 4 ? 2 : 0), need + (need % 4 ? 2 : 0), need + (need % 4 ? 2 : 0)};
  SpectralField w = jet_field(jt, p, JetField::w, d, 0.3);
  SpectralField wc = jet_field(jt, p, JetField::wc, d, 0.3);
  SpectralField wtc = jet_field(jt, p, JetField::wtc, d, 0.3);
  double wcwc = norm_l2(w + wtc - curl(wc));
  double wnorm = norm_l2(w);

  std::vector<double> lams{32, 64, 128, 256, 512};
  double worst_gap = 0.0;
  for (auto [lp, N, M] : std::vector<std::array<double, 3>>{
           {1, 0, 0}, {2, 0, 0}, {2, 1, 0}, {2, 0, 1}}) {
    SweepFit fit = verify_jet_scalings(lp, int(N), int(M), lams);
    worst_gap = std::max(worst_gap, std::abs(fit.fitted - fit.predicted));
  }
  double secs = tm.seconds();
  bool pass = wcwc < 1e-8 && std::abs(wnorm - 1.0) < 1e-6 && worst_gap < 0.05 && secs < 60.0;
  return report(6, pass, "jet identities and scalings",
                fmt("corrector residual %.3e (tol 1e-8), |norm-1| %.3e (tol 1e-6), worst "
                    "exponent gap %.4f (tol 0.05), %.1f s (limit 60)",
                    wcwc, std::abs(wnorm - 1.0), worst_gap, secs));
}

// 7. Decorrelation and mean oscillation.
bool crit7() {
  auto f = [](double x) { return std::abs(std::sin(M_PI * x)) + 0.5 - std::abs(x - 0.5); };
  auto g = [](double x) { return psi_rescaled(0.125, x); };
  double f1 = 0.0, f2 = 0.0;
  bool dec_ok = true;
  for (double p : {1.0, 2.0}) {
    SweepFit fit = verify_decorrelation(f, g, {4, 8, 16, 32}, p);
    (p == 1.0 ? f1 : f2) = fit.fitted;
    if (!(fit.fitted <= -1.0 / p + 0.1)) dec_ok = false;
  }
  Dims d{64, 64, 64};
  SpectralField a(d, 1);
  for (int k = 1; k <= 31; ++k) {
    // mixed-parity coefficients: an even profile would pair to zero against
    // the odd oscillation
    a.coeff(0, k, 0, 0) = cplx(0.25 / k, 0.25 / k);
    a.coeff(0, -k, 0, 0) = cplx(0.25 / k, -0.25 / k);
  }
  SpectralField v(d, 1);
  v.coeff(0, 1, 0, 0) = cplx(0.0, -0.5);
  v.coeff(0, -1, 0, 0) = cplx(0.0, 0.5);
  SweepFit mo = verify_mean_oscillation(a, v, {2, 4, 8, 16}, 1.0);
  bool pass = dec_ok && mo.fitted <= -0.9;
  return report(7, pass, "decorrelation and mean oscillation",
                fmt("sigma-exponents p=1: %.3f (<= -0.9), p=2: %.3f (<= -0.4); "
                    "mean-oscillation lambda-exponent %.3f (<= -0.9)",
                    f1, f2, mo.fitted));
}

// 8. Amplitude mean-part identity at 32^3.
bool crit8() {
  double worst = 0.0;
  for (uint64_t seed : {201, 202, 203}) {
    SpectralField r = random_stress({32, 32, 32}, 5, 1e-3, seed);
    SpectralField r_ell = mollify_space(r, 0.02);
    AmplitudeSlice amp = amplitudes(r_ell, 0.5, 0.02);
    worst = std::max(worst, amp.velcancel_l1);
  }
  bool pass = worst < 1e-8;
  return report(8, pass, "amplitude identity",
                fmt("worst mean-part L1 residual %.3e over 3 random stresses (tol 1e-8)", worst));
}

// 9. Full step at the desk preset plus the component exponent table.
bool crit9() {
  Timer tm;
  std::vector<ComponentFit> fits = component_norm_report({8, 16, 32, 64}, 0.1, 1e-2);
  bool all_negative = true, windows = true;
  double w1 = 0.0, w2 = 0.0, wc = 0.0;
  for (const ComponentFit& f : fits) {
    if (!f.has_fit) continue;
    if (!(f.fitted < 0.0)) all_negative = false;
    double gap = std::abs(f.fitted - f.predicted);
    if (f.name == "osc1") w1 = gap;
    if (f.name == "osc2") w2 = gap;
    if (f.name == "cor") wc = gap;
    if ((f.name == "osc1" || f.name == "osc2" || f.name == "cor") && gap >= 0.15)
      windows = false;
  }

  JetParams p = JetParams::desk(32.0, 1);
  p.shifts = choose_shifts(p);
  StepOptions opt;
  opt.analysis_times = {1.2};
  opt.gap_times = {0.3, 0.8, 1.2, 1.8};
  opt.n_psi = 1;
  opt.n_phi = 1;
  opt.kernel_nodes = 8;
  int need = 0;
  for (int k = 0; k < 6; ++k)
    need = std::max(need, required_grid(jet_terms(k, p, opt.n_psi, opt.n_phi), p));
  if (need % 2) ++need;
  ToyProblem toy = toy_problem({need, need, need}, p, 1.0 / 64.0);
  StepResult res = ci_step(toy.st, toy.e, opt);
  SpectralField u0 = toy.st.u(0.0);
  bool bitwise = res.u0_new.data().size() == u0.data().size();
  for (size_t i = 0; bitwise && i < u0.data().size(); ++i)
    if (res.u0_new.data()[i] != u0.data()[i]) bitwise = false;
  const SliceDiagnostics& sd = res.slices.at(0);
  bool floor_ok = sd.residual_l2 < 10.0 * sd.baseline_residual_l2 + 1e-12;
  double secs = tm.seconds();
  bool pass = all_negative && windows && bitwise && floor_ok && secs < 1800.0;
  return report(9, pass, "full step at desk preset",
                fmt("exponents %s, window gaps osc1 %.3f osc2 %.3f cor %.3f (tol 0.15), datum "
                    "%s, residual %.3e vs floor %.3e (factor limit 10), %.1f s (limit 1800)",
                    all_negative ? "all negative" : "NOT all negative", w1, w2, wc,
                    bitwise ? "bitwise preserved" : "MODIFIED", sd.residual_l2,
                    sd.baseline_residual_l2, secs));
}

// 10. Backward schedule on a synthetic decay table.
bool crit10() {
  std::vector<double> delta;
  for (int q = 0; q < 10; ++q) delta.push_back(delta_q(q));
  std::map<double, double> table;
  for (int i = 0; i <= 2000; ++i) {
    double t = 2.0 * std::pow(1e-4 / 2.0, double(i) / 2000.0);
    table[t] = std::pow(t, 35.0);
  }
  BackwardTimes bt = select_backward_times(table, 1e-4, delta, 2.0);
  bool ineq = bt.depth >= 4;
  for (int q = 0; q <= 4 && q + 1 < int(bt.t_prime.size()); ++q) {
    if (!(bt.t_prime[size_t(q + 1)] <= bt.t_prime[size_t(q)] / 2.0 + 1e-15)) ineq = false;
    if (!(table.at(bt.t_prime[size_t(q + 1)]) <= 1e-4 * delta[size_t(q + 3)] / 8.0 + 1e-30))
      ineq = false;
  }
  for (int q = 0; q <= 4 && size_t(q) + 1 < bt.t_back.size(); ++q)
    if (!(bt.t_back[size_t(q + 1)] < bt.t_back[size_t(q)])) ineq = false;
  for (int q = 0; q <= 4 && size_t(q) < bt.ell_prime.size(); ++q) {
    if (!(bt.ell_prime[size_t(q)] > 0.0)) ineq = false;
    if (size_t(q) + 2 < bt.t_back.size() &&
        !(bt.ell_prime[size_t(q)] <=
          (bt.t_back[size_t(q + 1)] - bt.t_back[size_t(q + 2)]) / 20.0))
      ineq = false;
  }

  std::vector<double> t_back(bt.t_back.begin(), bt.t_back.begin() + bt.ell_prime.size() + 1);
  EnergyProfile prof = build_energy_profile([](double) { return 1.0; }, delta, t_back,
                                            bt.ell_prime, 0.5);
  bool bands = true;
  try {
    validate_profile(prof, 10000);
  } catch (...) {
    bands = false;
  }
  EnergyProfile p0 = prof, p1 = prof;
  p0.theta = 0.0;
  p1.theta = 1.0;
  bool separated = true;
  double worst_sep = 1e300;
  const int m = int(t_back.size()) - 1;
  for (int q = 0; q < m; ++q) {
    double lo = t_back[size_t(q + 1)] - bt.ell_prime[size_t(q)];
    double hi = (q == 0) ? t_back[0] : t_back[size_t(q)];
    double best = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      double t = lo + (hi - lo) * double(i) / 4000.0;
      best = std::max(best, std::abs(p1.gap(t) - p0.gap(t)));
    }
    worst_sep = std::min(worst_sep, best / delta[size_t(q + 2)]);
    if (best < 0.25 * delta[size_t(q + 2)]) separated = false;
  }
  bool pass = ineq && bands && separated;
  return report(10, pass, "backward schedule",
                fmt("depth %d (need >= 4), inequalities %s, 10^4-point band sweep %s, family "
                    "separation %.3f x delta_{q+2} (need >= 0.25)",
                    bt.depth, ineq ? "hold" : "VIOLATED", bands ? "passes" : "FAILS",
                    worst_sep));
}

// 11. Stochastic convolution moments and per-mode variance.
bool crit11() {
  NoiseSpec spec;
  spec.seed = 11;
  MomentReport rep = moment_report(spec, {8, 8, 8}, 200, {2.0}, 0.1,
                                   {2.5e-4, 5e-4, 1e-3, 2e-3}, 2.5e-5);
  double fitted = rep.rows.at(0).fitted_t_exponent;
  bool moment_ok = std::abs(fitted - 0.9) < 0.15;

  // per-mode variance at a fixed time against the exact OU closed form,
  // averaged shell by shell over samples
  Dims d{8, 8, 8};
  const double T = 0.05, dt = 5e-3;
  const int n_samples = 500;
  std::map<int, double> shell_emp, shell_pred;
  std::vector<SpectralField> finals;
  for (int s = 0; s < n_samples; ++s) {
    NoiseSpec sp = spec;
    sp.seed = uint64_t(3000 + s);
    ConvolutionPath path = sample_convolution(sp, T, dt, d, 10);
    const SpectralField& z = path.z.back();
    z.for_each_mode(0, [&](int k0, int k1, int k2, const cplx&) {
      if (k0 == 0 && k1 == 0 && k2 == 0) return;
      if (std::abs(k0) == 4 || std::abs(k1) == 4 || std::abs(k2) == 4) return;
      int x2 = k0 * k0 + k1 * k1 + k2 * k2;
      if (x2 > 4) return;
      double e = 0.0;
      for (int c = 0; c < 3; ++c) e += std::norm(z.coeff(c, k0, k1, k2));
      shell_emp[x2] += e / n_samples;
    });
  }
  SpectralField probe(d, 1);
  probe.for_each_mode(0, [&](int k0, int k1, int k2, cplx&) {
    if (k0 == 0 && k1 == 0 && k2 == 0) return;
    if (std::abs(k0) == 4 || std::abs(k1) == 4 || std::abs(k2) == 4) return;
    int x2 = k0 * k0 + k1 * k1 + k2 * k2;
    if (x2 > 4) return;
    double g = spec.multiplier(std::sqrt(double(x2)));
    double eta = 4.0 * M_PI * M_PI * x2;
    shell_pred[x2] += 2.0 * g * g * (1.0 - std::exp(-2.0 * spec.nu * eta * T)) /
                      (2.0 * spec.nu * eta);
  });
  double worst_ratio = 0.0;
  for (const auto& [x2, pred] : shell_pred)
    worst_ratio = std::max(worst_ratio, std::abs(shell_emp[x2] / pred - 1.0));
  bool var_ok = worst_ratio < 0.05;
  bool pass = moment_ok && var_ok;
  return report(11, pass, "stochastic convolution",
                fmt("fitted T-exponent %.3f (target 0.9 +- 0.15, 200 samples); worst shell "
                    "variance deviation %.1f%% (tol 5%%)",
                    fitted, 100.0 * worst_ratio));
}

// 12. Determinism of the verification front end.
bool crit12(const char* cli) {
  fs::path base = fs::temp_directory_path() / "lnse_acceptance_12";
  fs::remove_all(base);
  fs::create_directories(base);
  auto run = [&](const char* tag) {
    fs::path out = base / tag;
    std::string cmd = std::string("\"") + cli + "\" verify-all --preset desk --seed 7 --out \"" +
                      out.string() + "\" > \"" + (base / (std::string(tag) + ".log")).string() +
                      "\" 2>&1";
    return std::system(cmd.c_str());
  };
  int rc1 = run("a"), rc2 = run("b");
  bool identical = rc1 == 0 && rc2 == 0;
  int n_csv = 0;
  std::string mismatch;
  if (identical)
    for (const auto& entry : fs::directory_iterator(base / "a")) {
      if (entry.path().extension() != ".csv") continue;
      ++n_csv;
      std::ifstream fa(entry.path(), std::ios::binary);
      std::ifstream fb(base / "b" / entry.path().filename(), std::ios::binary);
      std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
      std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
      if (sa.empty() || sa != sb) {
        identical = false;
        mismatch = entry.path().filename().string();
      }
    }
  bool pass = identical && n_csv > 0;
  return report(12, pass, "determinism",
                fmt("verify-all twice with seed 7: exits %d/%d, %d CSVs %s%s", rc1, rc2, n_csv,
                    identical ? "byte-identical" : "MISMATCH",
                    mismatch.empty() ? "" : (" in " + mismatch).c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1-12> [cli-path]\n");
    return 2;
  }
  int idx = std::atoi(argv[1]);
  const char* cli = argc > 2 ? argv[2] : "";
  bool pass = false;
  switch (idx) {
    case 1: pass = crit1(); break;
    case 2: pass = crit2(); break;
    case 3: pass = crit3(); break;
    case 4: pass = crit4(); break;
    case 5: pass = crit5(); break;
    case 6: pass = crit6(); break;
    case 7: pass = crit7(); break;
    case 8: pass = crit8(); break;
    case 9: pass = crit9(); break;
    case 10: pass = crit10(); break;
    case 11: pass = crit11(); break;
    case 12: pass = crit12(cli); break;
    default:
      std::fprintf(stderr, "unknown criterion %d\n", idx);
      return 2;
  }
  return pass ? 0 : 1;
}

// lambda-ci: batch front end for the toolkit.  Subcommands cover the module
// diagnostics (geometry, jets, solve, noise, schedule, step, sweep) plus a
// composite verify-all battery.  JSON in, CSV + LNSF out; every run writes a
// manifest echoing the resolved configuration.  Exit codes: 0 ok, 1 a
// verification failed, 2 usage or configuration error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lnse/ci_step.hpp"
#include "lnse/field_io.hpp"
#include "lnse/geometry.hpp"
#include "lnse/jets.hpp"
#include "lnse/lambda_nse.hpp"
#include "lnse/noise.hpp"
#include "lnse/operators.hpp"
#include "lnse/profiles.hpp"
#include "lnse/rng.hpp"
#include "lnse/schedule.hpp"

using nlohmann::json;
using namespace lnse;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr const char* kCsvSchema = "# lambda-ci csv schema 1";

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) : out_(path) {
    if (!out_) throw config_error("cannot open output file " + path.string());
    out_ << kCsvSchema << "\n" << header << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

struct Ctx {
  fs::path out = "out";
  int threads = 1;
  std::string preset = "desk";
  uint64_t seed = 1;
};

void write_manifest(const Ctx& ctx, const std::string& command, const json& cfg) {
  fs::create_directories(ctx.out);
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  // the timestamp lives only here so that every CSV stays byte-reproducible
  m["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  m["preset"] = ctx.preset;
  m["seed"] = ctx.seed;
  m["threads"] = ctx.threads;
  m["config"] = cfg;
  std::ofstream f(ctx.out / "manifest.json");
  f << m.dump(2) << "\n";
}

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) throw config_error(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw config_error(where + ": unknown key '" + it.key() + "'");
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("JSON parse error in ") + path + ": " + e.what());
  }
}

SpectralField random_scalar(Dims d, int band, uint64_t seed) {
  SpectralField f(d, 1);
  f.for_each_mode(0, [&](int k0, int k1, int k2, cplx&) {
    if (std::abs(k0) > band || std::abs(k1) > band || std::abs(k2) > band) return;
    if (k0 == 0 && k1 == 0 && k2 == 0) return;
    double g0, g1;
    normal_pair(seed, uint64_t(k0 + 128), uint64_t(k1 + 128), uint64_t(k2 + 128), 0, g0, g1);
    f.coeff(0, k0, k1, k2) = 0.5 * cplx(g0, g1);
  });
  f.enforce_hermitian();
  return f;
}

// --- pass/fail bookkeeping for jets verify and verify-all -------------------

struct CheckList {
  Csv csv;
  int failures = 0;
  bool quiet = false;
  explicit CheckList(const fs::path& path)
      : csv(path, "check,value,threshold,comparison,pass") {}
  // cmp: "lt" value < threshold, "abs_lt" |value| < threshold
  bool check(const std::string& name, double value, double threshold,
             const std::string& cmp = "lt") {
    double v = (cmp == "abs_lt") ? std::abs(value) : value;
    bool ok = v < threshold;
    if (!ok) ++failures;
    csv.row({name, fmt(value), fmt(threshold), cmp, ok ? "1" : "0"});
    if (!quiet)
      std::cout << (ok ? "PASS " : "FAIL ") << name << "  value=" << fmt(value)
                << "  threshold=" << fmt(threshold) << "\n";
    return ok;
  }
};

// --- geometry ---------------------------------------------------------------

int cmd_geometry_dump(const Ctx& ctx) {
  write_manifest(ctx, "geometry dump", json::object());
  const WaveVectorSet& set = WaveVectorSet::builtin_345();
  Csv frames(ctx.out / "geometry_frames.csv",
             "frame,kx,ky,kz,k1x,k1y,k1z,k2x,k2y,k2z");
  for (size_t i = 0; i < set.frames().size(); ++i) {
    const Frame& f = set.frames()[i];
    frames.row({std::to_string(i), fmt(f.k(0)), fmt(f.k(1)), fmt(f.k(2)), fmt(f.k1(0)),
                fmt(f.k1(1)), fmt(f.k1(2)), fmt(f.k2(0)), fmt(f.k2(1)), fmt(f.k2(2))});
  }
  Csv summary(ctx.out / "geometry_summary.csv",
              "n_lambda,eps_u,m_star,basis_condition,orthonormality_defect");
  summary.row({std::to_string(set.n_lambda()), fmt(set.eps_u()), fmt(set.m_star()),
               fmt(set.basis_condition_number()), fmt(set.frame_orthonormality_defect())});
  std::cout << "geometry: " << set.frames().size() << " frames, N_Lambda = "
            << set.n_lambda() << ", eps_u = " << fmt(set.eps_u()) << "\n";
  return 0;
}

// --- jets -------------------------------------------------------------------

int jets_scalings(const Ctx& ctx, CheckList& checks) {
  Csv csv(ctx.out / "jets_scalings.csv", "suite,p,n,m,lambda,measured,predicted,residual");
  const std::vector<double> lams{32, 64, 128, 256, 512};
  const std::vector<std::array<double, 3>> pts{{1, 0, 0}, {2, 0, 0}, {2, 1, 0}, {2, 0, 1}};
  for (auto [lp, n, m] : pts) {
    SweepFit fit = verify_jet_scalings(lp, int(n), int(m), lams);
    for (size_t i = 0; i < fit.xs.size(); ++i)
      csv.row({"scalings", fmt(lp), fmt(n), fmt(m), fmt(fit.xs[i]), fmt(fit.values[i]),
               fmt(fit.predicted), fmt(fit.fitted - fit.predicted)});
    std::ostringstream name;
    name << "jet_scaling_p" << lp << "_N" << n << "_M" << m;
    checks.check(name.str(), fit.fitted - fit.predicted, 0.05, "abs_lt");
  }
  return checks.failures;
}

int jets_decorrelation(const Ctx& ctx, CheckList& checks) {
  Csv csv(ctx.out / "jets_decorrelation.csv",
          "suite,p,sigma,measured,predicted,residual");
  auto f = [](double x) { return std::abs(std::sin(M_PI * x)) + 0.5 - std::abs(x - 0.5); };
  auto g = [](double x) { return psi_rescaled(0.125, x); };
  for (double p : {1.0, 2.0}) {
    SweepFit fit = verify_decorrelation(f, g, {4, 8, 16, 32}, p);
    for (size_t i = 0; i < fit.xs.size(); ++i)
      csv.row({"decorrelation", fmt(p), fmt(fit.xs[i]), fmt(fit.values[i]),
               fmt(fit.predicted), fmt(fit.fitted - fit.predicted)});
    checks.check("decorrelation_p" + std::to_string(int(p)), fit.fitted,
                 -1.0 / p + 0.1);
  }
  return checks.failures;
}

int jets_mean(const Ctx& ctx, CheckList& checks) {
  Csv csv(ctx.out / "jets_mean.csv", "suite,lambda,measured,predicted,residual");
  Dims d{64, 64, 64};
  // a needs 1/|xi| spectral decay across the whole band so the pairing with
  // the oscillation frequency shows the predicted rate; mixed-parity
  // coefficients because an even profile would pair to zero against the odd
  // oscillation
  SpectralField a(d, 1);
  for (int k = 1; k <= 31; ++k) {
    a.coeff(0, k, 0, 0) = cplx(0.25 / k, 0.25 / k);
    a.coeff(0, -k, 0, 0) = cplx(0.25 / k, -0.25 / k);
  }
  SpectralField v(d, 1);
  v.coeff(0, 1, 0, 0) = cplx(0.0, -0.5);
  v.coeff(0, -1, 0, 0) = cplx(0.0, 0.5);
  SweepFit fit = verify_mean_oscillation(a, v, {2, 4, 8, 16}, 1.0);
  for (size_t i = 0; i < fit.xs.size(); ++i)
    csv.row({"mean", fmt(fit.xs[i]), fmt(fit.values[i]), fmt(fit.predicted),
             fmt(fit.fitted - fit.predicted)});
  checks.check("mean_oscillation", fit.fitted, -0.9);
  return checks.failures;
}

int jets_wcwc(const Ctx& ctx, CheckList& checks) {
  Csv csv(ctx.out / "jets_wcwc.csv", "suite,t,measured,predicted,residual");
  JetParams p = JetParams::desk(32.0, 1);
  p.shifts = choose_shifts(p);
  JetTerms jt = jet_terms(0, p, 2, 1);
  int need = required_grid(jt, p);
  if (need % 2) ++need;
  Dims d{need, need, need};
  double worst_id = 0.0, worst_norm = 0.0;
  for (double t : {0.0, 0.3}) {
    SpectralField w = jet_field(jt, p, JetField::w, d, t);
    SpectralField wc = jet_field(jt, p, JetField::wc, d, t);
    SpectralField wtc = jet_field(jt, p, JetField::wtc, d, t);
    double id = norm_l2(w + wtc - curl(wc));
    double nn = std::abs(norm_l2(w) - 1.0);
    worst_id = std::max(worst_id, id);
    worst_norm = std::max(worst_norm, nn);
    csv.row({"wcwc", fmt(t), fmt(id), "0", fmt(id)});
    csv.row({"wcwc_norm", fmt(t), fmt(norm_l2(w)), "1", fmt(nn)});
  }
  checks.check("wcwc_identity", worst_id, 1e-8);
  checks.check("jet_unit_norm", worst_norm, 1e-6);
  return checks.failures;
}

int cmd_jets_verify(const Ctx& ctx, const std::string& suite) {
  write_manifest(ctx, "jets verify", json{{"suite", suite}});
  CheckList checks(ctx.out / "jets_checks.csv");
  if (suite == "scalings")
    jets_scalings(ctx, checks);
  else if (suite == "decorrelation")
    jets_decorrelation(ctx, checks);
  else if (suite == "mean")
    jets_mean(ctx, checks);
  else if (suite == "wcwc")
    jets_wcwc(ctx, checks);
  else
    throw config_error("unknown suite '" + suite +
                       "' (expected scalings, decorrelation, mean or wcwc)");
  return checks.failures ? 1 : 0;
}

// --- solve ------------------------------------------------------------------

int cmd_solve(const Ctx& ctx, const std::string& config_path) {
  json cfg = load_json(config_path);
  check_keys(cfg, {"grid", "nu", "T", "dt", "schedule", "init", "store"}, "solve config");
  SolverConfig sc;
  int grid = cfg.at("grid").get<int>();
  sc.nu = cfg.at("nu").get<double>();
  sc.t_end = cfg.at("T").get<double>();
  sc.dt = cfg.at("dt").get<double>();
  if (cfg.contains("schedule")) {
    check_keys(cfg["schedule"], {"cap", "floor"}, "solve config schedule");
    if (cfg["schedule"].contains("cap")) sc.schedule.cap = cfg["schedule"]["cap"].get<double>();
    if (cfg["schedule"].contains("floor"))
      sc.schedule.floor_level = cfg["schedule"]["floor"].get<double>();
  }
  if (cfg.contains("store")) {
    check_keys(cfg["store"], {"geometric_levels"}, "solve config store");
    if (cfg["store"].contains("geometric_levels"))
      sc.geometric_levels = cfg["store"]["geometric_levels"].get<int>();
  }
  SpectralField v0({grid, grid, grid}, 3);
  std::string kind = "taylor-green";
  if (cfg.contains("init")) {
    check_keys(cfg["init"], {"kind", "seed", "slope"}, "solve config init");
    kind = cfg["init"].value("kind", "taylor-green");
  }
  if (kind == "taylor-green") {
    v0 = taylor_green(grid);
  } else if (kind == "random") {
    double slope = cfg["init"].value("slope", 1.1);
    uint64_t seed = cfg["init"].value("seed", uint64_t(1));
    v0 = random_initial(grid, slope, seed);
  } else {
    throw config_error("init.kind must be taylor-green or random, got '" + kind + "'");
  }
  write_manifest(ctx, "solve", cfg);

  SolverRun run = solve(v0, sc);
  std::vector<double> balance = energy_balance_residual(run);

  Csv diag(ctx.out / "solve_diagnostics.csv", "t,energy,dissipation,balance_residual");
  for (size_t i = 0; i < run.times.size(); ++i)
    diag.row({fmt(run.times[i]), fmt(run.energy[i]), fmt(sc.nu * run.enstrophy[i]),
              fmt(balance[i])});

  StressSeries r0 = build_R0(run);
  Csv stored(ctx.out / "solve_stored.csv", "t,band_low_l2,band_high_l2,r0_l1,field_file");
  for (size_t i = 0; i < run.stored_times.size(); ++i) {
    double lam = sc.schedule(std::max(run.stored_times[i], sc.dt));
    const SpectralField& u = run.stored[i];
    double lo = norm_l2(project_band(u, 0.0, lam));
    double hi = norm_l2(u - project_band(u, 0.0, lam));
    char name[32];
    std::snprintf(name, sizeof name, "u_%03zu.lnsf", i);
    write_lnsf((ctx.out / name).string(), u);
    stored.row({fmt(run.stored_times[i]), fmt(lo), fmt(hi), fmt(norm_lp(r0.r[i], 1.0)),
                name});
  }
  std::cout << "solve: " << run.times.size() - 1 << " steps, max balance residual = "
            << fmt(*std::max_element(balance.begin(), balance.end())) << "\n";
  return 0;
}

// --- noise ------------------------------------------------------------------

int cmd_noise_report(const Ctx& ctx, const std::string& config_path) {
  json cfg = load_json(config_path);
  check_keys(cfg, {"grid", "samples", "p", "delta", "t_sweep", "dt", "seed", "nu",
                   "amplitude", "s_g"},
             "noise config");
  NoiseSpec spec;
  spec.seed = cfg.value("seed", uint64_t(1));
  spec.nu = cfg.value("nu", 1.0);
  spec.amplitude = cfg.value("amplitude", 1.0);
  spec.s_g = cfg.value("s_g", 2.0);
  int grid = cfg.value("grid", 8);
  int samples = cfg.value("samples", 100);
  double delta = cfg.value("delta", 0.1);
  double dt = cfg.at("dt").get<double>();
  std::vector<double> p_list = cfg.value("p", std::vector<double>{2.0});
  std::vector<double> t_sweep = cfg.at("t_sweep").get<std::vector<double>>();
  write_manifest(ctx, "noise report", cfg);

  MomentReport rep = moment_report(spec, {grid, grid, grid}, samples, p_list, delta,
                                   t_sweep, dt);
  Csv csv(ctx.out / "noise_report.csv",
          "p,delta,T,empirical_moment,predicted_bound,fitted_exponent");
  double t_max = *std::max_element(t_sweep.begin(), t_sweep.end());
  for (const MomentRow& row : rep.rows) {
    double scale = row.p > 1.0 ? std::pow(row.p - 1.0, row.p / 2.0) : 1.0;
    for (size_t i = 0; i < rep.t_sweep.size(); ++i) {
      double bound = scale * std::pow(row.empirical_l, row.p) *
                     std::pow(rep.t_sweep[i] / t_max, row.predicted_t_exponent);
      csv.row({fmt(row.p), fmt(delta), fmt(rep.t_sweep[i]), fmt(row.moment_l2[i]),
               fmt(bound), fmt(row.fitted_t_exponent)});
    }
    std::cout << "noise: p = " << row.p << " fitted T-exponent = "
              << fmt(row.fitted_t_exponent) << " (predicted "
              << fmt(row.predicted_t_exponent) << ")\n";
  }
  return 0;
}

// --- schedule ---------------------------------------------------------------

std::map<double, double> read_decay_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot open " + path);
  std::map<double, double> table;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double t, v;
    if (ss >> t >> v) table[t] = v;
  }
  if (table.size() < 2) throw config_error(path + ": expected rows of t,value");
  return table;
}

int cmd_schedule_plan(const Ctx& ctx, const std::string& r0_path, const std::string& mode) {
  if (mode != "desk") throw config_error("schedule plan supports --mode desk");
  std::map<double, double> table = read_decay_csv(r0_path);
  write_manifest(ctx, "schedule plan", json{{"r0", r0_path}, {"mode", mode}});

  std::vector<double> delta;
  for (int q = 0; q < 10; ++q) delta.push_back(delta_q(q));
  double horizon = table.rbegin()->first;
  BackwardTimes bt = select_backward_times(table, 1e-4, delta, horizon);

  json plan;
  plan["mode"] = mode;
  plan["horizon"] = horizon;
  plan["c_star"] = 1e-4;
  plan["depth"] = bt.depth;
  plan["t_prime"] = bt.t_prime;
  plan["t_back"] = bt.t_back;
  plan["ell_prime"] = bt.ell_prime;
  plan["delta"] = delta;
  {
    std::ofstream f(ctx.out / "plan.json");
    f << plan.dump(2) << "\n";
  }

  Csv csv(ctx.out / "schedule_report.csv",
          "q,t_prime,t_back,ell_prime,threshold,table_value,halving_ok,threshold_ok");
  for (size_t q = 0; q < bt.t_prime.size(); ++q) {
    double thr = q >= 1 ? 1e-4 * delta[q + 2] / 8.0 : 0.0;
    double val = q >= 1 ? table.at(bt.t_prime[q]) : 0.0;
    bool halve = q + 1 >= bt.t_prime.size() ||
                 bt.t_prime[q + 1] <= bt.t_prime[q] / 2.0 + 1e-15;
    csv.row({std::to_string(q), fmt(bt.t_prime[q]),
             q < bt.t_back.size() ? fmt(bt.t_back[q]) : "",
             q < bt.ell_prime.size() ? fmt(bt.ell_prime[q]) : "", fmt(thr), fmt(val),
             halve ? "1" : "0", (q < 1 || val <= thr) ? "1" : "0"});
  }

  std::vector<double> t_back(bt.t_back.begin(),
                             bt.t_back.begin() + std::min(bt.t_back.size(),
                                                          bt.ell_prime.size() + 1));
  EnergyProfile prof = build_energy_profile([](double) { return 1.0; }, delta, t_back,
                                            bt.ell_prime, 0.5);
  validate_profile(prof, 10000);
  std::cout << "schedule: depth " << bt.depth << ", profile band check passed\n";
  return 0;
}

// --- step -------------------------------------------------------------------

FieldSeries interpolated_series(std::shared_ptr<std::vector<double>> times,
                                std::shared_ptr<std::vector<SpectralField>> fields) {
  return [times, fields](double t) {
    const std::vector<double>& ts = *times;
    if (t <= ts.front()) return (*fields).front();
    if (t >= ts.back()) return (*fields).back();
    size_t i = size_t(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
    double t0 = ts[i - 1], t1 = ts[i];
    if (t == t0) return (*fields)[i - 1];
    double w = (t - t0) / (t1 - t0);
    SpectralField f = (*fields)[i - 1];
    f *= 1.0 - w;
    SpectralField g = (*fields)[i];
    g *= w;
    f += g;
    return f;
  };
}

int cmd_step(const Ctx& ctx, const std::string& state_dir, const std::string& spec_path) {
  json st_json = load_json((fs::path(state_dir) / "state.json").string());
  check_keys(st_json,
             {"version", "q", "nu", "ell", "t_end", "t_q1", "t_q2", "delta", "jet",
              "times", "energy", "has_z"},
             "state.json");
  json spec = load_json(spec_path);
  check_keys(spec,
             {"analysis_times", "gap_times", "n_psi", "n_phi", "fd_dt", "kernel_nodes",
              "p_exponent_eps", "keep_fields"},
             "step spec");
  write_manifest(ctx, "step", json{{"state", st_json}, {"spec", spec}});

  IterationState st;
  st.q = st_json.value("q", 0);
  st.nu = st_json.at("nu").get<double>();
  st.ell = st_json.at("ell").get<double>();
  st.t_end = st_json.value("t_end", 2.0);
  st.t_q1 = st_json.value("t_q1", 1.0);
  st.t_q2 = st_json.value("t_q2", 0.5);
  std::vector<double> delta = st_json.at("delta").get<std::vector<double>>();
  if (delta.size() != 3) throw config_error("state.json: delta must list 3 values");
  st.delta_q1 = delta[0];
  st.delta_q2 = delta[1];
  st.delta_q3 = delta[2];
  check_keys(st_json.at("jet"), {"lambda", "sigma"}, "state.json jet");
  st.jet = JetParams::desk(st_json["jet"].at("lambda").get<double>(),
                           st_json["jet"].value("sigma", 1));
  st.jet.shifts = choose_shifts(st.jet);

  auto times = std::make_shared<std::vector<double>>(
      st_json.at("times").get<std::vector<double>>());
  auto us = std::make_shared<std::vector<SpectralField>>();
  auto rs = std::make_shared<std::vector<SpectralField>>();
  auto zs = std::make_shared<std::vector<SpectralField>>();
  bool has_z = st_json.value("has_z", false);
  for (size_t i = 0; i < times->size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "u_%03zu.lnsf", i);
    us->push_back(read_lnsf_spectral((fs::path(state_dir) / buf).string()));
    std::snprintf(buf, sizeof buf, "r_%03zu.lnsf", i);
    rs->push_back(read_lnsf_spectral((fs::path(state_dir) / buf).string()));
    if (has_z) {
      std::snprintf(buf, sizeof buf, "z_%03zu.lnsf", i);
      zs->push_back(read_lnsf_spectral((fs::path(state_dir) / buf).string()));
    }
  }
  st.dims = us->front().dims();
  st.u = interpolated_series(times, us);
  st.r = interpolated_series(times, rs);
  if (has_z) st.z = interpolated_series(times, zs);

  std::vector<std::array<double, 2>> e_tab =
      st_json.at("energy").get<std::vector<std::array<double, 2>>>();
  auto e = [e_tab](double t) {
    if (t <= e_tab.front()[0]) return e_tab.front()[1];
    if (t >= e_tab.back()[0]) return e_tab.back()[1];
    for (size_t i = 1; i < e_tab.size(); ++i)
      if (t <= e_tab[i][0]) {
        double w = (t - e_tab[i - 1][0]) / (e_tab[i][0] - e_tab[i - 1][0]);
        return (1.0 - w) * e_tab[i - 1][1] + w * e_tab[i][1];
      }
    return e_tab.back()[1];
  };

  StepOptions opt;
  opt.analysis_times = spec.at("analysis_times").get<std::vector<double>>();
  opt.gap_times = spec.value("gap_times", std::vector<double>{});
  opt.n_psi = spec.value("n_psi", 3);
  opt.n_phi = spec.value("n_phi", 2);
  opt.fd_dt = spec.value("fd_dt", 1e-3);
  opt.kernel_nodes = spec.value("kernel_nodes", 16);
  opt.p_exponent_eps = spec.value("p_exponent_eps", 0.1);
  opt.keep_fields = spec.value("keep_fields", true);

  StepResult res = ci_step(st, e, opt);

  write_lnsf((ctx.out / "u_000.lnsf").string(), res.u0_new);
  write_lnsf((ctx.out / "u_first_analysis.lnsf").string(), res.u_new_first);
  for (const auto& [name, field] : res.component_fields)
    write_lnsf((ctx.out / ("r_" + name + ".lnsf")).string(), field);

  const std::map<std::string, double> predicted{
      {"lin", -1.0 / 7.0 + opt.p_exponent_eps}, {"osc1", -1.0 / 7.0 + opt.p_exponent_eps},
      {"osc2", -9.0 / 7.0 + opt.p_exponent_eps}, {"osc3", 0.0},
      {"cor", -1.0 / 7.0},                       {"com", 0.0},
      {"cut", 0.0},                              {"defect", 0.0}};
  Csv csv(ctx.out / "step_components.csv",
          "t,component,l1,lp,predicted_exponent,trace_inf,sym_defect");
  Csv summary(ctx.out / "step_summary.csv",
              "t,residual_l2,baseline_residual_l2,div_defect,velcancel_l1,curl_identity_l2");
  for (const SliceDiagnostics& d : res.slices) {
    for (const auto& [name, n] : d.components) {
      auto it = predicted.find(name);
      csv.row({fmt(d.t), name, fmt(n.l1), fmt(n.lp),
               it == predicted.end() ? "" : fmt(it->second), fmt(n.trace_inf),
               fmt(n.sym_defect)});
    }
    summary.row({fmt(d.t), fmt(d.residual_l2), fmt(d.baseline_residual_l2),
                 fmt(d.div_defect), fmt(d.velcancel_l1), fmt(d.curl_identity_l2)});
  }
  Csv gaps(ctx.out / "step_gaps.csv",
           "t,regime,gap,lo,hi,principal_mass,principal_pred,high_remainder");
  for (const GapRow& g : res.gaps)
    gaps.row({fmt(g.t), std::to_string(g.regime), fmt(g.gap), fmt(g.lo), fmt(g.hi),
              fmt(g.principal_mass), fmt(g.principal_pred), fmt(g.high_remainder)});

  json out_state = st_json;
  out_state["q"] = st.q + 1;
  out_state["parent"] = state_dir;
  {
    std::ofstream f(ctx.out / "state.json");
    f << out_state.dump(2) << "\n";
  }
  std::cout << "step: q = " << st.q << " -> " << st.q + 1 << ", residual = "
            << fmt(res.slices.empty() ? 0.0 : res.slices[0].residual_l2) << "\n";
  return 0;
}

// --- sweep ------------------------------------------------------------------

int cmd_sweep(const Ctx& ctx, std::vector<double> lambdas, double eps, double ell,
              double nu) {
  if (lambdas.empty()) lambdas = {8, 16, 32, 64};
  write_manifest(ctx, "sweep",
                 json{{"lambdas", lambdas}, {"eps", eps}, {"ell", ell}, {"nu", nu}});
  std::vector<ComponentFit> fits = component_norm_report(lambdas, eps, ell, nu);

  Csv values(ctx.out / "sweep_values.csv", "component,lambda,value");
  Csv table(ctx.out / "sweep_fits.csv", "component,fitted,predicted,has_fit");
  for (const ComponentFit& f : fits) {
    for (size_t i = 0; i < f.lambdas.size(); ++i)
      values.row({f.name, fmt(f.lambdas[i]), fmt(f.values[i])});
    table.row({f.name, fmt(f.fitted), fmt(f.predicted), f.has_fit ? "1" : "0"});
    if (f.has_fit)
      std::cout << "sweep: " << f.name << " fitted " << fmt(f.fitted) << " predicted "
                << fmt(f.predicted) << "\n";
  }
  return 0;
}

// --- verify-all -------------------------------------------------------------

struct ToyState {
  IterationState st;
  std::function<double(double)> e;
};

ToyState make_toy_state(Dims dims, const JetParams& jet, double ell, uint64_t seed) {
  const double amp = 0.05, gap = 24.0, two_pi = 2.0 * M_PI;
  SpectralField base = random_initial(8, 2.0, seed);
  auto u0 = std::make_shared<SpectralField>(resample(project_nonzero(base), dims));
  *u0 *= amp / norm_l2(*u0);
  auto a = std::make_shared<SpectralField>(inverse_divergence(
      project_nonzero(-two_pi * *u0)));
  auto b = std::make_shared<SpectralField>(inverse_divergence(
      project_nonzero(-1.0 * laplacian(*u0))));
  auto c = std::make_shared<SpectralField>(inverse_divergence(
      leray_project(project_nonzero(divergence(outer_product(*u0, *u0))))));
  ToyState toy;
  toy.st.u = [u0, two_pi](double t) {
    SpectralField f = *u0;
    f *= std::cos(two_pi * t);
    return f;
  };
  toy.st.r = [a, b, c, two_pi](double t) {
    SpectralField f = *a;
    f *= std::sin(two_pi * t);
    SpectralField g = *b;
    g *= std::cos(two_pi * t);
    SpectralField h = *c;
    h *= std::cos(two_pi * t) * std::cos(two_pi * t);
    f += g;
    f += h;
    return f;
  };
  double un2 = norm_l2(*u0) * norm_l2(*u0);
  toy.e = [un2, two_pi, gap](double t) {
    double cc = std::cos(two_pi * t);
    return cc * cc * un2 + gap;
  };
  toy.st.nu = 1.0;
  toy.st.ell = ell;
  toy.st.delta_q1 = 1e-3;
  toy.st.delta_q2 = 1e-6;
  toy.st.delta_q3 = 1e-9;
  toy.st.jet = jet;
  toy.st.dims = dims;
  return toy;
}

int cmd_verify_all(const Ctx& ctx) {
  if (ctx.preset != "desk")
    throw config_error("verify-all currently runs the desk preset only");
  write_manifest(ctx, "verify-all", json::object());
  CheckList checks(ctx.out / "verify_all.csv");

  {  // geometry
    const WaveVectorSet& set = WaveVectorSet::builtin_345();
    double worst = 0.0, min_coef = 1e30;
    for (int s = 0; s < 100; ++s) {
      Eigen::Matrix3d E = Eigen::Matrix3d::Zero();
      uint64_t key = counter_hash(ctx.seed, 0x67656f6dULL, uint64_t(s));
      int idx = 0;
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
          double g0, g1;
          normal_pair(key, uint64_t(idx), 0, 0, 0, g0, g1);
          (void)g1;
          E(i, j) = E(j, i) = g0;
          ++idx;
        }
      E /= E.norm();
      Eigen::Matrix3d S = Eigen::Matrix3d::Identity() + 0.99 * set.eps_u() * E;
      std::array<double, 6> coef = set.gamma_squared(S);
      Eigen::Matrix3d back = Eigen::Matrix3d::Zero();
      for (size_t k = 0; k < 6; ++k) {
        const Frame& fr = set.frames()[k];
        back += coef[k] * fr.k1 * fr.k1.transpose();
        min_coef = std::min(min_coef, coef[k]);
      }
      worst = std::max(worst, (back - S).norm());
    }
    checks.check("geometry_reconstruction", worst, 1e-12);
    checks.check("geometry_coefficients_positive", -min_coef, 0.0);
    checks.check("geometry_eps_u_positive", -set.eps_u(), 0.0);
  }

  {  // inverse divergence
    SpectralField v3({24, 24, 24}, 3);
    for (int c = 0; c < 3; ++c) {
      SpectralField s = random_scalar({24, 24, 24}, 10,
                                      counter_hash(ctx.seed, 0x646976ULL, uint64_t(c)));
      s.for_each_mode(0, [&](int k0, int k1, int k2, const cplx& cc) {
        v3.coeff(c, k0, k1, k2) = cc;
      });
    }
    v3 = project_nonzero(v3);
    v3 *= 1.0 / norm_l2(v3);
    SpectralField r = inverse_divergence(v3);
    SpectralField back = divergence(r);
    back -= v3;
    checks.check("inverse_divergence_residual", norm_linf(back), 1e-13);
    checks.check("inverse_divergence_symmetry", symmetry_defect(r), 1e-13);
    checks.check("inverse_divergence_trace", trace_linf(r), 1e-12);
  }

  jets_wcwc(ctx, checks);
  jets_scalings(ctx, checks);
  jets_decorrelation(ctx, checks);
  jets_mean(ctx, checks);

  {  // solver energy balance, desk scale
    SolverConfig sc;
    sc.nu = 0.05;
    sc.t_end = 0.2;
    sc.dt = 2e-4;
    sc.schedule.cap = 16.0;
    SolverRun run = solve(taylor_green(16), sc);
    std::vector<double> balance = energy_balance_residual(run);
    checks.check("solver_energy_balance",
                 *std::max_element(balance.begin(), balance.end()), 1e-5);
  }

  {  // noise: stationary variance and T-exponent
    NoiseSpec spec;
    spec.seed = counter_hash(ctx.seed, 0x6e6f69ULL, 0);
    Dims d{8, 8, 8};
    const double T = 0.5, dt = 1e-2;
    const int n_samples = 120;
    double mean_sq = 0.0;
    for (int s = 0; s < n_samples; ++s) {
      NoiseSpec sp = spec;
      sp.seed = counter_hash(spec.seed, 1, uint64_t(s));
      ConvolutionPath path = sample_convolution(sp, T, dt, d, 50);
      double n = norm_l2(path.z.back());
      mean_sq += n * n;
    }
    mean_sq /= n_samples;
    double predicted = 0.0;
    SpectralField probe(d, 1);
    probe.for_each_mode(0, [&](int k0, int k1, int k2, cplx&) {
      if (k0 == 0 && k1 == 0 && k2 == 0) return;
      if (std::abs(k0) == 4 || std::abs(k1) == 4 || std::abs(k2) == 4) return;
      double x2 = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
      double g = spec.multiplier(std::sqrt(x2));
      double eta = 4.0 * M_PI * M_PI * x2;
      predicted += 2.0 * g * g * (1.0 - std::exp(-2.0 * spec.nu * eta * T)) /
                   (2.0 * spec.nu * eta);
    });
    checks.check("noise_stationary_variance", mean_sq / predicted - 1.0, 0.15, "abs_lt");
    MomentReport rep = moment_report(spec, d, 100, {2.0}, 0.1,
                                     {2.5e-4, 5e-4, 1e-3, 2e-3}, 2.5e-5);
    checks.check("noise_t_exponent", rep.rows[0].fitted_t_exponent - 0.9, 0.15, "abs_lt");
  }

  {  // schedule: backward selection + profile bands
    std::vector<double> delta;
    for (int q = 0; q < 10; ++q) delta.push_back(delta_q(q));
    std::map<double, double> table;
    for (int i = 0; i <= 2000; ++i) {
      double t = 2.0 * std::pow(1e-4 / 2.0, double(i) / 2000.0);
      table[t] = std::pow(t, 35.0);
    }
    BackwardTimes bt = select_backward_times(table, 1e-4, delta, 2.0);
    checks.check("schedule_depth", 4.0 - bt.depth, 1.0);
    std::vector<double> t_back(bt.t_back.begin(),
                               bt.t_back.begin() + bt.ell_prime.size() + 1);
    EnergyProfile prof = build_energy_profile([](double) { return 1.0; }, delta, t_back,
                                              bt.ell_prime, 0.5);
    bool band_ok = true;
    try {
      validate_profile(prof, 10000);
    } catch (const std::exception&) {
      band_ok = false;
    }
    checks.check("schedule_profile_bands", band_ok ? 0.0 : 1.0, 0.5);
  }

  {  // one desk-scale step on the synthetic exact state
    JetParams jet = JetParams::desk(32.0, 1);
    jet.shifts = choose_shifts(jet);
    StepOptions opt;
    opt.analysis_times = {1.2};
    opt.gap_times = {0.3, 0.8, 1.2, 1.8};
    opt.n_psi = 1;
    opt.n_phi = 1;
    opt.kernel_nodes = 8;
    opt.keep_fields = false;
    int need = 0;
    for (int k = 0; k < 6; ++k)
      need = std::max(need, required_grid(jet_terms(k, jet, opt.n_psi, opt.n_phi), jet));
    if (need % 2) ++need;
    ToyState toy = make_toy_state({need, need, need}, jet, 1.0 / 64.0,
                                  counter_hash(ctx.seed, 0x746f79ULL, 0));
    StepResult res = ci_step(toy.st, toy.e, opt);
    const SliceDiagnostics& d = res.slices[0];
    SpectralField u0 = toy.st.u(0.0);
    bool bitwise = res.u0_new.data() == u0.data();
    checks.check("step_datum_bitwise", bitwise ? 0.0 : 1.0, 0.5);
    checks.check("step_residual_vs_baseline",
                 d.residual_l2 / std::max(d.baseline_residual_l2, 1e-300), 10.0);
    checks.check("step_div_defect", d.div_defect, 1e-11);
    checks.check("step_velcancel", d.velcancel_l1, 1e-8);
    checks.check("step_curl_identity", d.curl_identity_l2, 1e-9);
    Csv gaps(ctx.out / "verify_gaps.csv",
             "t,regime,gap,lo,hi,principal_mass,principal_pred,high_remainder");
    for (const GapRow& g : res.gaps)
      gaps.row({fmt(g.t), std::to_string(g.regime), fmt(g.gap), fmt(g.lo), fmt(g.hi),
                fmt(g.principal_mass), fmt(g.principal_pred), fmt(g.high_remainder)});
  }

  {  // component fits at the desk sweep
    std::vector<ComponentFit> fits = component_norm_report({8, 16, 32, 64}, 0.1, 1e-2);
    Csv table(ctx.out / "verify_component_fits.csv",
              "component,fitted,predicted,has_fit");
    for (const ComponentFit& f : fits) {
      table.row({f.name, fmt(f.fitted), fmt(f.predicted), f.has_fit ? "1" : "0"});
      if (!f.has_fit) continue;
      checks.check("component_negative_" + f.name, f.fitted, 0.0);
      if (f.name != "lin")
        checks.check("component_window_" + f.name, f.fitted - f.predicted, 0.15,
                     "abs_lt");
    }
  }

  std::cout << (checks.failures ? "verify-all: FAILURES: " : "verify-all: all checks passed (")
            << (checks.failures ? std::to_string(checks.failures)
                                : std::string("failures: 0)"))
            << "\n";
  return checks.failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lambda-ci: pseudo-spectral convex-integration toolkit front end"};
  app.require_subcommand(1);
  Ctx ctx;
  app.add_option("--out", ctx.out, "output directory")->capture_default_str();
  app.add_option("--threads", ctx.threads, "worker threads for sweeps")
      ->capture_default_str();
  app.add_option("--preset", ctx.preset, "parameter preset")
      ->check(CLI::IsMember({"desk", "paper", "h3"}))
      ->capture_default_str();
  app.add_option("--seed", ctx.seed, "base RNG seed")->capture_default_str();

  CLI::App* geometry = app.add_subcommand("geometry", "direction set tools");
  geometry->add_subcommand("dump", "write frames and constants as CSV");
  geometry->require_subcommand(1);

  CLI::App* jets = app.add_subcommand("jets", "intermittent jet diagnostics");
  CLI::App* jets_v = jets->add_subcommand("verify", "run one verification suite");
  std::string suite;
  jets_v->add_option("--suite", suite, "scalings, decorrelation, mean or wcwc")
      ->required();
  jets->require_subcommand(1);

  CLI::App* solve_cmd = app.add_subcommand("solve", "run the truncated solver");
  std::string solve_cfg;
  solve_cmd->add_option("--config", solve_cfg, "run configuration JSON")->required();

  CLI::App* noise = app.add_subcommand("noise", "stochastic convolution diagnostics");
  CLI::App* noise_r = noise->add_subcommand("report", "moment report");
  std::string noise_cfg;
  noise_r->add_option("--config", noise_cfg, "noise configuration JSON")->required();
  noise->require_subcommand(1);

  CLI::App* sched = app.add_subcommand("schedule", "backward schedule tools");
  CLI::App* sched_p = sched->add_subcommand("plan", "select backward times from a decay table");
  std::string r0_path, mode = "desk";
  sched_p->add_option("--r0", r0_path, "decay table CSV (t,value)")->required();
  sched_p->add_option("--mode", mode, "schedule mode")->capture_default_str();
  sched->require_subcommand(1);

  CLI::App* step = app.add_subcommand("step", "one convex-integration iteration");
  std::string state_dir, spec_path;
  step->add_option("--state", state_dir, "input state directory")->required();
  step->add_option("--spec", spec_path, "step options JSON")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "separable component-norm sweep");
  std::vector<double> lambdas;
  double sweep_eps = 0.1, sweep_ell = 1e-2, sweep_nu = 1.0;
  sweep->add_option("--lambdas", lambdas, "lambda sweep points");
  sweep->add_option("--eps", sweep_eps, "exponent epsilon")->capture_default_str();
  sweep->add_option("--ell", sweep_ell, "mollification scale")->capture_default_str();
  sweep->add_option("--nu", sweep_nu, "viscosity")->capture_default_str();

  app.add_subcommand("verify-all", "run the composite desk-scale check battery");

  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) {
    sub->fallthrough();
    for (CLI::App* nested : sub->get_subcommands([](CLI::App*) { return true; }))
      nested->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (geometry->parsed()) return cmd_geometry_dump(ctx);
    if (jets->parsed()) return cmd_jets_verify(ctx, suite);
    if (solve_cmd->parsed()) return cmd_solve(ctx, solve_cfg);
    if (noise->parsed()) return cmd_noise_report(ctx, noise_cfg);
    if (sched->parsed()) return cmd_schedule_plan(ctx, r0_path, mode);
    if (step->parsed()) return cmd_step(ctx, state_dir, spec_path);
    if (sweep->parsed()) return cmd_sweep(ctx, lambdas, sweep_eps, sweep_ell, sweep_nu);
    if (app.get_subcommand("verify-all")->parsed()) return cmd_verify_all(ctx);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

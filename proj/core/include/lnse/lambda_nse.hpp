#pragma once

// Solver for the Lambda-truncated Navier-Stokes system on T^3 and its
// diagnostic suite: energy balance, high-mode nonlinearity decay, regularity
// envelopes, refinement convergence, and the initial Reynolds stress.
//
// Time stepping: exact viscous integrating factor combined with RK4 for the
// truncated nonlinearity B(u, t) = -P_H P_{<Lambda(t)} div(P_{<Lambda} u
// tensor P_{<Lambda} u).  The nonlinearity is evaluated on a cropped grid
// sized from the Lambda cap, which keeps the cost independent of the state
// resolution.

#include <cstdint>
#include <optional>
#include <vector>

#include "lnse/field.hpp"
#include "lnse/noise.hpp"

namespace lnse {

// Lambda(t) = min(cap, max(floor, t^{exponent})), corners rounded by smooth
// power means; stays below t^{exponent} up to a 1e-4 shave wherever the
// middle branch is active.
struct LambdaSchedule {
  double cap = 1e9;
  double floor_level = 1.0;
  double exponent = -1.0 / 8.0;
  double operator()(double t) const;
};

struct SolverConfig {
  double nu = 1.0;
  double t_end = 1.0;
  double dt = 1e-2;
  LambdaSchedule schedule;
  int geometric_levels = 10;  // store fields at t_end * 2^{-j}, j = 0..levels
  int store_every = 0;        // additionally keep every k-th step if > 0
  double growth_guard = 1.0 + 1e-6;  // per-step energy growth tolerated
};

struct SolverRun {
  SolverConfig cfg;
  SpectralField v0;
  std::vector<double> times;      // every accepted step, starting at 0
  std::vector<double> energy;     // 0.5 ||u||_L2^2
  std::vector<double> enstrophy;  // ||grad u||_L2^2
  std::vector<double> stored_times;
  std::vector<SpectralField> stored;  // includes t = 0 and t = t_end

  const SpectralField& nearest(double t, double* actual = nullptr) const;
};

SolverRun solve(const SpectralField& v0, const SolverConfig& cfg);

// One evaluation of the truncated nonlinearity (exposed for skew-symmetry
// tests): returns -P_H P_{<Lambda} div(P_{<Lambda} u tensor P_{<Lambda} u)
// on the grid of u.
SpectralField truncated_nonlinearity(const SpectralField& u, double lambda);

// |0.5 ||u||^2 + nu int_0^t ||grad u||^2 - 0.5 ||v0||^2| / (0.5 ||v0||^2),
// dissipation integral by trapezoid on the step grid.
std::vector<double> energy_balance_residual(const SolverRun& run);

struct HighModeRow {
  double t_star = 0.0;
  double sup_l1 = 0.0;        // sup_{t <= t_star} ||P_{>=Lambda}(P_< u odot P_< u)||_L1
  double band_l2 = 0.0;       // ||P_{[Lambda/6, 2 Lambda]} u||_L2 at the deepest t <= t_star
};
std::vector<HighModeRow> high_mode_nonlinearity(const SolverRun& run,
                                                const std::vector<double>& t_star_sweep);

struct RegularityRow {
  double s = 0.0, t = 0.0;
  double hs_norm = 0.0;     // homogeneous H^s norm of u(t)
  double envelope = 0.0;    // (1 + t^{-s/2}) ||v0||_L2
};
struct RegularityReport {
  std::vector<RegularityRow> rows;
  std::vector<double> s_list;
  std::vector<double> fitted_exponent;  // log-log slope of norm vs t per s
  std::vector<double> constant;         // sup of norm / envelope per s
};
RegularityReport regularity_report(const SolverRun& run, const std::vector<double>& s_list,
                                   const std::vector<double>& t_list);

struct RefinementReport {
  std::vector<int> grids;
  std::vector<double> grid_distances;  // C_T L2 distance between consecutive grid runs
  std::vector<double> dts;
  std::vector<double> dt_distances;    // distance to the finest-dt run
  double dt_order = 0.0;               // observed order from dt halving
};
RefinementReport refinement_convergence(const SpectralField& v0, const SolverConfig& cfg,
                                        const std::vector<int>& grids,
                                        const std::vector<double>& dts);

struct StressSeries {
  std::vector<double> times;
  std::vector<SpectralField> r;  // symmetric traceless 9-tensors
};

// R0(t) from the stored trajectory; z series (if given) must be sampled at
// the stored times.
StressSeries build_R0(const SolverRun& run, const ConvolutionPath* z0 = nullptr);

// sup_{t <= t_star} ||R0(t)||_L1 per sweep entry.
std::vector<double> stress_decay_table(const StressSeries& series,
                                       const std::vector<double>& t_star_sweep);

// Initial data.
SpectralField taylor_green(int n);
// Random-phase divergence-free field with spectrum |xi|^{-slope}, unit L2.
SpectralField random_initial(int n, double slope, uint64_t seed);

}  // namespace lnse

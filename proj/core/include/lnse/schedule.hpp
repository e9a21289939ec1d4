#pragma once

// Backward bookkeeping: amplitude sequence delta_q, frequency and
// mollification recursions, backward time selection driven by a measured
// stress decay table, and smooth energy-profile construction.

#include <functional>
#include <map>
#include <vector>

namespace lnse {

struct ScheduleSpec {
  enum class Mode { desk, paper, h3 };
  Mode mode = Mode::desk;
  double a = 0.0, b = 0.0, eps = 1e-2, beta = 0.0;
  std::vector<double> delta;      // delta_q
  std::vector<double> lambda;     // lambda_q (empty entries refused in paper mode)
  std::vector<double> log_lambda; // natural logs, always filled
  std::vector<double> ell;        // ell_q
  std::vector<double> ell_prime;  // ell'_q
  std::vector<double> t_back;     // T_q, strictly decreasing
  double c_star = 1e-4;
  double horizon = 2.0;
};

// 10^{-3q}.
double delta_q(int q);

// Re-checks every ordering/spacing inequality of the active mode; throws on
// the first violation.  Idempotent, no side effects.
void validate(const ScheduleSpec& spec);

// delta_q = 10^{-3q}, ell_q = lambda_q^{-2}, T_q = horizon 2^{-q}; all
// orderings asserted.
ScheduleSpec desk_scale_params(const std::vector<double>& lambda_list, double horizon = 2.0);

// lambda_q = a^{b^q} bookkeeping in log space; numeric lambda refused (with
// an overflow error naming the level) when out of double range.
ScheduleSpec paper_faithful_params(double a, double b, double eps, int levels);
ScheduleSpec h3_params(double a, double b, double eps, double beta, int levels);

struct BackwardTimes {
  std::vector<double> t_prime;    // T'_q, T'_0 = horizon
  std::vector<double> t_back;     // T_q = T'_q - ell'_{q-1}
  std::vector<double> ell_prime;  // ell'_q
  int depth = 0;                  // deepest level produced
};

// Iterative threshold inversion on a nonincreasing decay table
// T* -> sup_{[0,T*]} ||R0||_L1: T'_{q+1} is the largest table point below
// T'_q / 2 whose value is <= c_star delta_{q+3} / 8.
BackwardTimes select_backward_times(const std::map<double, double>& r0_decay, double c_star,
                                    const std::vector<double>& delta, double horizon);

// e(t) = base(t) + gap(t) with gap held near 0.875 delta_{q+2} scale across
// the band intervals; theta in [0,1] selects one member of an infinite
// family, all satisfying the band constraints.
struct EnergyProfile {
  std::function<double(double)> base;
  std::vector<double> delta, t_back, ell;
  double theta = 0.5;
  double gap(double t) const;
  double operator()(double t) const { return base(t) + gap(t); }
};

EnergyProfile build_energy_profile(std::function<double(double)> base,
                                   const std::vector<double>& delta,
                                   const std::vector<double>& t_back,
                                   const std::vector<double>& ell, double theta = 0.5);

// Sweeps n points per band interval and throws (naming t) on any violation
// of 3/4 delta_{q+2} <= gap <= delta_{q+1}.
void validate_profile(const EnergyProfile& profile, int n_sweep);

}  // namespace lnse

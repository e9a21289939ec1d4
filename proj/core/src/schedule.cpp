#include "lnse/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lnse/geometry.hpp"

namespace lnse {

namespace {

// C-infinity step: 0 for s <= 0, 1 for s >= 1.
double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  double a = std::exp(-1.0 / s);
  double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("schedule: " + what); }

void require(bool ok, const std::string& what) {
  if (!ok) fail(what);
}

}  // namespace

double delta_q(int q) { return std::pow(10.0, -3.0 * q); }

void validate(const ScheduleSpec& spec) {
  require(spec.c_star > 0.0, "c_star must be positive");
  {
    WaveVectorSet set = WaveVectorSet::builtin_345();
    require(spec.c_star < std::min(1.0, set.eps_u() / 500.0), "c_star too large for eps_u");
  }
  for (size_t q = 0; q + 1 < spec.delta.size(); ++q)
    require(spec.delta[q + 1] < spec.delta[q], "delta must be strictly decreasing");
  for (size_t q = 3; q < spec.delta.size(); ++q)
    require(std::abs(spec.delta[q] / spec.delta[q - 1] - 1e-3) < 1e-12 ||
                spec.mode != ScheduleSpec::Mode::desk,
            "desk delta ratio must be 1e-3");
  for (size_t q = 0; q + 1 < spec.log_lambda.size(); ++q)
    require(spec.log_lambda[q + 1] > spec.log_lambda[q], "lambda must be strictly increasing");
  for (size_t q = 0; q + 1 < spec.t_back.size(); ++q)
    require(spec.t_back[q + 1] < spec.t_back[q], "T_q must be strictly decreasing");
  for (size_t q = 0; q < spec.ell.size(); ++q) {
    require(spec.ell[q] > 0.0, "ell must be positive");
    if (q + 2 < spec.t_back.size())
      require(spec.ell[q] <= (spec.t_back[q + 1] - spec.t_back[q + 2]) / 20.0,
              "ell_q must fit 1/20 of the following T gap");
  }
  for (size_t q = 0; q < spec.ell_prime.size(); ++q) {
    require(spec.ell_prime[q] > 0.0, "ell_prime must be positive");
    if (q + 2 < spec.t_back.size())
      require(spec.ell_prime[q] <= (spec.t_back[q + 1] - spec.t_back[q + 2]) / 20.0,
              "ell_prime_q must fit 1/20 of the following T gap");
  }
  if (spec.mode == ScheduleSpec::Mode::paper) {
    require(spec.eps > 0.0 && spec.eps < 1e-3, "paper mode needs 0 < eps < 1e-3");
    require(spec.b > 100.0 / spec.eps, "paper mode needs b > 100 / eps");
  }
  if (spec.mode == ScheduleSpec::Mode::h3) {
    require(spec.eps > 0.0 && spec.b > 1e4 / spec.eps, "h3 mode needs b > 1e4 / eps");
    long bi = std::lround(spec.b);
    require(std::abs(spec.b - double(bi)) < 1e-9 && bi % 2 == 0, "h3 mode needs b in 2N");
    require(spec.beta > 0.0 && spec.beta < 3.0 / (1000.0 * std::pow(spec.b, 4)),
            "h3 mode needs 0 < beta < 3 / (1000 b^4)");
  }
}

ScheduleSpec desk_scale_params(const std::vector<double>& lambda_list, double horizon) {
  ScheduleSpec spec;
  spec.mode = ScheduleSpec::Mode::desk;
  spec.horizon = horizon;
  spec.c_star = 1e-4;
  for (size_t q = 0; q + 1 < lambda_list.size(); ++q)
    if (lambda_list[q + 1] <= lambda_list[q])
      fail("desk lambda list must be strictly increasing");
  spec.lambda = lambda_list;
  for (double l : lambda_list) {
    if (l < 2.0) fail("desk lambda entries must be >= 2");
    spec.log_lambda.push_back(std::log(l));
    spec.ell.push_back(1.0 / (l * l));
    spec.ell_prime.push_back(1.0 / (l * l));
  }
  const int nq = int(lambda_list.size());
  for (int q = 0; q < nq + 4; ++q) spec.delta.push_back(delta_q(q));
  for (int q = 0; q < nq + 2; ++q) spec.t_back.push_back(horizon * std::pow(2.0, -q));
  validate(spec);
  return spec;
}

namespace {

ScheduleSpec log_space_params(ScheduleSpec::Mode mode, double a, double b, double eps,
                              double beta, int levels) {
  ScheduleSpec spec;
  spec.mode = mode;
  spec.a = a;
  spec.b = b;
  spec.eps = eps;
  spec.beta = beta;
  if (a <= 1.0) fail("a must exceed 1");
  const double max_log = std::log(1e308);
  for (int q = 0; q <= levels; ++q) {
    double lq = std::pow(b, q) * std::log(a);  // log lambda_q = b^q log a
    spec.log_lambda.push_back(lq);
    if (lq > max_log) {
      std::ostringstream msg;
      msg << "lambda_" << q << " is not representable in double precision (log10 = "
          << lq / std::log(10.0) << "); keep bookkeeping in log space";
      fail(msg.str());
    }
    spec.lambda.push_back(std::exp(lq));
  }
  validate(spec);
  return spec;
}

}  // namespace

ScheduleSpec paper_faithful_params(double a, double b, double eps, int levels) {
  if (!(eps > 0.0 && eps < 1e-3)) fail("paper mode needs 0 < eps < 1e-3");
  if (!(b > 100.0 / eps)) fail("paper mode needs b > 100 / eps");
  return log_space_params(ScheduleSpec::Mode::paper, a, b, eps, 0.0, levels);
}

ScheduleSpec h3_params(double a, double b, double eps, double beta, int levels) {
  long bi = std::lround(b);
  if (std::abs(b - double(bi)) > 1e-9 || bi % 2 != 0) fail("h3 mode needs b in 2N");
  if (!(eps > 0.0 && b > 1e4 / eps)) fail("h3 mode needs b > 1e4 / eps");
  if (!(beta > 0.0 && beta < 3.0 / (1000.0 * std::pow(b, 4))))
    fail("h3 mode needs 0 < beta < 3 / (1000 b^4)");
  return log_space_params(ScheduleSpec::Mode::h3, a, b, eps, beta, levels);
}

BackwardTimes select_backward_times(const std::map<double, double>& r0_decay, double c_star,
                                    const std::vector<double>& delta, double horizon) {
  if (r0_decay.empty()) fail("select_backward_times: empty decay table");
  if (delta.size() < 4) fail("select_backward_times: need delta through q+3");
  BackwardTimes out;
  out.t_prime.push_back(horizon);
  const int depth = int(delta.size()) - 3;  // deepest q with delta_{q+3} available
  for (int q = 0; q + 1 < depth + 1; ++q) {
    const double ceiling = out.t_prime[q] / 2.0;
    const double threshold = c_star * delta[q + 3] / 8.0;
    double best = -1.0;
    for (const auto& [t, value] : r0_decay) {
      if (t <= 0.0 || t > ceiling) continue;
      if (value <= threshold && t > best) best = t;
    }
    if (best < 0.0) {
      std::ostringstream msg;
      msg << "select_backward_times: decay table cannot reach level q = " << (q + 1)
          << " (need sup ||R0|| <= " << threshold << " at some T* <= " << ceiling << ")";
      fail(msg.str());
    }
    out.t_prime.push_back(best);
    out.depth = q + 1;
  }
  for (size_t q = 0; q + 2 < out.t_prime.size(); ++q)
    out.ell_prime.push_back((out.t_prime[q + 1] - out.t_prime[q + 2]) / 30.0);
  out.t_back.push_back(horizon);  // T_0 = T
  for (size_t q = 1; q < out.t_prime.size(); ++q) {
    double lag = (q - 1 < out.ell_prime.size()) ? out.ell_prime[q - 1] : 0.0;
    out.t_back.push_back(out.t_prime[q] - lag);
  }
  for (size_t q = 0; q + 1 < out.t_back.size(); ++q)
    if (out.t_back[q + 1] >= out.t_back[q]) fail("select_backward_times: T_q not decreasing");
  for (size_t q = 0; q < out.ell_prime.size(); ++q)
    if (q + 2 < out.t_back.size() &&
        out.ell_prime[q] > (out.t_back[q + 1] - out.t_back[q + 2]) / 20.0)
      fail("select_backward_times: ell_prime spacing margin violated");
  return out;
}

// gap(t): a descending ladder of plateaus joined by C-infinity log-space
// ramps.  Junction q sits at T_{q+1} and holds (0.76 + 0.23 theta) times
// delta_{q+2} across [T_{q+1} - ell_q, T_{q+1} + ell_q]; above the first
// junction the gap ramps up to (0.3 + 0.3 theta) delta_1, below the last it
// ramps to zero so e(0) = base(0) exactly.
double EnergyProfile::gap(double t) const {
  const int m = int(t_back.size()) - 1;  // junction count
  if (m < 1) return 0.0;
  const double f = 0.76 + 0.23 * theta;
  auto v = [&](int j) { return f * delta[j + 2]; };
  const double top = (0.3 + 0.3 * theta) * delta[1];
  const double t_top = std::min(t_back[1] + 2.0 * ell[0], 0.5 * (t_back[0] + t_back[1]));
  if (t >= t_top) return top;
  if (t > t_back[1] + ell[0]) {
    double s = (t - (t_back[1] + ell[0])) / (t_top - (t_back[1] + ell[0]));
    return std::exp(std::log(v(0)) + smoothstep(s) * (std::log(top) - std::log(v(0))));
  }
  for (int j = 0; j < m; ++j) {
    const double tj = t_back[j + 1];
    if (t >= tj - ell[j]) return v(j);  // plateau around junction j
    if (j + 1 < m) {
      const double lo = t_back[j + 2] + ell[j + 1];
      if (t > lo) {
        double s = (t - lo) / ((tj - ell[j]) - lo);
        return std::exp(std::log(v(j + 1)) + smoothstep(s) * (std::log(v(j)) - std::log(v(j + 1))));
      }
    }
  }
  const double edge = t_back[m] - ell[m - 1];
  if (t <= 0.0) return 0.0;
  return v(m - 1) * smoothstep(t / edge);
}

EnergyProfile build_energy_profile(std::function<double(double)> base,
                                   const std::vector<double>& delta,
                                   const std::vector<double>& t_back,
                                   const std::vector<double>& ell, double theta) {
  if (t_back.size() < 2) fail("build_energy_profile: need at least T_0, T_1");
  if (delta.size() < t_back.size() + 1) fail("build_energy_profile: delta too short");
  if (ell.size() + 1 < t_back.size()) fail("build_energy_profile: ell too short");
  if (theta < 0.0 || theta > 1.0) fail("build_energy_profile: theta outside [0,1]");
  EnergyProfile p;
  p.base = std::move(base);
  p.delta = delta;
  p.t_back = t_back;
  p.ell = ell;
  p.theta = theta;
  return p;
}

void validate_profile(const EnergyProfile& profile, int n_sweep) {
  const auto& T = profile.t_back;
  const auto& ell = profile.ell;
  const int m = int(T.size()) - 1;
  for (int q = 0; q < m; ++q) {
    double lo = T[q + 1] - ell[q];
    double hi = (q == 0) ? T[0] : T[q] + ell[q - 1];
    for (int i = 0; i <= n_sweep; ++i) {
      double t = lo + (hi - lo) * double(i) / n_sweep;
      double g = profile.gap(t);
      if (g < 0.75 * profile.delta[q + 2] - 1e-15 || g > profile.delta[q + 1] + 1e-15) {
        std::ostringstream msg;
        msg << "energy profile band violation at t = " << t << " (interval q = " << q
            << ", gap = " << g << ")";
        fail(msg.str());
      }
    }
  }
  if (std::abs(profile.gap(0.0)) > 0.0) fail("energy profile gap(0) must vanish");
}

}  // namespace lnse

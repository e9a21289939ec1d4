#pragma once

// Trace-class Wiener noise and the stochastic convolution
// z(t) = int_0^t e^{nu (t-s) Laplace} dW_s, advanced by the exact per-mode
// Ornstein-Uhlenbeck update.  All draws are counter-based on (seed, step,
// mode, component), so paths are bit-reproducible regardless of scheduling.

#include <cstdint>
#include <functional>
#include <vector>

#include "lnse/field.hpp"

namespace lnse {

struct NoiseSpec {
  double s_g = 2.0;         // default multiplier g(xi) = amplitude * |xi|^{-s_g}
  double amplitude = 1.0;
  double nu = 1.0;
  uint64_t seed = 1;
  std::function<double(double)> g;  // optional override, argument |xi|
  double multiplier(double xi_norm) const;
};

// Sum of |g|^2 over the retained divergence-free modes (2 dof per mode pair).
double noise_trace(const NoiseSpec& spec, Dims grid);

struct ConvolutionPath {
  std::vector<double> times;
  std::vector<SpectralField> z;
};

// store_every keeps every k-th step (plus t=0 and the final time).
ConvolutionPath sample_convolution(const NoiseSpec& spec, double T, double dt, Dims grid,
                                   int store_every = 1);

// Sharp projection P_{<= cutoff} applied per stored slice.
ConvolutionPath truncate_noise(const ConvolutionPath& path, double cutoff);

struct MomentRow {
  double p = 0.0;
  double moment_h = 0.0;      // E ||z||^p_{C_T H^{1-delta}}
  double empirical_l = 0.0;   // (moment_h / (p-1)^{p/2})^{1/p}
  std::vector<double> moment_l2;  // E ||z||^p_{C_t L^2} per T in t_sweep
  double fitted_t_exponent = 0.0;
  double predicted_t_exponent = 0.0;  // (1-delta) p / 2
};

struct MomentReport {
  std::vector<double> t_sweep;
  std::vector<MomentRow> rows;
};

MomentReport moment_report(const NoiseSpec& spec, Dims grid, int n_samples,
                           const std::vector<double>& p_list, double delta,
                           const std::vector<double>& t_sweep, double dt);

}  // namespace lnse

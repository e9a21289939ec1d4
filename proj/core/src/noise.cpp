#include "lnse/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lnse/operators.hpp"
#include "lnse/regression.hpp"
#include "lnse/rng.hpp"

namespace lnse {

namespace {

constexpr double kFourPiSq = 39.478417604357434475337963999505;

// Canonical representative of a Hermitian mode pair: first nonzero frequency
// component positive.
bool canonical(int k0, int k1, int k2) {
  if (k0 != 0) return k0 > 0;
  if (k1 != 0) return k1 > 0;
  return k2 > 0;
}

uint64_t mode_key(int k0, int k1, int k2) {
  return (uint64_t(uint32_t(k0 + 4096)) << 26) | (uint64_t(uint32_t(k1 + 4096)) << 13) |
         uint64_t(uint32_t(k2 + 4096));
}

bool retained(const Dims& d, int k0, int k1, int k2) {
  if (k0 == 0 && k1 == 0 && k2 == 0) return false;
  return 2 * std::abs(k0) < d.n0 && 2 * std::abs(k1) < d.n1 && 2 * std::abs(k2) < d.n2;
}

// One OU step for every mode: z <- decay * z + increment.
void ou_step(SpectralField& z, const NoiseSpec& spec, double dt, uint64_t step) {
  const Dims& d = z.dims();
  for (int i0 = 0; i0 < d.n0; ++i0)
    for (int i1 = 0; i1 < d.n1; ++i1)
      for (int i2 = 0; i2 < d.n2; ++i2) {
        int k0 = freq_of(i0, d.n0), k1 = freq_of(i1, d.n1), k2 = freq_of(i2, d.n2);
        if (!retained(d, k0, k1, k2) || !canonical(k0, k1, k2)) continue;
        double ksq = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
        double lam = kFourPiSq * ksq;
        double decay = std::exp(-spec.nu * lam * dt);
        double g = spec.multiplier(std::sqrt(ksq));
        double var = g * g * (1.0 - decay * decay) / (2.0 * spec.nu * lam);
        double sd = std::sqrt(0.5 * var);

        cplx eta[3];
        for (int c = 0; c < 3; ++c) {
          double g0, g1;
          normal_pair(spec.seed, step, mode_key(k0, k1, k2), uint64_t(c), 0, g0, g1);
          eta[c] = sd * cplx(g0, g1);
        }
        // Leray projection of the increment.
        cplx dot = (eta[0] * double(k0) + eta[1] * double(k1) + eta[2] * double(k2)) / ksq;
        for (int c = 0; c < 3; ++c) {
          double kc = c == 0 ? k0 : (c == 1 ? k1 : k2);
          cplx v = eta[c] - dot * kc;
          cplx& fwd = z.coeff(c, k0, k1, k2);
          fwd = decay * fwd + v;
          z.coeff(c, -k0, -k1, -k2) = std::conj(fwd);
        }
      }
}

}  // namespace

double NoiseSpec::multiplier(double xi_norm) const {
  if (g) return g(xi_norm);
  return amplitude * std::pow(xi_norm, -s_g);
}

double noise_trace(const NoiseSpec& spec, Dims grid) {
  double acc = 0.0;
  for (int i0 = 0; i0 < grid.n0; ++i0)
    for (int i1 = 0; i1 < grid.n1; ++i1)
      for (int i2 = 0; i2 < grid.n2; ++i2) {
        int k0 = freq_of(i0, grid.n0), k1 = freq_of(i1, grid.n1), k2 = freq_of(i2, grid.n2);
        if (!retained(grid, k0, k1, k2)) continue;
        double g = spec.multiplier(
            std::sqrt(double(k0) * k0 + double(k1) * k1 + double(k2) * k2));
        acc += 2.0 * g * g;  // two divergence-free polarizations
      }
  return acc;
}

ConvolutionPath sample_convolution(const NoiseSpec& spec, double T, double dt, Dims grid,
                                   int store_every) {
  if (dt <= 0.0 || T < 0.0) throw std::invalid_argument("sample_convolution: need dt > 0, T >= 0");
  if (store_every < 1) throw std::invalid_argument("sample_convolution: store_every >= 1");
  int n_steps = int(std::ceil(T / dt - 1e-12));
  ConvolutionPath path;
  SpectralField z(grid, 3);
  path.times.push_back(0.0);
  path.z.push_back(z);
  for (int s = 1; s <= n_steps; ++s) {
    double step_dt = std::min(dt, T - (s - 1) * dt);
    ou_step(z, spec, step_dt, uint64_t(s));
    if (s % store_every == 0 || s == n_steps) {
      path.times.push_back(std::min(s * dt, T));
      path.z.push_back(z);
    }
  }
  return path;
}

ConvolutionPath truncate_noise(const ConvolutionPath& path, double cutoff) {
  if (cutoff < 0.0) throw std::invalid_argument("truncate_noise: cutoff must be nonnegative");
  ConvolutionPath out;
  out.times = path.times;
  CutoffProfile sharp{true};
  for (const SpectralField& z : path.z)
    out.z.push_back(project_nonzero(project_below(z, cutoff + 1e-12, sharp)));
  return out;
}

MomentReport moment_report(const NoiseSpec& spec, Dims grid, int n_samples,
                           const std::vector<double>& p_list, double delta,
                           const std::vector<double>& t_sweep, double dt) {
  if (n_samples < 100) throw std::invalid_argument("moment_report: need at least 100 samples");
  if (t_sweep.empty()) throw std::invalid_argument("moment_report: empty T sweep");
  double t_max = *std::max_element(t_sweep.begin(), t_sweep.end());

  // Per sample: running maxima of the two norms over time, recorded at the
  // sweep times.
  std::vector<std::vector<double>> max_l2(size_t(n_samples),
                                          std::vector<double>(t_sweep.size(), 0.0));
  std::vector<double> max_h(size_t(n_samples), 0.0);
  for (int s = 0; s < n_samples; ++s) {
    NoiseSpec local = spec;
    local.seed = counter_hash(spec.seed, 0x6d6f6d656e74ULL, uint64_t(s));
    SpectralField z(grid, 3);
    int n_steps = int(std::ceil(t_max / dt - 1e-12));
    double run_l2 = 0.0;
    for (int step = 1; step <= n_steps; ++step) {
      ou_step(z, local, dt, uint64_t(step));
      double t = step * dt;
      run_l2 = std::max(run_l2, norm_l2(z));
      max_h[size_t(s)] = std::max(max_h[size_t(s)], norm_hs(z, 1.0 - delta));
      for (size_t i = 0; i < t_sweep.size(); ++i)
        if (t <= t_sweep[i] + 1e-12)
          max_l2[size_t(s)][i] = std::max(max_l2[size_t(s)][i], run_l2);
    }
  }

  MomentReport report;
  report.t_sweep = t_sweep;
  for (double p : p_list) {
    MomentRow row;
    row.p = p;
    double acc_h = 0.0;
    for (int s = 0; s < n_samples; ++s) acc_h += std::pow(max_h[size_t(s)], p);
    row.moment_h = acc_h / n_samples;
    row.empirical_l = p > 1.0
                          ? std::pow(row.moment_h / std::pow(p - 1.0, p / 2.0), 1.0 / p)
                          : std::pow(row.moment_h, 1.0 / p);
    for (size_t i = 0; i < t_sweep.size(); ++i) {
      double acc = 0.0;
      for (int s = 0; s < n_samples; ++s) acc += std::pow(max_l2[size_t(s)][i], p);
      row.moment_l2.push_back(acc / n_samples);
    }
    bool all_positive = true;
    for (double m : row.moment_l2) all_positive = all_positive && m > 0.0;
    row.fitted_t_exponent = all_positive ? fit_loglog(t_sweep, row.moment_l2) : 0.0;
    row.predicted_t_exponent = (1.0 - delta) * p / 2.0;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace lnse

#include "lnse/profiles.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "lnse/fft.hpp"

namespace lnse {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// exp-bump E(t) = exp(-1/(1-t^2)) on |t| < 1 and its first two derivatives.
double bump(double t) {
  double s = t * t;
  return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
}

double bump_d1(double t) {
  double s = t * t;
  if (s >= 1.0) return 0.0;
  double d = 1.0 - s;
  return bump(t) * (-2.0 * t) / (d * d);
}

double bump_d2(double t) {
  double s = t * t;
  if (s >= 1.0) return 0.0;
  double d = 1.0 - s;
  double u = -2.0 * t / (d * d);
  double du = (-2.0 - 6.0 * s) / (d * d * d);
  return bump(t) * (u * u + du);
}

// psi before normalization: d/dx E(8 (x - 1/2)), support (3/8, 5/8).
double psi_raw(double x) { return 8.0 * bump_d1(8.0 * (x - 0.5)); }

// phi before normalization: -Laplace of E(8 rho), rho measured from (1/2,1/2).
double phi_raw_radial(double rho) {
  if (rho < 1e-9) return -128.0 * bump_d2(0.0);
  return -(64.0 * bump_d2(8.0 * rho) + 8.0 * bump_d1(8.0 * rho) / rho);
}

double psi_scale() {
  static const double value = [] {
    const int n = 1 << 16;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = 0.375 + (i + 0.5) * (0.25 / n);
      double v = psi_raw(x);
      acc += v * v;
    }
    return 1.0 / std::sqrt(acc * 0.25 / n);
  }();
  return value;
}

double phi_scale() {
  static const double value = [] {
    const int n = 1 << 16;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double rho = (i + 0.5) * (0.125 / n);
      double v = phi_raw_radial(rho);
      acc += v * v * rho;
    }
    return 1.0 / std::sqrt(acc * kTwoPi * 0.125 / n);
  }();
  return value;
}

double frac(double x) { return x - std::floor(x); }

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v *= double(n - k + i) / i;
  return v;
}

double grid_lp(const std::vector<double>& vals, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : vals) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (double v : vals) acc += std::pow(std::abs(v), p);
  return std::pow(acc / double(vals.size()), 1.0 / p);
}

std::mutex cache_mutex;

}  // namespace

double Series1D::eval(double x) const {
  cplx acc = 0.0;
  for (int n = -n_max; n <= n_max; ++n)
    acc += coef(n) * std::polar(1.0, kTwoPi * n * x);
  return acc.real();
}

double Series1D::norm_l2() const {
  double s = 0.0;
  for (const cplx& v : c) s += std::norm(v);
  return std::sqrt(s);
}

double Series2D::eval(double y, double z) const {
  cplx acc = 0.0;
  for (int m1 = -n_max; m1 <= n_max; ++m1)
    for (int m2 = -n_max; m2 <= n_max; ++m2)
      acc += coef(m1, m2) * std::polar(1.0, kTwoPi * (m1 * y + m2 * z));
  return acc.real();
}

double Series2D::norm_l2() const {
  double s = 0.0;
  for (const cplx& v : c) s += std::norm(v);
  return std::sqrt(s);
}

double psi_profile(double x) { return psi_scale() * psi_raw(x); }

double phi_potential_profile(double y, double z) {
  double rho = std::hypot(y - 0.5, z - 0.5);
  return phi_scale() * bump(8.0 * rho);
}

double phi_profile(double y, double z) {
  double rho = std::hypot(y - 0.5, z - 0.5);
  return phi_scale() * phi_raw_radial(rho);
}

double psi_rescaled(double r, double x) {
  double u = frac(x) / r;
  return u <= 1.0 ? psi_profile(u) / std::sqrt(r) : 0.0;
}

double phi_potential_rescaled(double r, double y, double z) {
  double u = frac(y) / r, v = frac(z) / r;
  return (u <= 1.0 && v <= 1.0) ? phi_potential_profile(u, v) / r : 0.0;
}

double phi_rescaled(double r, double y, double z) {
  double u = frac(y) / r, v = frac(z) / r;
  return (u <= 1.0 && v <= 1.0) ? phi_profile(u, v) / r : 0.0;
}

Series1D psi_series(double r, int n_max) {
  if (r <= 0.0 || r > 1.0) throw std::invalid_argument("psi_series: r outside (0,1]");
  const int m = 1 << 15;
  if (2 * n_max >= m) throw std::invalid_argument("psi_series: n_max too large");
  std::vector<cplx> buf(m);
  for (int i = 0; i < m; ++i) buf[size_t(i)] = psi_rescaled(r, double(i) / m);
  fft1(buf, -1);
  Series1D s;
  s.n_max = n_max;
  s.c.resize(size_t(2 * n_max + 1));
  for (int n = -n_max; n <= n_max; ++n) s.c[size_t(n + n_max)] = buf[size_t((n + m) % m)];
  s.c[size_t(n_max)] = 0.0;  // exact mean zero
  double nrm = s.norm_l2();
  for (cplx& v : s.c) v /= nrm;
  return s;
}

Series2D phi_potential_series(double r, int n_max) {
  if (r <= 0.0 || r > 1.0) throw std::invalid_argument("phi_potential_series: r outside (0,1]");
  const int m = 1024;
  if (2 * n_max >= m) throw std::invalid_argument("phi_potential_series: n_max too large");
  std::vector<cplx> buf(size_t(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      buf[size_t(i) * m + j] = phi_potential_rescaled(r, double(i) / m, double(j) / m);
  fft2(buf, m, m, -1);
  Series2D s;
  s.n_max = n_max;
  s.c.resize(size_t(2 * n_max + 1) * (2 * n_max + 1));
  for (int m1 = -n_max; m1 <= n_max; ++m1)
    for (int m2 = -n_max; m2 <= n_max; ++m2)
      s.c[size_t((m1 + n_max) * (2 * n_max + 1) + m2 + n_max)] =
          buf[size_t(((m1 + m) % m) * m + (m2 + m) % m)];
  return s;
}

double psi_norm_const(int deriv, double p) {
  static std::map<std::pair<int, double>, double> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find({deriv, p});
  if (it != cache.end()) return it->second;

  const int m = 1 << 13;
  std::vector<cplx> buf(m);
  for (int i = 0; i < m; ++i) buf[size_t(i)] = psi_profile(double(i) / m);
  fft1(buf, -1);
  for (int i = 0; i < m; ++i)
    buf[size_t(i)] *= std::pow(cplx(0.0, kTwoPi * freq_of(i, m)), deriv);
  fft1(buf, 1);
  std::vector<double> vals(m);
  for (int i = 0; i < m; ++i) vals[size_t(i)] = buf[size_t(i)].real();
  double v = grid_lp(vals, p);
  cache[{deriv, p}] = v;
  return v;
}

double phi_norm_const(int grad_order, double p) {
  static std::map<std::pair<int, double>, double> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find({grad_order, p});
  if (it != cache.end()) return it->second;

  const int n = 1024;
  std::vector<cplx> base(size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      base[size_t(i) * n + j] = phi_profile(double(i) / n, double(j) / n);
  fft2(base, n, n, -1);

  std::vector<double> sq(size_t(n) * n, 0.0);
  std::vector<cplx> buf(size_t(n) * n);
  for (int a = 0; a <= grad_order; ++a) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double m1 = freq_of(i, n), m2 = freq_of(j, n);
        cplx d = std::pow(cplx(0.0, kTwoPi * m1), a) *
                 std::pow(cplx(0.0, kTwoPi * m2), grad_order - a);
        buf[size_t(i) * n + j] = d * base[size_t(i) * n + j];
      }
    fft2(buf, n, n, 1);
    double w = binomial(grad_order, a);
    for (size_t idx = 0; idx < buf.size(); ++idx) {
      double re = buf[idx].real();
      sq[idx] += w * re * re;
    }
  }
  std::vector<double> vals(sq.size());
  for (size_t idx = 0; idx < sq.size(); ++idx) vals[idx] = std::sqrt(sq[idx]);
  double v = grid_lp(vals, p);
  cache[{grad_order, p}] = v;
  return v;
}

JetProfiles build_profiles(int resolution) {
  if (resolution < (1 << 10)) throw std::invalid_argument("build_profiles: resolution below 2^10");
  JetProfiles jp;
  jp.resolution = resolution;
  jp.psi_samples.resize(size_t(resolution));
  for (int i = 0; i < resolution; ++i)
    jp.psi_samples[size_t(i)] = psi_profile(double(i) / resolution);
  jp.phi_samples.resize(size_t(resolution) * resolution);
  jp.phi_potential_samples.resize(size_t(resolution) * resolution);
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) {
      double y = double(i) / resolution, z = double(j) / resolution;
      jp.phi_samples[size_t(i) * resolution + j] = phi_profile(y, z);
      jp.phi_potential_samples[size_t(i) * resolution + j] = phi_potential_profile(y, z);
    }

  const int n1 = std::min(resolution, 1 << 15);
  std::vector<cplx> buf(size_t(n1), cplx{});
  for (int i = 0; i < n1; ++i) buf[size_t(i)] = psi_profile(double(i) / n1);
  fft1(buf, -1);
  jp.psi_hat.n_max = n1 / 2 - 1;
  jp.psi_hat.c.resize(size_t(2 * jp.psi_hat.n_max + 1));
  for (int n = -jp.psi_hat.n_max; n <= jp.psi_hat.n_max; ++n)
    jp.psi_hat.c[size_t(n + jp.psi_hat.n_max)] = buf[size_t((n + n1) % n1)];

  const int n2 = std::min(resolution, 1 << 10);
  std::vector<cplx> buf2(size_t(n2) * n2);
  for (int i = 0; i < n2; ++i)
    for (int j = 0; j < n2; ++j)
      buf2[size_t(i) * n2 + j] = phi_potential_profile(double(i) / n2, double(j) / n2);
  fft2(buf2, n2, n2, -1);
  jp.phi_potential_hat.n_max = n2 / 2 - 1;
  int w = 2 * jp.phi_potential_hat.n_max + 1;
  jp.phi_potential_hat.c.resize(size_t(w) * w);
  for (int m1 = -jp.phi_potential_hat.n_max; m1 <= jp.phi_potential_hat.n_max; ++m1)
    for (int m2 = -jp.phi_potential_hat.n_max; m2 <= jp.phi_potential_hat.n_max; ++m2)
      jp.phi_potential_hat.c[size_t((m1 + jp.phi_potential_hat.n_max) * w + m2 +
                                    jp.phi_potential_hat.n_max)] =
          buf2[size_t(((m1 + n2) % n2) * n2 + (m2 + n2) % n2)];
  return jp;
}

}  // namespace lnse

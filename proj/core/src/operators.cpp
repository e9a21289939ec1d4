#include "lnse/operators.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace lnse {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double exp_step(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

template <class M>
SpectralField apply_multiplier(const SpectralField& f, M&& mult) {
  SpectralField out = f;
  for (int c = 0; c < out.n_components(); ++c)
    out.for_each_mode(c, [&](int k0, int k1, int k2, cplx& v) {
      v *= mult(k0, k1, k2);
    });
  return out;
}

}  // namespace

double CutoffProfile::operator()(double r) const {
  if (sharp) return r < 1.0 ? 1.0 : 0.0;
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  double a = exp_step(2.0 - r), b = exp_step(r - 1.0);
  return a / (a + b);
}

SpectralField project_below(const SpectralField& f, double lambda,
                            const CutoffProfile& profile) {
  if (!(lambda > 0.0)) throw std::invalid_argument("project_below: Lambda must be positive");
  return apply_multiplier(f, [&](int k0, int k1, int k2) {
    double r = std::sqrt(double(k0) * k0 + double(k1) * k1 + double(k2) * k2) / lambda;
    return profile(r);
  });
}

SpectralField project_high(const SpectralField& f, double lambda,
                           const CutoffProfile& profile) {
  SpectralField out = f;
  out -= project_below(f, lambda, profile);
  return out;
}

SpectralField project_band(const SpectralField& f, double lo, double hi, bool sharp,
                           const CutoffProfile& profile) {
  if (!(lo >= 0.0) || !(hi > lo)) throw std::invalid_argument("project_band: need 0 <= lo < hi");
  if (sharp) {
    return apply_multiplier(f, [&](int k0, int k1, int k2) {
      double r = std::sqrt(double(k0) * k0 + double(k1) * k1 + double(k2) * k2);
      return (r >= lo && r < hi) ? 1.0 : 0.0;
    });
  }
  SpectralField out = project_below(f, hi / 2.0, profile);
  if (lo > 0.0) out -= project_below(f, lo, profile);
  return out;
}

SpectralField project_nonzero(const SpectralField& f) {
  SpectralField out = f;
  for (int c = 0; c < out.n_components(); ++c) out.coeff(c, 0, 0, 0) = 0.0;
  return out;
}

SpectralField leray_project(const SpectralField& f) {
  if (f.n_components() != 3) throw std::invalid_argument("leray_project: vector field required");
  SpectralField out = f;
  const Dims d = f.dims();
  for (int i0 = 0; i0 < d.n0; ++i0)
    for (int i1 = 0; i1 < d.n1; ++i1)
      for (int i2 = 0; i2 < d.n2; ++i2) {
        double k[3] = {double(freq_of(i0, d.n0)), double(freq_of(i1, d.n1)),
                       double(freq_of(i2, d.n2))};
        double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0.0) continue;
        cplx dot = k[0] * out.at(0, i0, i1, i2) + k[1] * out.at(1, i0, i1, i2) +
                   k[2] * out.at(2, i0, i1, i2);
        for (int c = 0; c < 3; ++c) out.at(c, i0, i1, i2) -= k[c] * dot / k2;
      }
  return out;
}

SpectralField inverse_divergence(const SpectralField& v, double mean_tol) {
  if (v.n_components() != 3)
    throw std::invalid_argument("inverse_divergence: vector field required");
  for (int c = 0; c < 3; ++c)
    if (std::abs(v.coeff(c, 0, 0, 0)) > mean_tol)
      throw std::invalid_argument("inverse_divergence: input has nonzero mean");
  SpectralField out(v.dims(), 9);
  const Dims d = v.dims();
  for (int i0 = 0; i0 < d.n0; ++i0)
    for (int i1 = 0; i1 < d.n1; ++i1)
      for (int i2 = 0; i2 < d.n2; ++i2) {
        double k[3] = {double(freq_of(i0, d.n0)), double(freq_of(i1, d.n1)),
                       double(freq_of(i2, d.n2))};
        double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0.0) continue;
        cplx vv[3] = {v.at(0, i0, i1, i2), v.at(1, i0, i1, i2), v.at(2, i0, i1, i2)};
        cplx kdotv = k[0] * vv[0] + k[1] * vv[1] + k[2] * vv[2];
        // d_k Delta^{-1} -> -i k_k / (2 pi |k|^2); div Delta^{-1} v -> -i (k.v)/(2 pi |k|^2)
        const cplx mi(0.0, -1.0);
        cplx grad_inv[3];
        for (int a = 0; a < 3; ++a) grad_inv[a] = mi * k[a] / (kTwoPi * k2);
        cplx divinv = mi * kdotv / (kTwoPi * k2);
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            cplx t = grad_inv[a] * vv[b] + grad_inv[b] * vv[a];
            double delta = (a == b) ? 1.0 : 0.0;
            t -= 0.5 * (delta + k[a] * k[b] / k2) * divinv;
            out.at(3 * a + b, i0, i1, i2) = t;
          }
      }
  return out;
}

SpectralField partial_derivative(const SpectralField& f, int axis) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("partial_derivative: bad axis");
  return apply_multiplier(f, [&](int k0, int k1, int k2) {
    int k = axis == 0 ? k0 : (axis == 1 ? k1 : k2);
    return cplx(0.0, kTwoPi * k);
  });
}

SpectralField gradient(const SpectralField& f) {
  if (f.n_components() == 1) {
    SpectralField out(f.dims(), 3);
    for (int a = 0; a < 3; ++a) {
      SpectralField da = partial_derivative(f, a);
      for (long i = 0; i < f.modes_per_component(); ++i)
        out.data()[a * f.modes_per_component() + i] = da.data()[i];
    }
    return out;
  }
  if (f.n_components() == 3) {
    SpectralField out(f.dims(), 9);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        SpectralField one(f.dims(), 1);
        for (long i = 0; i < f.modes_per_component(); ++i)
          one.data()[i] = f.data()[b * f.modes_per_component() + i];
        SpectralField da = partial_derivative(one, a);
        for (long i = 0; i < f.modes_per_component(); ++i)
          out.data()[(3 * a + b) * f.modes_per_component() + i] = da.data()[i];
      }
    return out;
  }
  throw std::invalid_argument("gradient: scalar or vector field required");
}

SpectralField divergence(const SpectralField& f) {
  const long n = f.modes_per_component();
  if (f.n_components() == 3) {
    SpectralField out(f.dims(), 1);
    for (int a = 0; a < 3; ++a) {
      SpectralField one(f.dims(), 1);
      for (long i = 0; i < n; ++i) one.data()[i] = f.data()[a * n + i];
      SpectralField da = partial_derivative(one, a);
      for (long i = 0; i < n; ++i) out.data()[i] += da.data()[i];
    }
    return out;
  }
  if (f.n_components() == 9) {
    SpectralField out(f.dims(), 3);
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a) {
        SpectralField one(f.dims(), 1);
        for (long i = 0; i < n; ++i) one.data()[i] = f.data()[(3 * a + b) * n + i];
        SpectralField da = partial_derivative(one, a);
        for (long i = 0; i < n; ++i) out.data()[b * n + i] += da.data()[i];
      }
    return out;
  }
  throw std::invalid_argument("divergence: vector or tensor field required");
}

SpectralField curl(const SpectralField& f) {
  if (f.n_components() != 3) throw std::invalid_argument("curl: vector field required");
  SpectralField out(f.dims(), 3);
  const Dims d = f.dims();
  for (int i0 = 0; i0 < d.n0; ++i0)
    for (int i1 = 0; i1 < d.n1; ++i1)
      for (int i2 = 0; i2 < d.n2; ++i2) {
        double k[3] = {double(freq_of(i0, d.n0)), double(freq_of(i1, d.n1)),
                       double(freq_of(i2, d.n2))};
        cplx v[3] = {f.at(0, i0, i1, i2), f.at(1, i0, i1, i2), f.at(2, i0, i1, i2)};
        const cplx i2pi(0.0, kTwoPi);
        out.at(0, i0, i1, i2) = i2pi * (k[1] * v[2] - k[2] * v[1]);
        out.at(1, i0, i1, i2) = i2pi * (k[2] * v[0] - k[0] * v[2]);
        out.at(2, i0, i1, i2) = i2pi * (k[0] * v[1] - k[1] * v[0]);
      }
  return out;
}

SpectralField laplacian(const SpectralField& f) {
  return apply_multiplier(f, [&](int k0, int k1, int k2) {
    double k2n = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
    return -kTwoPi * kTwoPi * k2n;
  });
}

SpectralField inverse_laplacian(const SpectralField& f) {
  return apply_multiplier(f, [&](int k0, int k1, int k2) {
    double k2n = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
    return k2n == 0.0 ? 0.0 : -1.0 / (kTwoPi * kTwoPi * k2n);
  });
}

SpectralField outer_product(const SpectralField& u, const SpectralField& v, int oversample) {
  if (u.n_components() != 3 || v.n_components() != 3 || !(u.dims() == v.dims()))
    throw std::invalid_argument("outer_product: matching vector fields required");
  PhysicalField pu = to_physical(u, oversample), pv = to_physical(v, oversample);
  PhysicalField prod(pu.dims, 9);
  const long n = pu.dims.size();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (long i = 0; i < n; ++i)
        prod.v[(3 * a + b) * n + i] = pu.v[a * n + i] * pv.v[b * n + i];
  return from_physical(prod, u.dims());
}

SpectralField pointwise_multiply(const SpectralField& a, const SpectralField& b,
                                 int oversample) {
  if (a.n_components() != 1 || !(a.dims() == b.dims()))
    throw std::invalid_argument("pointwise_multiply: scalar * field with matching dims");
  PhysicalField pa = to_physical(a, oversample), pb = to_physical(b, oversample);
  PhysicalField prod(pa.dims, b.n_components());
  const long n = pa.dims.size();
  for (int c = 0; c < b.n_components(); ++c)
    for (long i = 0; i < n; ++i) prod.v[c * n + i] = pa.v[i] * pb.v[c * n + i];
  return from_physical(prod, b.dims());
}

SpectralField traceless_part(const SpectralField& t) {
  if (t.n_components() != 9) throw std::invalid_argument("traceless_part: tensor required");
  SpectralField out = t;
  const long n = t.modes_per_component();
  for (long i = 0; i < n; ++i) {
    cplx tr = (t.data()[0 * n + i] + t.data()[4 * n + i] + t.data()[8 * n + i]) / 3.0;
    out.data()[0 * n + i] -= tr;
    out.data()[4 * n + i] -= tr;
    out.data()[8 * n + i] -= tr;
  }
  return out;
}

SpectralField transpose_tensor(const SpectralField& t) {
  if (t.n_components() != 9) throw std::invalid_argument("transpose_tensor: tensor required");
  SpectralField out = t;
  const long n = t.modes_per_component();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (long i = 0; i < n; ++i)
        out.data()[(3 * a + b) * n + i] = t.data()[(3 * b + a) * n + i];
  return out;
}

SpectralField symmetric_part(const SpectralField& t) {
  SpectralField out = transpose_tensor(t);
  out += t;
  out *= 0.5;
  return out;
}

double trace_linf(const SpectralField& t, int oversample) {
  if (t.n_components() != 9) throw std::invalid_argument("trace_linf: tensor required");
  SpectralField tr(t.dims(), 1);
  const long n = t.modes_per_component();
  for (long i = 0; i < n; ++i)
    tr.data()[i] = t.data()[0 * n + i] + t.data()[4 * n + i] + t.data()[8 * n + i];
  return norm_linf(tr, oversample);
}

double symmetry_defect(const SpectralField& t) {
  if (t.n_components() != 9) throw std::invalid_argument("symmetry_defect: tensor required");
  double worst = 0.0;
  const long n = t.modes_per_component();
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      for (long i = 0; i < n; ++i)
        worst = std::max(worst,
                         std::abs(t.data()[(3 * a + b) * n + i] - t.data()[(3 * b + a) * n + i]));
  return worst;
}

double norm_l2(const SpectralField& f) {
  double s = 0.0;
  for (const auto& v : f.data()) s += std::norm(v);
  return std::sqrt(s);
}

double norm_lp(const SpectralField& f, double p, int oversample) {
  if (!(p >= 1.0)) throw std::invalid_argument("norm_lp: p >= 1 required");
  if (std::isinf(p)) return norm_linf(f, oversample);
  PhysicalField ph = to_physical(f, oversample);
  const long n = ph.dims.size();
  double s = 0.0;
  for (long i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (int c = 0; c < ph.n_components; ++c) m2 += ph.v[c * n + i] * ph.v[c * n + i];
    s += std::pow(m2, p / 2.0);
  }
  return std::pow(s / double(n), 1.0 / p);
}

double norm_linf(const SpectralField& f, int oversample) {
  PhysicalField ph = to_physical(f, oversample);
  const long n = ph.dims.size();
  double worst = 0.0;
  for (long i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (int c = 0; c < ph.n_components; ++c) m2 += ph.v[c * n + i] * ph.v[c * n + i];
    worst = std::max(worst, m2);
  }
  return std::sqrt(worst);
}

double norm_hs(const SpectralField& f, double s) {
  double acc = 0.0;
  for (int c = 0; c < f.n_components(); ++c)
    f.for_each_mode(c, [&](int k0, int k1, int k2, const cplx& v) {
      double k2n = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
      acc += std::pow(1.0 + k2n, s) * std::norm(v);
    });
  return std::sqrt(acc);
}

double norm_hs_dot(const SpectralField& f, double s) {
  double acc = 0.0;
  for (int c = 0; c < f.n_components(); ++c)
    f.for_each_mode(c, [&](int k0, int k1, int k2, const cplx& v) {
      double k2n = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
      if (k2n == 0.0) return;
      acc += std::pow(kTwoPi * kTwoPi * k2n, s) * std::norm(v);
    });
  return std::sqrt(acc);
}

double norm_w1d1(const SpectralField& f, double delta, int oversample) {
  SpectralField g = apply_multiplier(f, [&](int k0, int k1, int k2) {
    double k2n = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
    return std::pow(1.0 + kTwoPi * kTwoPi * k2n, (1.0 - delta) / 2.0);
  });
  return norm_lp(g, 1.0, oversample);
}

std::array<double, 9> mean_tensor(const SpectralField& t) {
  std::array<double, 9> m{};
  for (int c = 0; c < t.n_components() && c < 9; ++c) m[c] = t.coeff(c, 0, 0, 0).real();
  return m;
}

double div_defect(const SpectralField& v) {
  if (v.n_components() != 3) throw std::invalid_argument("div_defect: vector field required");
  double worst = 0.0;
  v.for_each_mode(0, [&](int k0, int k1, int k2, const cplx&) {
    cplx dot = double(k0) * v.coeff(0, k0, k1, k2) + double(k1) * v.coeff(1, k0, k1, k2) +
               double(k2) * v.coeff(2, k0, k1, k2);
    worst = std::max(worst, std::abs(dot));
  });
  return worst;
}

namespace {

// Radial Fourier transform of the unit-radius 3D exp-bump, normalized to 1 at
// s=0:  K(s) = int b(r) r^2 sinc(s r) dr / int b(r) r^2 dr,  b(r)=exp(-1/(1-r^2)).
double kernel_transform_raw(double s) {
  constexpr int kN = 512;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < kN; ++i) {
    double r = (i + 0.5) / kN;
    double b = std::exp(-1.0 / (1.0 - r * r));
    double sr = s * r;
    double sinc = std::abs(sr) < 1e-8 ? 1.0 - sr * sr / 6.0 : std::sin(sr) / sr;
    num += b * r * r * sinc;
    den += b * r * r;
  }
  return num / den;
}

}  // namespace

double mollifier_transform(double s) { return kernel_transform_raw(kTwoPi * s); }

SpectralField mollify_space(const SpectralField& f, double ell) {
  if (!(ell > 0.0)) throw std::invalid_argument("mollify_space: ell > 0 required");
  std::unordered_map<long, double> cache;  // keyed by |xi|^2 (integer)
  return apply_multiplier(f, [&](int k0, int k1, int k2) {
    long k2n = long(k0) * k0 + long(k1) * k1 + long(k2) * k2;
    auto it = cache.find(k2n);
    if (it != cache.end()) return it->second;
    double m = mollifier_transform(std::sqrt(double(k2n)) * ell);
    cache.emplace(k2n, m);
    return m;
  });
}

}  // namespace lnse

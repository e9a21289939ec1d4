#include "lnse/field.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "lnse/fft.hpp"

namespace lnse {

void SpectralField::zero_nyquist() {
  for (int c = 0; c < nc_; ++c)
    for (int i0 = 0; i0 < dims_.n0; ++i0)
      for (int i1 = 0; i1 < dims_.n1; ++i1)
        for (int i2 = 0; i2 < dims_.n2; ++i2)
          if (i0 == dims_.n0 / 2 || i1 == dims_.n1 / 2 || i2 == dims_.n2 / 2)
            at(c, i0, i1, i2) = 0.0;
}

void SpectralField::enforce_hermitian() {
  zero_nyquist();
  for (int c = 0; c < nc_; ++c) {
    for_each_mode(c, [&](int k0, int k1, int k2, cplx& v) {
      // Visit each +/- pair once (lexicographic tie-break).
      if (std::make_tuple(k0, k1, k2) < std::make_tuple(-k0, -k1, -k2)) return;
      cplx& w = coeff(c, -k0, -k1, -k2);
      if (&v == &w) {  // self-conjugate mode: force real
        v = cplx(v.real(), 0.0);
        return;
      }
      cplx avg = 0.5 * (v + std::conj(w));
      v = avg;
      w = std::conj(avg);
    });
  }
}

double SpectralField::hermitian_defect() const {
  double worst = 0.0;
  for (int c = 0; c < nc_; ++c) {
    for_each_mode(c, [&](int k0, int k1, int k2, const cplx& v) {
      cplx w = coeff(c, -k0, -k1, -k2);
      worst = std::max(worst, std::abs(v - std::conj(w)));
    });
  }
  return worst;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (!same_shape(o)) throw std::invalid_argument("field +=: shape mismatch");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}
SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (!same_shape(o)) throw std::invalid_argument("field -=: shape mismatch");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}
SpectralField& SpectralField::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

PhysicalField to_physical(const SpectralField& f, int oversample) {
  if (oversample < 1) throw std::invalid_argument("to_physical: oversample >= 1 required");
  const Dims d = f.dims();
  const Dims m{d.n0 * oversample, d.n1 * oversample, d.n2 * oversample};
  PhysicalField out(m, f.n_components());
  std::vector<cplx> cube(m.size());
  for (int c = 0; c < f.n_components(); ++c) {
    std::fill(cube.begin(), cube.end(), cplx{0.0, 0.0});
    f.for_each_mode(c, [&](int k0, int k1, int k2, const cplx& v) {
      if (v == cplx{0.0, 0.0}) return;
      long idx = (long(index_of(k0, m.n0)) * m.n1 + index_of(k1, m.n1)) * m.n2 +
                 index_of(k2, m.n2);
      cube[idx] = v;
    });
    fft3(cube, m.n0, m.n1, m.n2, +1);
    for (long i = 0; i < m.size(); ++i) out.v[long(c) * m.size() + i] = cube[i].real();
  }
  return out;
}

SpectralField from_physical(const PhysicalField& p, Dims target) {
  const Dims m = p.dims;
  if (target.n0 > m.n0 || target.n1 > m.n1 || target.n2 > m.n2)
    throw std::invalid_argument("from_physical: target dims exceed sample grid");
  SpectralField out(target, p.n_components);
  std::vector<cplx> cube(m.size());
  for (int c = 0; c < p.n_components; ++c) {
    for (long i = 0; i < m.size(); ++i) cube[i] = cplx(p.v[long(c) * m.size() + i], 0.0);
    fft3(cube, m.n0, m.n1, m.n2, -1);
    out.for_each_mode(c, [&](int k0, int k1, int k2, cplx& v) {
      if (std::abs(2 * k0) >= target.n0 || std::abs(2 * k1) >= target.n1 ||
          std::abs(2 * k2) >= target.n2)
        return;  // Nyquist excluded
      long idx = (long(index_of(k0, m.n0)) * m.n1 + index_of(k1, m.n1)) * m.n2 +
                 index_of(k2, m.n2);
      v = cube[idx];
    });
  }
  return out;
}

SpectralField resample(const SpectralField& f, Dims target) {
  SpectralField out(target, f.n_components());
  for (int c = 0; c < f.n_components(); ++c)
    out.for_each_mode(c, [&](int k0, int k1, int k2, cplx& v) {
      const Dims& d = f.dims();
      if (std::abs(2 * k0) >= std::min(d.n0, target.n0) ||
          std::abs(2 * k1) >= std::min(d.n1, target.n1) ||
          std::abs(2 * k2) >= std::min(d.n2, target.n2))
        return;
      v = f.coeff(c, k0, k1, k2);
    });
  return out;
}

}  // namespace lnse

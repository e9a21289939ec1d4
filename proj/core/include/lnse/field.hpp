#pragma once

// Periodic field algebra on T^3 = [0,1]^3.
//
// A SpectralField stores Fourier coefficients c(xi) of a real-valued field
//   f(x) = sum_xi c(xi) exp(2 pi i xi . x)
// for lattice frequencies |xi_i| < dims_i/2 (the Nyquist plane is excluded
// and kept at zero).  Components are stored component-major; within one
// component the cube uses FFTW wrap-around ordering (index i corresponds to
// frequency i for i <= n/2 and i-n otherwise).

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lnse {

using cplx = std::complex<double>;

inline int freq_of(int index, int n) { return index <= n / 2 ? index : index - n; }
inline int index_of(int freq, int n) { return freq >= 0 ? freq : freq + n; }

struct Dims {
  int n0 = 0, n1 = 0, n2 = 0;
  bool operator==(const Dims&) const = default;
  long size() const { return long(n0) * n1 * n2; }
  int operator[](int i) const { return i == 0 ? n0 : (i == 1 ? n1 : n2); }
};

// Real samples on a uniform grid over [0,1]^3 (row-major, component-major).
struct PhysicalField {
  Dims dims;
  int n_components = 0;
  std::vector<double> v;

  PhysicalField() = default;
  PhysicalField(Dims d, int nc) : dims(d), n_components(nc), v(d.size() * nc, 0.0) {}

  double& at(int c, int i0, int i1, int i2) {
    return v[((long(c) * dims.n0 + i0) * dims.n1 + i1) * dims.n2 + i2];
  }
  double at(int c, int i0, int i1, int i2) const {
    return v[((long(c) * dims.n0 + i0) * dims.n1 + i1) * dims.n2 + i2];
  }
};

class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(Dims d, int nc) : dims_(d), nc_(nc), c_(d.size() * nc, cplx{0.0, 0.0}) {
    if (d.n0 <= 0 || d.n1 <= 0 || d.n2 <= 0 || d.n0 % 2 || d.n1 % 2 || d.n2 % 2)
      throw std::invalid_argument("SpectralField: dims must be positive even integers");
    if (nc != 1 && nc != 3 && nc != 9)
      throw std::invalid_argument("SpectralField: n_components must be 1, 3 or 9");
  }
  static SpectralField zeros(int n, int nc) { return SpectralField({n, n, n}, nc); }

  const Dims& dims() const { return dims_; }
  int n_components() const { return nc_; }
  long modes_per_component() const { return dims_.size(); }

  // Raw cube access (wrap-around ordering).
  cplx& at(int c, int i0, int i1, int i2) {
    return c_[((long(c) * dims_.n0 + i0) * dims_.n1 + i1) * dims_.n2 + i2];
  }
  cplx at(int c, int i0, int i1, int i2) const {
    return c_[((long(c) * dims_.n0 + i0) * dims_.n1 + i1) * dims_.n2 + i2];
  }
  // Access by signed frequency.
  cplx& coeff(int c, int k0, int k1, int k2) {
    return at(c, index_of(k0, dims_.n0), index_of(k1, dims_.n1), index_of(k2, dims_.n2));
  }
  cplx coeff(int c, int k0, int k1, int k2) const {
    return at(c, index_of(k0, dims_.n0), index_of(k1, dims_.n1), index_of(k2, dims_.n2));
  }

  std::vector<cplx>& data() { return c_; }
  const std::vector<cplx>& data() const { return c_; }

  // Visit every stored mode of one component: f(k0,k1,k2, coeff_ref).
  template <class F>
  void for_each_mode(int c, F&& f) {
    for (int i0 = 0; i0 < dims_.n0; ++i0)
      for (int i1 = 0; i1 < dims_.n1; ++i1)
        for (int i2 = 0; i2 < dims_.n2; ++i2)
          f(freq_of(i0, dims_.n0), freq_of(i1, dims_.n1), freq_of(i2, dims_.n2),
            at(c, i0, i1, i2));
  }
  template <class F>
  void for_each_mode(int c, F&& f) const {
    for (int i0 = 0; i0 < dims_.n0; ++i0)
      for (int i1 = 0; i1 < dims_.n1; ++i1)
        for (int i2 = 0; i2 < dims_.n2; ++i2)
          f(freq_of(i0, dims_.n0), freq_of(i1, dims_.n1), freq_of(i2, dims_.n2),
            at(c, i0, i1, i2));
  }

  // Zero every coefficient on a Nyquist plane (|k_i| = n_i/2).
  void zero_nyquist();
  // Symmetrize so that c(-xi) = conj(c(xi)) exactly (real-valued field).
  void enforce_hermitian();
  double hermitian_defect() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  bool same_shape(const SpectralField& o) const {
    return dims_ == o.dims_ && nc_ == o.nc_;
  }

 private:
  Dims dims_{};
  int nc_ = 0;
  std::vector<cplx> c_;
};

// Transforms.  to_physical evaluates the trigonometric polynomial on an
// (oversample * dims) grid; from_physical recovers the coefficients of all
// represented modes (exact round trip for band-limited data).
PhysicalField to_physical(const SpectralField& f, int oversample = 1);
SpectralField from_physical(const PhysicalField& p, Dims target);

// Copy onto a different grid: shared modes are kept, new modes are zero,
// modes that no longer fit are dropped (Nyquist planes stay zero).
SpectralField resample(const SpectralField& f, Dims target);

}  // namespace lnse

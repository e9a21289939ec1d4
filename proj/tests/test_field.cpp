#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lnse/field.hpp"
#include "lnse/rng.hpp"

using namespace lnse;

namespace {

SpectralField random_scalar(Dims d, int band, uint64_t seed) {
  SpectralField f(d, 1);
  f.for_each_mode(0, [&](int k0, int k1, int k2, cplx& v) {
    if (std::abs(k0) > band || std::abs(k1) > band || std::abs(k2) > band) return;
    double g0, g1;
    normal_pair(seed, uint64_t(k0 + 64), uint64_t(k1 + 64), uint64_t(k2 + 64), 0, g0, g1);
    v = cplx(g0, g1);
  });
  f.zero_nyquist();
  f.enforce_hermitian();
  return f;
}

double direct_eval(const SpectralField& f, double x, double y, double z) {
  cplx acc = 0.0;
  f.for_each_mode(0, [&](int k0, int k1, int k2, cplx v) {
    acc += v * std::exp(cplx(0.0, 2.0 * M_PI * (k0 * x + k1 * y + k2 * z)));
  });
  return acc.real();
}

}  // namespace

TEST_CASE("physical round trip is exact") {
  Dims d{16, 16, 16};
  SpectralField f = random_scalar(d, 7, 3);
  SpectralField g = from_physical(to_physical(f), d);
  double err = 0.0;
  for (size_t i = 0; i < f.data().size(); ++i) err = std::max(err, std::abs(f.data()[i] - g.data()[i]));
  CHECK(err < 1e-13);
}

TEST_CASE("oversampled synthesis matches the trigonometric polynomial") {
  Dims d{8, 8, 8};
  SpectralField f = random_scalar(d, 3, 5);
  PhysicalField p = to_physical(f, 2);
  int n = p.dims.n0;
  double err = 0.0;
  for (int i : {0, 3, 7, 11}) {
    double v = direct_eval(f, double(i) / n, double(2 * i % n) / n, double(3 * i % n) / n);
    err = std::max(err, std::abs(v - p.at(0, i, 2 * i % n, 3 * i % n)));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("hermitian enforcement produces real samples") {
  Dims d{12, 12, 12};
  SpectralField f(d, 1);
  f.coeff(0, 1, 2, 3) = cplx(0.7, 0.4);  // deliberately non-hermitian
  CHECK(f.hermitian_defect() > 0.1);
  f.enforce_hermitian();
  CHECK(f.hermitian_defect() < 1e-15);
}

TEST_CASE("resample preserves shared modes and drops the rest") {
  SpectralField f = random_scalar({16, 16, 16}, 7, 9);
  SpectralField g = resample(f, {24, 24, 24});
  CHECK(g.coeff(0, 5, -3, 2) == f.coeff(0, 5, -3, 2));
  CHECK(g.coeff(0, 10, 0, 0) == cplx(0.0, 0.0));
  SpectralField h = resample(g, {16, 16, 16});
  double err = 0.0;
  for (size_t i = 0; i < f.data().size(); ++i) err = std::max(err, std::abs(f.data()[i] - h.data()[i]));
  CHECK(err == 0.0);
}

TEST_CASE("odd dims are refused") {
  CHECK_THROWS(SpectralField({15, 16, 16}, 1));
  CHECK_THROWS(SpectralField({16, 16, 16}, 2));
}

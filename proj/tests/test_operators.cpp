#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lnse/operators.hpp"
#include "test_util.hpp"

using namespace lnse;
using namespace lnse::testutil;

TEST_CASE("leray projection kills divergence and is idempotent") {
  SpectralField v = random_field({24, 24, 24}, 3, 10, 21);
  SpectralField pv = leray_project(v);
  CHECK(div_defect(pv) < 1e-12);
  CHECK(max_abs_diff(pv, leray_project(pv)) < 1e-13);
}

TEST_CASE("inverse divergence satisfies div(Rv) = v per mode") {
  SpectralField v = project_nonzero(random_field({24, 24, 24}, 3, 10, 22));
  SpectralField r = inverse_divergence(v);
  CHECK(max_abs_diff(divergence(r), v) < 1e-13);
  CHECK(symmetry_defect(r) < 1e-13);
  CHECK(trace_linf(r) < 1e-12);
}

TEST_CASE("inverse divergence rejects fields with mean") {
  SpectralField v({8, 8, 8}, 3);
  v.coeff(0, 0, 0, 0) = 0.5;
  CHECK_THROWS(inverse_divergence(v));
}

TEST_CASE("vector calculus identities") {
  SpectralField s = random_field({20, 20, 20}, 1, 8, 23);
  CHECK(norm_l2(curl(gradient(s))) < 1e-10);
  SpectralField v = random_field({20, 20, 20}, 3, 8, 24);
  CHECK(norm_l2(divergence(curl(v))) < 1e-10);
  SpectralField lap = divergence(gradient(s));
  CHECK(max_abs_diff(lap, laplacian(s)) < 1e-11);
  SpectralField w = project_nonzero(s);
  CHECK(max_abs_diff(laplacian(inverse_laplacian(w)), w) < 1e-12);
}

TEST_CASE("dealiased product of band-limited fields is exact") {
  Dims d{24, 24, 24};
  SpectralField a = random_field(d, 1, 5, 25);
  SpectralField b = random_field(d, 1, 5, 26);
  SpectralField ab = pointwise_multiply(a, b);
  // compare a few convolution coefficients directly
  for (auto [k0, k1, k2] : {std::array<int, 3>{0, 0, 0}, {3, -2, 1}, {7, 7, -7}}) {
    cplx direct = 0.0;
    a.for_each_mode(0, [&](int m0, int m1, int m2, cplx va) {
      if (std::abs(k0 - m0) > 5 || std::abs(k1 - m1) > 5 || std::abs(k2 - m2) > 5) return;
      direct += va * b.coeff(0, k0 - m0, k1 - m1, k2 - m2);
    });
    CHECK(std::abs(ab.coeff(0, k0, k1, k2) - direct) < 1e-12);
  }
}

TEST_CASE("outer product transposes correctly and matches multiply") {
  Dims d{16, 16, 16};
  SpectralField u = random_field(d, 3, 4, 27);
  SpectralField v = random_field(d, 3, 4, 28);
  SpectralField uv = outer_product(u, v);
  SpectralField vu = outer_product(v, u);
  CHECK(max_abs_diff(transpose_tensor(uv), vu) < 1e-13);
}

TEST_CASE("projections split the spectrum") {
  SpectralField f = random_field({24, 24, 24}, 1, 11, 29);
  SpectralField lo = project_band(f, 0.0, 5.0);
  SpectralField hi = f - lo;
  CHECK(std::abs(lo.coeff(0, 3, 0, 0).real() - f.coeff(0, 3, 0, 0).real()) < 1e-15);
  CHECK(std::abs(hi.coeff(0, 3, 0, 0)) < 1e-15);
  CHECK(std::abs(norm_l2(f) * norm_l2(f) - norm_l2(lo) * norm_l2(lo) - norm_l2(hi) * norm_l2(hi)) <
        1e-10);
  SpectralField nz = project_nonzero(f);
  CHECK(std::abs(nz.coeff(0, 0, 0, 0)) == 0.0);
}

TEST_CASE("norms agree with closed forms on a single mode") {
  SpectralField f({32, 32, 32}, 1);
  f.coeff(0, 2, 0, 0) = 0.5;
  f.coeff(0, -2, 0, 0) = 0.5;  // f = cos(4 pi x)
  CHECK(norm_l2(f) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(norm_lp(f, 2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
  CHECK(norm_lp(f, 1.0) == doctest::Approx(2.0 / M_PI).epsilon(1e-2));
  CHECK(norm_linf(f) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(norm_hs_dot(f, 1.0) == doctest::Approx(4.0 * M_PI * std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("mollifier is mass preserving and contracts high modes") {
  SpectralField f = random_field({24, 24, 24}, 1, 10, 31);
  SpectralField m = mollify_space(f, 0.1);
  CHECK(std::abs(m.coeff(0, 0, 0, 0) - f.coeff(0, 0, 0, 0)) < 1e-14);
  CHECK(mollifier_transform(0.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(m.coeff(0, 10, 0, 0)) < std::abs(f.coeff(0, 10, 0, 0)) + 1e-16);
  CHECK(norm_l2(m) <= norm_l2(f) * (1.0 + 1e-12));
}

TEST_CASE("traceless and symmetric parts") {
  SpectralField t = random_field({16, 16, 16}, 9, 5, 33);
  SpectralField s = symmetric_part(t);
  CHECK(symmetry_defect(s) < 1e-13);
  SpectralField tl = traceless_part(s);
  CHECK(trace_linf(tl) < 1e-12);
}

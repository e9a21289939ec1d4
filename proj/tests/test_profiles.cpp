#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lnse/operators.hpp"
#include "lnse/profiles.hpp"

using namespace lnse;

TEST_CASE("psi support, mean and normalization") {
  CHECK(psi_profile(0.1) == 0.0);
  CHECK(psi_profile(0.7) == 0.0);
  CHECK(psi_profile(0.45) != 0.0);
  const int n = 1 << 14;
  double mean = 0.0, l2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = psi_profile(double(i) / n);
    mean += v;
    l2 += v * v;
  }
  CHECK(std::abs(mean / n) < 1e-12);
  CHECK(std::sqrt(l2 / n) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("phi is minus the laplacian of its potential and unit L2") {
  const int n = 1 << 10;
  double l2 = 0.0, worst = 0.0;
  const double h = 1e-4;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; j += 7) {
      double y = double(i) / n, z = double(j) / n;
      double v = phi_profile(y, z);
      l2 += v * v;
      if (i % 37 == 0 && j % 35 == 0) {
        double lap = (phi_potential_profile(y + h, z) + phi_potential_profile(y - h, z) +
                      phi_potential_profile(y, z + h) + phi_potential_profile(y, z - h) -
                      4.0 * phi_potential_profile(y, z)) /
                     (h * h);
        worst = std::max(worst, std::abs(-lap - v));
      }
    }
  CHECK(worst < 1e-3);
  CHECK(std::sqrt(l2 / (double(n) * n / 7.0)) == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("phi support is the 1/8 ball around the center") {
  CHECK(phi_profile(0.5, 0.7) == 0.0);
  CHECK(phi_potential_profile(0.2, 0.5) == 0.0);
  CHECK(phi_profile(0.5, 0.55) != 0.0);
}

TEST_CASE("rescaled profiles carry the stated powers of r") {
  double r = 0.25;
  CHECK(psi_rescaled(r, r * 0.45) ==
        doctest::Approx(psi_profile(0.45) / std::sqrt(r)).epsilon(1e-12));
  CHECK(phi_rescaled(r, r * 0.5, r * 0.55) ==
        doctest::Approx(phi_profile(0.5, 0.55) / r).epsilon(1e-12));
  // periodicity
  CHECK(psi_rescaled(r, 0.1) == doctest::Approx(psi_rescaled(r, 1.1)).epsilon(1e-12));
}

TEST_CASE("truncated psi series is mean free, unit L2 and accurate") {
  double r = 0.5;
  Series1D s = psi_series(r, 320);
  CHECK(std::abs(s.coef(0)) == 0.0);
  CHECK(s.norm_l2() == doctest::Approx(1.0).epsilon(1e-12));
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    double x = double(i) / 64;
    worst = std::max(worst, std::abs(s.eval(x) - psi_rescaled(r, x)));
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("norm constants match direct quadrature") {
  // || psi ||_L2 = 1 by construction, || psi' ||_L2 by quadrature
  CHECK(psi_norm_const(0, 2.0) == doctest::Approx(1.0).epsilon(1e-6));
  const int n = 1 << 13;
  double dl2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double h = 1.0 / n;
    double d = (psi_profile(double(i) / n + h) - psi_profile(double(i) / n)) / h;
    dl2 += d * d;
  }
  CHECK(psi_norm_const(1, 2.0) == doctest::Approx(std::sqrt(dl2 / n)).epsilon(1e-2));
  CHECK(phi_norm_const(0, 2.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(psi_norm_const(0, infinity()) > psi_norm_const(0, 2.0));
}

TEST_CASE("profile bundle is self consistent") {
  JetProfiles jp = build_profiles(1024);
  CHECK(jp.resolution == 1024);
  CHECK(jp.psi_samples[460] == doctest::Approx(psi_profile(460.0 / 1024)).epsilon(1e-12));
  CHECK(jp.psi_hat.n_max > 0);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "lnse/geometry.hpp"
#include "lnse/rng.hpp"

using namespace lnse;

namespace {

Eigen::Matrix3d random_direction(uint64_t seed, uint64_t k) {
  Eigen::Matrix3d e;
  double g[6];
  for (int i = 0; i < 3; ++i) normal_pair(seed, k, uint64_t(i), 0, 0, g[2 * i], g[2 * i + 1]);
  e << g[0], g[3], g[4], g[3], g[1], g[5], g[4], g[5], g[2];
  return e / e.norm();
}

}  // namespace

TEST_CASE("frames are orthonormal and rational with denominator 5") {
  const WaveVectorSet& set = WaveVectorSet::builtin_345();
  CHECK(set.frames().size() == 6);
  CHECK(set.n_lambda() == 5);
  CHECK(set.frame_orthonormality_defect() < 1e-14);
  for (const Frame& f : set.frames())
    for (const Eigen::Vector3d* v : {&f.k, &f.k1, &f.k2})
      for (int i = 0; i < 3; ++i) {
        double scaled = (*v)(i)*5.0;
        CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
      }
}

TEST_CASE("certificate radius is positive and basis well conditioned") {
  const WaveVectorSet& set = WaveVectorSet::builtin_345();
  CHECK(set.eps_u() > 0.0);
  CHECK(set.m_star() > 0.0);
  CHECK(set.basis_condition_number() < 1e3);
}

TEST_CASE("gamma_squared reconstructs admissible matrices") {
  const WaveVectorSet& set = WaveVectorSet::builtin_345();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    double u = uniform01(17, uint64_t(trial));
    Eigen::Matrix3d s =
        Eigen::Matrix3d::Identity() + (u * set.eps_u()) * random_direction(18, uint64_t(trial));
    std::array<double, 6> c = set.gamma_squared(s);
    Eigen::Matrix3d rec = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 6; ++k) {
      CHECK(c[size_t(k)] > 0.0);
      const Eigen::Vector3d& k1 = set.frames()[size_t(k)].k1;
      rec += c[size_t(k)] * k1 * k1.transpose();
    }
    worst = std::max(worst, (rec - s).norm());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("gamma_squared refuses matrices outside the ball") {
  const WaveVectorSet& set = WaveVectorSet::builtin_345();
  Eigen::Matrix3d far = Eigen::Matrix3d::Identity();
  far(0, 0) += 10.0 * set.eps_u();
  far(1, 1) -= 10.0 * set.eps_u();
  CHECK_THROWS(set.gamma_squared(far));
}

TEST_CASE("sym vec6 round trip") {
  Eigen::Matrix3d s = random_direction(19, 4);
  CHECK((vec6_to_sym(sym_to_vec6(s)) - s).norm() < 1e-14);
  CHECK(std::abs(sym_to_vec6(s).norm() - s.norm()) < 1e-14);
}

TEST_CASE("re-certification is reproducible") {
  const WaveVectorSet& set = WaveVectorSet::builtin_345();
  auto c1 = set.certify_radius(64);
  auto c2 = set.certify_radius(64);
  CHECK(c1.eps_u == c2.eps_u);
  CHECK(c1.eps_u > 0.0);
}

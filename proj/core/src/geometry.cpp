#include "lnse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lnse/rng.hpp"

namespace lnse {

namespace {

const double kSqrt2 = std::sqrt(2.0);

Frame make_frame(double kx, double ky, double kz, double k1x, double k1y, double k1z) {
  Frame f;
  f.k = Eigen::Vector3d(kx, ky, kz);
  f.k1 = Eigen::Vector3d(k1x, k1y, k1z);
  f.k2 = f.k.cross(f.k1);
  return f;
}

Eigen::Matrix3d random_sym_direction(uint64_t seed, uint64_t idx) {
  double g[6];
  for (int j = 0; j < 3; ++j) normal_pair(seed, 1, idx, j, 0, g[2 * j], g[2 * j + 1]);
  Eigen::Matrix3d e;
  e << g[0], g[3], g[4], g[3], g[1], g[5], g[4], g[5], g[2];
  return e / e.norm();
}

}  // namespace

Eigen::Matrix<double, 6, 1> sym_to_vec6(const Eigen::Matrix3d& S) {
  Eigen::Matrix<double, 6, 1> v;
  v << S(0, 0), S(1, 1), S(2, 2), kSqrt2 * S(0, 1), kSqrt2 * S(0, 2), kSqrt2 * S(1, 2);
  return v;
}

Eigen::Matrix3d vec6_to_sym(const Eigen::Matrix<double, 6, 1>& v) {
  Eigen::Matrix3d s;
  s << v(0), v(3) / kSqrt2, v(4) / kSqrt2, v(3) / kSqrt2, v(1), v(5) / kSqrt2, v(4) / kSqrt2,
      v(5) / kSqrt2, v(2);
  return s;
}

const WaveVectorSet& WaveVectorSet::builtin_345() {
  static const WaveVectorSet instance = [] {
    WaveVectorSet w;
    w.n_lambda_ = 5;
    w.frames_ = {
        make_frame(0.6, 0.8, 0.0, -0.8, 0.6, 0.0),
        make_frame(0.6, 0.0, 0.8, -0.8, 0.0, 0.6),
        make_frame(0.0, 0.6, 0.8, 0.0, -0.8, 0.6),
        make_frame(-0.8, 0.6, 0.0, 0.6, 0.8, 0.0),
        make_frame(-0.8, 0.0, 0.6, 0.6, 0.0, 0.8),
        make_frame(0.0, -0.8, 0.6, 0.0, 0.6, 0.8),
    };
    for (int j = 0; j < 6; ++j) {
      const Eigen::Vector3d& k1 = w.frames_[j].k1;
      w.basis_.col(j) = sym_to_vec6(k1 * k1.transpose());
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(w.basis_);
    if (!lu.isInvertible()) throw std::logic_error("direction set basis is singular");
    w.basis_inv_ = lu.inverse();
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(w.basis_);
    w.cond_ = svd.singularValues()(0) / svd.singularValues()(5);
    Certificate c = w.certify_radius(256);
    w.eps_u_ = c.eps_u;
    w.m_star_ = c.m_star;
    return w;
  }();
  return instance;
}

std::array<double, 6> WaveVectorSet::gamma_squared(const Eigen::Matrix3d& S) const {
  if ((S - S.transpose()).norm() > 1e-12 * (1.0 + S.norm()))
    throw std::invalid_argument("gamma_squared: matrix is not symmetric");
  if ((S - Eigen::Matrix3d::Identity()).norm() > eps_u_)
    throw std::invalid_argument("gamma_squared: matrix outside certified ball");
  Eigen::Matrix<double, 6, 1> c = basis_inv_ * sym_to_vec6(S);
  std::array<double, 6> out;
  for (int j = 0; j < 6; ++j) {
    if (c(j) <= 0.0) throw std::logic_error("gamma_squared: nonpositive coefficient");
    out[size_t(j)] = c(j);
  }
  return out;
}

WaveVectorSet::Certificate WaveVectorSet::certify_radius(int n_samples, uint64_t seed) const {
  // For each sampled direction E, c(Id + r E) = c0 + r * basis_inv * vec(E) is
  // affine in r, so the positivity breakdown radius is exact per direction.
  Eigen::Matrix<double, 6, 1> c0 = basis_inv_ * sym_to_vec6(Eigen::Matrix3d::Identity());
  double r_min = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    Eigen::Matrix3d e = random_sym_direction(seed, uint64_t(s));
    Eigen::Matrix<double, 6, 1> dc = basis_inv_ * sym_to_vec6(e);
    for (int j = 0; j < 6; ++j)
      if (dc(j) < 0.0) r_min = std::min(r_min, -c0(j) / dc(j));
  }
  // Axis-aligned and fully mixed rational directions as a deterministic floor.
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
      e(a, b) = e(b, a) = 1.0;
      e /= e.norm();
      for (int sign = -1; sign <= 1; sign += 2) {
        Eigen::Matrix<double, 6, 1> dc = basis_inv_ * sym_to_vec6(sign * e);
        for (int j = 0; j < 6; ++j)
          if (dc(j) < 0.0) r_min = std::min(r_min, -c0(j) / dc(j));
      }
    }
  Certificate cert;
  cert.eps_u = 0.9 * r_min;

  // m_star: bound sup over the certified ball of |d^m gamma_(k)| for m <= 4 by
  // finite differences of sqrt(c_j(Id + t E)) along sampled directions.
  double m_star = 0.0;
  const double h = 0.05 * cert.eps_u;
  for (int s = 0; s < std::min(n_samples, 64); ++s) {
    Eigen::Matrix3d e = random_sym_direction(seed + 1, uint64_t(s));
    Eigen::Matrix<double, 6, 1> dc = basis_inv_ * sym_to_vec6(e);
    for (int base = -1; base <= 1; ++base) {
      double t0 = base * 0.4 * cert.eps_u;
      double g[5][6];
      for (int i = -2; i <= 2; ++i)
        for (int j = 0; j < 6; ++j) g[i + 2][j] = std::sqrt(c0(j) + (t0 + i * h) * dc(j));
      static const double st[5][5] = {{0, 0, 1, 0, 0},
                                      {0, -0.5, 0, 0.5, 0},
                                      {0, 1, -2, 1, 0},
                                      {-0.5, 1, 0, -1, 0.5},
                                      {1, -4, 6, -4, 1}};
      static const double hp[5] = {1, 1, 2, 3, 4};
      for (int m = 0; m <= 4; ++m)
        for (int j = 0; j < 6; ++j) {
          double d = 0.0;
          for (int i = 0; i < 5; ++i) d += st[m][i] * g[i][j];
          m_star = std::max(m_star, std::abs(d) / std::pow(h, hp[m]));
        }
    }
  }
  cert.m_star = m_star;
  return cert;
}

double WaveVectorSet::frame_orthonormality_defect() const {
  double worst = 0.0;
  for (const Frame& f : frames_) {
    Eigen::Matrix3d q;
    q.col(0) = f.k;
    q.col(1) = f.k1;
    q.col(2) = f.k2;
    worst = std::max(worst, (q.transpose() * q - Eigen::Matrix3d::Identity()).norm());
    // Integerization: N_Lambda * k must be an integer vector for every leg.
    for (int c = 0; c < 3; ++c)
      for (int r = 0; r < 3; ++r) {
        double x = n_lambda_ * q(r, c);
        worst = std::max(worst, std::abs(x - std::round(x)));
      }
  }
  return worst;
}

}  // namespace lnse

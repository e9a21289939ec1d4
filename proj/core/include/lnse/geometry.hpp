#pragma once

// Geometric Lemma machinery: a concrete rational direction set with
// orthonormal frames (k, k1, k2), the integerizing constant N_Lambda, the
// coefficient solver gamma_(k)^2 and the admissibility radius eps_u.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

namespace lnse {

struct Frame {
  Eigen::Vector3d k, k1, k2;
};

class WaveVectorSet {
 public:
  // Six frames built from 3-4-5 rational rotations; N_Lambda = 5.
  static const WaveVectorSet& builtin_345();

  const std::vector<Frame>& frames() const { return frames_; }
  int n_lambda() const { return n_lambda_; }
  // Columns are vec(k1 k1^T) in the 6-dim symmetric coordinates
  // (xx, yy, zz, sqrt2*xy, sqrt2*xz, sqrt2*yz).
  const Eigen::Matrix<double, 6, 6>& basis_matrix() const { return basis_; }
  double basis_condition_number() const { return cond_; }

  // Certified admissibility radius (0.9 safety factor applied) and the C^4
  // coefficient bound estimate; both computed once at construction with the
  // default sampling and re-computable via certify_radius.
  double eps_u() const { return eps_u_; }
  double m_star() const { return m_star_; }

  // Solve S = sum_k c_k k1 k1^T.  Requires ||S - Id||_F <= eps_u; all c_k must
  // come out positive (internal certification failure otherwise).
  std::array<double, 6> gamma_squared(const Eigen::Matrix3d& S) const;

  // Largest radius r such that min_k c_k(Id + r E) > 0 over n_samples random
  // symmetric unit-Frobenius directions E (bisection), times 0.9; also
  // estimates m_star from 4th-order directional finite differences of
  // gamma_(k) = sqrt(c_k).
  struct Certificate {
    double eps_u = 0.0;
    double m_star = 0.0;
  };
  Certificate certify_radius(int n_samples, uint64_t seed = 11) const;

  double frame_orthonormality_defect() const;

 private:
  WaveVectorSet() = default;
  std::vector<Frame> frames_;
  int n_lambda_ = 0;
  Eigen::Matrix<double, 6, 6> basis_, basis_inv_;
  double cond_ = 0.0, eps_u_ = 0.0, m_star_ = 0.0;
};

// Symmetric 3x3 <-> 6-vector in the coordinates used by basis_matrix.
Eigen::Matrix<double, 6, 1> sym_to_vec6(const Eigen::Matrix3d& S);
Eigen::Matrix3d vec6_to_sym(const Eigen::Matrix<double, 6, 1>& v);

}  // namespace lnse

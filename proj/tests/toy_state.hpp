#pragma once

// Analytic iteration state for step tests: u_q(t) = cos(2 pi t) U with U a
// low-frequency divergence-free field, and
//   R_q(t) = sin(2 pi t) A + cos(2 pi t) B + cos^2(2 pi t) C
// built so that (u_q, R_q) solves the relaxed system exactly (the remaining
// gradient part plays the role of the pressure).

#include <cmath>
#include <memory>

#include "lnse/ci_step.hpp"
#include "lnse/operators.hpp"
#include "test_util.hpp"

namespace lnse::testutil {

struct ToyProblem {
  IterationState st;
  std::function<double(double)> e;
  double u_norm_sq = 0.0;
};

inline ToyProblem toy_problem(Dims dims, const JetParams& jet, double ell, double amp = 0.05,
                              double energy_gap = 24.0, bool with_dudt = false,
                              uint64_t seed = 101) {
  const double two_pi = 2.0 * M_PI;
  SpectralField base = project_nonzero(random_divfree({8, 8, 8}, 2, seed));
  base *= amp / norm_l2(base);
  auto U = std::make_shared<SpectralField>(resample(base, dims));
  auto A = std::make_shared<SpectralField>(inverse_divergence(-two_pi * *U));
  auto B = std::make_shared<SpectralField>(inverse_divergence(-1.0 * laplacian(*U)));
  auto C = std::make_shared<SpectralField>(
      inverse_divergence(leray_project(project_nonzero(divergence(outer_product(*U, *U))))));

  ToyProblem toy;
  toy.u_norm_sq = norm_l2(*U) * norm_l2(*U);
  toy.st.q = 0;
  toy.st.u = [U, two_pi](double t) { return std::cos(two_pi * t) * *U; };
  toy.st.r = [A, B, C, two_pi](double t) {
    double c = std::cos(two_pi * t);
    return std::sin(two_pi * t) * *A + c * *B + (c * c) * *C;
  };
  if (with_dudt)
    toy.st.dudt = [U, two_pi](double t) { return (-two_pi * std::sin(two_pi * t)) * *U; };
  toy.st.t_end = 2.0;
  toy.st.t_q1 = 1.0;
  toy.st.t_q2 = 0.5;
  toy.st.delta_q1 = delta_q(1);
  toy.st.delta_q2 = delta_q(2);
  toy.st.delta_q3 = delta_q(3);
  toy.st.ell = ell;
  toy.st.nu = 1.0;
  toy.st.jet = jet;
  toy.st.dims = dims;
  double un2 = toy.u_norm_sq;
  toy.e = [un2, energy_gap, two_pi](double t) {
    double c = std::cos(two_pi * t);
    return c * c * un2 + energy_gap;
  };
  return toy;
}

}  // namespace lnse::testutil

#pragma once

// Concentration profiles for the intermittent jets.
//   psi : smooth mean-zero 1D profile supported in [3/8, 5/8], unit L2 norm,
//         realized as the derivative of an exp-bump.
//   Phi : smooth 2D potential supported in the ball of radius 1/8 centered at
//         (1/2, 1/2); phi := -Laplace(Phi), differentiated analytically, with
//         the pair scaled so phi has unit L2 norm.
// The module provides analytic evaluators, periodized rescalings at a
// concentration scale r, truncated Fourier series of those rescalings, and
// the L^p norm constants that drive the factorized jet norm evaluators.

#include <vector>

#include "lnse/field.hpp"

namespace lnse {

struct Series1D {
  int n_max = 0;              // coefficients kept for |n| <= n_max
  std::vector<cplx> c;        // index n + n_max
  cplx coef(int n) const { return c[size_t(n + n_max)]; }
  double eval(double x) const;
  double norm_l2() const;     // Plancherel over the unit period
};

struct Series2D {
  int n_max = 0;              // |m1|, |m2| <= n_max
  std::vector<cplx> c;        // index (m1 + n_max) * (2 n_max + 1) + (m2 + n_max)
  cplx coef(int m1, int m2) const { return c[size_t((m1 + n_max) * (2 * n_max + 1) + m2 + n_max)]; }
  double eval(double y, double z) const;
  double norm_l2() const;
};

// Analytic profiles on the unit cell (zero outside their supports).
double psi_profile(double x);
double phi_potential_profile(double y, double z);
double phi_profile(double y, double z);

// Periodized rescalings, 1-periodic in every argument:
//   psi_r(x) = r^{-1/2} psi(frac(x)/r),  phi_r(y,z) = r^{-1} phi(frac y/r, frac z/r),
// and the same r^{-1} scaling for Phi so that -Laplace(Phi_r) = r^{-2} phi_r.
double psi_rescaled(double r, double x);
double phi_potential_rescaled(double r, double y, double z);
double phi_rescaled(double r, double y, double z);

// Truncated Fourier series of the rescaled profiles over the unit period,
// computed with a fine FFT.  psi_series has its zero mode forced to 0 and is
// renormalized to unit L2 in truncated form.  The Phi series is returned raw;
// the jets derive the transverse profile phi from it term by term and fix the
// normalization there.
Series1D psi_series(double r, int n_max);
Series2D phi_potential_series(double r, int n_max);

// || d^j psi ||_{L^p} and || grad^i phi ||_{L^p} over one period, grad^i in the
// pointwise Frobenius norm over all i-th order derivative tuples.  Since the
// supports fit in one cell these equal the R / R^2 norms.  p may be infinity.
double psi_norm_const(int deriv, double p);
double phi_norm_const(int grad_order, double p);

// High-resolution samples plus spectral series of the unscaled profiles.
struct JetProfiles {
  int resolution = 0;
  std::vector<double> psi_samples;            // psi(i / resolution)
  std::vector<double> phi_samples;            // phi(i / resolution, j / resolution)
  std::vector<double> phi_potential_samples;
  Series1D psi_hat;
  Series2D phi_potential_hat;
};

JetProfiles build_profiles(int resolution);

}  // namespace lnse

#pragma once

// Fourier-multiplier operators, calculus, norms and mollifiers on T^3.

#include <array>
#include <limits>

#include "lnse/field.hpp"

namespace lnse {

// Smooth radial cutoff shape: 1 on [0,1), 0 on [2,inf), C-infinity exp-smoothstep
// in between.  sharp=true degenerates to the indicator of [0,1).
struct CutoffProfile {
  bool sharp = false;
  double operator()(double r) const;
};

inline double infinity() { return std::numeric_limits<double>::infinity(); }

// P_{<Lambda}: multiply mode xi by profile(|xi|/Lambda).
SpectralField project_below(const SpectralField& f, double lambda,
                            const CutoffProfile& profile = {});
// Id - P_{<Lambda}.
SpectralField project_high(const SpectralField& f, double lambda,
                           const CutoffProfile& profile = {});
// sharp: keep exactly lo <= |xi| < hi.  smooth (sharp=false): the difference
// project_below(hi/2) - project_below(lo), so that (lo,hi)=(Lambda/6, 2 Lambda)
// reproduces the splitting P_{<Lambda} - P_{<Lambda/6} and
// (0, Lambda/3) gives its complement P_{<Lambda/6}.
SpectralField project_band(const SpectralField& f, double lo, double hi, bool sharp = true,
                           const CutoffProfile& profile = {});
// P_{!=0}: remove the spatial mean of every component.
SpectralField project_nonzero(const SpectralField& f);

// Helmholtz-Leray projection of a 3-vector field.
SpectralField leray_project(const SpectralField& f);

// Inverse divergence R: mean-free 3-vector -> symmetric traceless 9-tensor
// with div(Rv) = v per mode.
SpectralField inverse_divergence(const SpectralField& v, double mean_tol = 1e-10);

// Calculus (exact multipliers).
SpectralField partial_derivative(const SpectralField& f, int axis);
SpectralField gradient(const SpectralField& f);      // scalar->vector, vector->tensor (d_i f_j)
SpectralField divergence(const SpectralField& f);    // vector->scalar, tensor->vector (sum_i d_i T_ij)
SpectralField curl(const SpectralField& f);          // vector->vector
SpectralField laplacian(const SpectralField& f);
SpectralField inverse_laplacian(const SpectralField& f);  // zero mode -> 0

// Pointwise products on a dealiased (2x zero-padded) physical grid.
SpectralField outer_product(const SpectralField& u, const SpectralField& v,
                            int oversample = 2);           // vectors -> 9-tensor
SpectralField pointwise_multiply(const SpectralField& a, const SpectralField& b,
                                 int oversample = 2);      // scalar * any
SpectralField traceless_part(const SpectralField& t);      // tensor -> tensor
SpectralField transpose_tensor(const SpectralField& t);
SpectralField symmetric_part(const SpectralField& t);
double trace_linf(const SpectralField& t, int oversample = 2);
double symmetry_defect(const SpectralField& t);

// Norms.
double norm_l2(const SpectralField& f);                         // Plancherel
double norm_lp(const SpectralField& f, double p, int oversample = 2);  // grid quadrature
double norm_linf(const SpectralField& f, int oversample = 2);
double norm_hs(const SpectralField& f, double s);               // (1+|xi|^2)^s weights
double norm_hs_dot(const SpectralField& f, double s);           // |2 pi xi|^{2s} weights
// Bessel-potential proxy for W^{1-delta,1}: || (1-Delta)^{(1-delta)/2} f ||_L1.
double norm_w1d1(const SpectralField& f, double delta, int oversample = 2);
std::array<double, 9> mean_tensor(const SpectralField& t);
double div_defect(const SpectralField& v);  // max_xi |xi . c(xi)|

// Mollification with a compactly supported radial exp-bump of radius ell,
// realized as a Fourier multiplier (radial kernel transform per mode).
SpectralField mollify_space(const SpectralField& f, double ell);
// The multiplier value itself (unit mass at s=0), s = |xi| * ell.
double mollifier_transform(double s);

}  // namespace lnse

#pragma once

// Intermittent jets W_(k), their incompressibility correctors, shift
// selection, separable norm evaluators, and the oscillation lemmas
// (decorrelation, mean oscillation) verified by quadrature sweeps.
//
// Jet fields are assembled term by term in Fourier space: the psi factor
// contributes frequencies n sigma N k1, the potential factor contributes
// sigma N (m1 k + m2 k2), and the transverse profile phi is derived from the
// truncated potential series so that the corrector identity
// W + Wtc = curl Wc holds exactly for the truncated series.  Truncated series
// are renormalized to unit L2, which keeps ||W||_L2 = 1 exact.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "lnse/field.hpp"
#include "lnse/geometry.hpp"
#include "lnse/profiles.hpp"

namespace lnse {

struct JetParams {
  double lambda = 0.0;
  double r_perp = 0.0, r_par = 0.0;
  double mu = 0.0, sigma = 0.0;
  std::array<Eigen::Vector3d, 6> shifts{};

  // r_par = lambda^{-4/7}, r_perp = lambda^{-6/7}, mu = lambda^{9/7},
  // sigma = lambda^{1/7}.
  static JetParams paper(double lambda);
  // Same powers for the scales, but sigma forced to a given integer so the
  // rescaled profiles are exactly periodic on the torus.
  static JetParams desk(double lambda, int sigma);
};

void validate(const JetParams& p);

// Separable descriptor of one jet: truncated profile series plus frame data.
struct JetTerms {
  int k_index = 0;
  Eigen::Vector3d k, k1, k2, alpha;
  int n_lambda = 0;
  Series1D psi;   // unit L2, zero mean
  Series2D phi;   // unit L2, derived termwise from pot below
  Series2D pot;   // potential, scaled consistently with phi
  double jc = 0.0;  // (sigma N / r_perp)^2
};

JetTerms jet_terms(int k_index, const JetParams& p, int n_psi, int n_phi);

enum class JetField { w, wc, wtc };

// Minimal even grid size per axis that resolves every term of the jet.
int required_grid(const JetTerms& jt, const JetParams& p);

// Sampled 3-vector field of W, Wc or Wtc at time t; dt_order applies that
// many analytic time derivatives (the fast phase only).  sigma must be a
// positive integer; every term must fit inside dims.
SpectralField jet_field(const JetTerms& jt, const JetParams& p, JetField which, Dims dims,
                        double t, int dt_order = 0);

// Exact tube-lattice shift selection: maximizes the minimal axis separation
// between tubes of different directions over a deterministic candidate grid
// (internal canonical direction order).  Throws if the best candidate still
// leaves overlapping supports.
std::array<Eigen::Vector3d, 6> choose_shifts(const JetParams& p);

struct Separation {
  double min_distance = 0.0;  // smallest axis-to-axis distance between tube pairs
  double required = 0.0;      // sum of the two tube radii
};
Separation tube_separation(const JetParams& p, const std::array<Eigen::Vector3d, 6>& shifts);

// || grad^N d_t^M W ||_{C_T L^p} via the factorized 1D x 2D structure,
// evaluated with the analytic profile norm constants; valid for any real
// parameters (no grid involved).
double jet_norm_separable(const JetParams& p, double lp, int N, int M);

// lambda exponent of the above under the paper preset.
double jet_norm_exponent(double lp, int N, int M);

struct SweepFit {
  std::vector<double> xs, values;
  double fitted = 0.0;
  double predicted = 0.0;
};

// log-log fit of jet_norm_separable against lambda under the paper preset.
SweepFit verify_jet_scalings(double lp, int N, int M, const std::vector<double>& lambda_sweep);

// | ||f g(sigma .)||_{L^p(T)} - ||f||_p ||g||_p | against sigma.
SweepFit verify_decorrelation(const std::function<double(double)>& f,
                              const std::function<double(double)>& g,
                              const std::vector<int>& sigma_sweep, double p);

// | int a(x) v(lambda x) dx | against lambda for scalar fields on T^3
// (exact Fourier pairing); v must be mean-free.
SweepFit verify_mean_oscillation(const SpectralField& a, const SpectralField& v,
                                 const std::vector<int>& lambda_sweep, double r);

}  // namespace lnse

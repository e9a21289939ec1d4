#include "lnse/jets.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lnse/operators.hpp"
#include "lnse/regression.hpp"

namespace lnse {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v *= double(n - k + i) / i;
  return v;
}

int sigma_int(const JetParams& p) {
  int s = int(std::lround(p.sigma));
  if (s < 1 || std::abs(p.sigma - s) > 1e-9)
    throw std::invalid_argument("jets: sigma must be a positive integer for torus sampling");
  return s;
}

Eigen::Vector3i int_vec(const Eigen::Vector3d& v) {
  Eigen::Vector3i w;
  for (int i = 0; i < 3; ++i) {
    double x = v(i);
    w(i) = int(std::lround(x));
    if (std::abs(x - w(i)) > 1e-9)
      throw std::logic_error("jets: direction vector is not integer after scaling");
  }
  return w;
}

double inv_or_zero(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

// Tube axis points of one jet family in physical space, one per plane cell.
std::vector<Eigen::Vector3d> tube_axes(const Frame& fr, const Eigen::Vector3d& alpha, int s_total,
                                       double r_perp) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(size_t(s_total) * s_total);
  for (int a = 0; a < s_total; ++a)
    for (int b = 0; b < s_total; ++b)
      pts.push_back(alpha + ((a + r_perp / 2) / s_total) * fr.k +
                    ((b + r_perp / 2) / s_total) * fr.k2);
  return pts;
}

// Exact minimal distance between two periodic line families along k1_i, k1_j.
// Only the projections onto the common normal matter, so each family reduces
// to a small set of scalar values mod the lattice period g.
double family_distance(const Frame& fi, const std::vector<Eigen::Vector3d>& pi, const Frame& fj,
                       const std::vector<Eigen::Vector3d>& pj, int denom_sq) {
  Eigen::Vector3d n = fi.k1.cross(fj.k1);
  Eigen::Vector3i ni = int_vec(denom_sq * n);
  long g = std::gcd(std::gcd(std::abs(long(ni(0))), std::abs(long(ni(1)))),
                    std::abs(long(ni(2))));
  double nn = std::sqrt(double(ni.squaredNorm()));
  Eigen::Vector3d nd(double(ni(0)), double(ni(1)), double(ni(2)));
  std::vector<double> ti, tj;
  ti.reserve(pi.size());
  tj.reserve(pj.size());
  for (const Eigen::Vector3d& a : pi) ti.push_back(a.dot(nd));
  for (const Eigen::Vector3d& b : pj) tj.push_back(b.dot(nd));
  double best = std::numeric_limits<double>::infinity();
  for (double a : ti)
    for (double b : tj) {
      double t = b - a;
      double red = std::abs(t - double(g) * std::round(t / double(g)));
      best = std::min(best, red / nn);
    }
  return best;
}

}  // namespace

JetParams JetParams::paper(double lambda) {
  JetParams p;
  p.lambda = lambda;
  p.r_par = std::pow(lambda, -4.0 / 7.0);
  p.r_perp = std::pow(lambda, -6.0 / 7.0);
  p.mu = std::pow(lambda, 9.0 / 7.0);
  p.sigma = std::pow(lambda, 1.0 / 7.0);
  validate(p);
  return p;
}

JetParams JetParams::desk(double lambda, int sigma) {
  JetParams p = paper(lambda);
  p.sigma = double(sigma);
  validate(p);
  return p;
}

void validate(const JetParams& p) {
  if (p.lambda <= 0 || p.mu <= 0 || p.sigma <= 0)
    throw std::invalid_argument("JetParams: lambda, mu, sigma must be positive");
  if (p.r_perp <= 0 || p.r_perp >= 1 || p.r_par <= 0 || p.r_par >= 1)
    throw std::invalid_argument("JetParams: r_perp, r_par must lie in (0,1)");
  if (p.r_perp > p.r_par)
    throw std::invalid_argument("JetParams: requires r_perp <= r_par");
}

JetTerms jet_terms(int k_index, const JetParams& p, int n_psi, int n_phi) {
  validate(p);
  const WaveVectorSet& set = WaveVectorSet::builtin_345();
  if (k_index < 0 || k_index >= int(set.frames().size()))
    throw std::invalid_argument("jet_terms: direction index out of range");
  const Frame& fr = set.frames()[size_t(k_index)];

  JetTerms jt;
  jt.k_index = k_index;
  jt.k = fr.k;
  jt.k1 = fr.k1;
  jt.k2 = fr.k2;
  jt.alpha = p.shifts[size_t(k_index)];
  jt.n_lambda = set.n_lambda();
  jt.jc = std::pow(p.sigma * set.n_lambda() / p.r_perp, 2);

  jt.psi = psi_series(p.r_par, n_psi);
  jt.pot = phi_potential_series(p.r_perp, n_phi);
  // phi derived termwise from the potential: -Laplace(pot) = r_perp^{-2} phi
  // on the unit cell, kept exact under truncation; then both renormalized so
  // phi has unit L2.
  jt.phi.n_max = n_phi;
  jt.phi.c.resize(jt.pot.c.size());
  for (int m1 = -n_phi; m1 <= n_phi; ++m1)
    for (int m2 = -n_phi; m2 <= n_phi; ++m2) {
      double w = kTwoPi * kTwoPi * (m1 * m1 + m2 * m2) * p.r_perp * p.r_perp;
      jt.phi.c[size_t((m1 + n_phi) * (2 * n_phi + 1) + m2 + n_phi)] = w * jt.pot.coef(m1, m2);
    }
  double nrm = jt.phi.norm_l2();
  for (cplx& c : jt.phi.c) c /= nrm;
  for (cplx& c : jt.pot.c) c /= nrm;
  return jt;
}

int required_grid(const JetTerms& jt, const JetParams& p) {
  int s = sigma_int(p);
  Eigen::Vector3i K = int_vec(jt.n_lambda * jt.k);
  Eigen::Vector3i K1 = int_vec(jt.n_lambda * jt.k1);
  Eigen::Vector3i K2 = int_vec(jt.n_lambda * jt.k2);
  int worst = 0;
  for (int i = 0; i < 3; ++i) {
    int m = s * (jt.psi.n_max * std::abs(K1(i)) +
                 jt.phi.n_max * (std::abs(K(i)) + std::abs(K2(i))));
    worst = std::max(worst, m);
  }
  return 2 * worst + 2;
}

SpectralField jet_field(const JetTerms& jt, const JetParams& p, JetField which, Dims dims,
                        double t, int dt_order) {
  int s = sigma_int(p);
  int need = required_grid(jt, p);
  if (dims.n0 < need || dims.n1 < need || dims.n2 < need)
    throw std::invalid_argument("jet_field: grid too small, need at least " +
                                std::to_string(need) + " per axis");
  Eigen::Vector3i K = int_vec(jt.n_lambda * jt.k);
  Eigen::Vector3i K1 = int_vec(jt.n_lambda * jt.k1);
  Eigen::Vector3i K2 = int_vec(jt.n_lambda * jt.k2);
  double sn = double(s) * jt.n_lambda;

  SpectralField f(dims, 3);
  for (int n = -jt.psi.n_max; n <= jt.psi.n_max; ++n) {
    cplx pn = jt.psi.coef(n);
    if (pn == cplx(0.0, 0.0)) continue;
    cplx tphase = std::polar(1.0, kTwoPi * n * sn * p.mu * t);
    cplx dt_factor = std::pow(cplx(0.0, kTwoPi * n * sn * p.mu), dt_order);
    for (int m1 = -jt.phi.n_max; m1 <= jt.phi.n_max; ++m1)
      for (int m2 = -jt.phi.n_max; m2 <= jt.phi.n_max; ++m2) {
        cplx xm = (which == JetField::w) ? jt.phi.coef(m1, m2) : jt.pot.coef(m1, m2);
        if (xm == cplx(0.0, 0.0)) continue;
        double shift = -kTwoPi * sn * (m1 * jt.k.dot(jt.alpha) + m2 * jt.k2.dot(jt.alpha));
        cplx coef = pn * xm * tphase * dt_factor * std::polar(1.0, shift);

        Eigen::Vector3d dir;
        if (which == JetField::w) {
          dir = jt.k1;
        } else {
          Eigen::Vector3d gv = m1 * jt.k + m2 * jt.k2;
          if (which == JetField::wc) {
            dir = gv.cross(jt.k1);
            coef *= cplx(0.0, kTwoPi * sn) / jt.jc;
          } else {
            dir = gv;
            coef *= cplx(0.0, kTwoPi * n * sn) * cplx(0.0, kTwoPi * sn) / jt.jc;
          }
        }
        int x0 = s * (n * K1(0) + m1 * K(0) + m2 * K2(0));
        int x1 = s * (n * K1(1) + m1 * K(1) + m2 * K2(1));
        int x2 = s * (n * K1(2) + m1 * K(2) + m2 * K2(2));
        for (int c = 0; c < 3; ++c)
          if (dir(c) != 0.0) f.coeff(c, x0, x1, x2) += coef * dir(c);
      }
  }
  return f;
}

Separation tube_separation(const JetParams& p, const std::array<Eigen::Vector3d, 6>& shifts) {
  const WaveVectorSet& set = WaveVectorSet::builtin_345();
  int s_total = sigma_int(p) * set.n_lambda();
  if (long(s_total) * s_total * s_total * s_total > 100000000L)
    throw std::invalid_argument("tube_separation: sigma too large for the pair scan");
  int denom_sq = set.n_lambda() * set.n_lambda();
  std::vector<std::vector<Eigen::Vector3d>> axes;
  for (size_t j = 0; j < set.frames().size(); ++j)
    axes.push_back(tube_axes(set.frames()[j], shifts[j], s_total, p.r_perp));
  Separation sep;
  sep.required = 2.0 * (p.r_perp / 8.0) / s_total;
  sep.min_distance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < axes.size(); ++i)
    for (size_t j = i + 1; j < axes.size(); ++j)
      sep.min_distance = std::min(
          sep.min_distance, family_distance(set.frames()[i], axes[i], set.frames()[j], axes[j],
                                            denom_sq));
  return sep;
}

std::array<Eigen::Vector3d, 6> choose_shifts(const JetParams& p) {
  validate(p);
  const WaveVectorSet& set = WaveVectorSet::builtin_345();
  int s_total = sigma_int(p) * set.n_lambda();
  int denom_sq = set.n_lambda() * set.n_lambda();
  const int grid = 61;

  std::array<Eigen::Vector3d, 6> shifts;
  shifts.fill(Eigen::Vector3d::Zero());
  std::vector<std::vector<Eigen::Vector3d>> placed;
  placed.push_back(tube_axes(set.frames()[0], shifts[0], s_total, p.r_perp));

  for (size_t j = 1; j < set.frames().size(); ++j) {
    const Frame& fj = set.frames()[j];
    double best_val = -1.0;
    Eigen::Vector3d best = Eigen::Vector3d::Zero();
    for (int c1 = 0; c1 < grid; ++c1)
      for (int c2 = 0; c2 < grid; ++c2) {
        Eigen::Vector3d cand = ((c1 + 0.5) / (grid * double(s_total))) * fj.k +
                               ((c2 + 0.5) / (grid * double(s_total))) * fj.k2;
        std::vector<Eigen::Vector3d> axes = tube_axes(fj, cand, s_total, p.r_perp);
        double worst = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < placed.size(); ++i)
          worst = std::min(worst, family_distance(set.frames()[i], placed[i], fj, axes,
                                                  denom_sq));
        if (worst > best_val) {
          best_val = worst;
          best = cand;
        }
      }
    shifts[j] = best;
    placed.push_back(tube_axes(fj, best, s_total, p.r_perp));
  }

  Separation sep = tube_separation(p, shifts);
  if (sep.min_distance <= sep.required)
    throw std::runtime_error("choose_shifts: supports cannot be made disjoint at r_perp = " +
                             std::to_string(p.r_perp) + " (separation " +
                             std::to_string(sep.min_distance) + ", required > " +
                             std::to_string(sep.required) + ")");
  return shifts;
}

double jet_norm_separable(const JetParams& p, double lp, int N, int M) {
  validate(p);
  double invp = inv_or_zero(lp);
  double sn = p.sigma * WaveVectorSet::builtin_345().n_lambda();
  double acc = 0.0;
  for (int j = 0; j <= N; ++j)
    acc += binomial(N, j) *
           std::pow(p.r_par, invp - 0.5 - (j + M)) * psi_norm_const(j + M, lp) *
           std::pow(p.r_perp, 2.0 * invp - 1.0 - (N - j)) * phi_norm_const(N - j, lp);
  return std::pow(sn, N + M) * std::pow(p.mu, M) * acc;
}

double jet_norm_exponent(double lp, int N, int M) {
  double invp = inv_or_zero(lp);
  return (2.0 * invp - 1.0) * (-6.0 / 7.0) + (invp - 0.5) * (-4.0 / 7.0) + N + 2.0 * M;
}

SweepFit verify_jet_scalings(double lp, int N, int M, const std::vector<double>& lambda_sweep) {
  if (lambda_sweep.size() < 4)
    throw std::invalid_argument("verify_jet_scalings: need at least 4 sweep points");
  SweepFit out;
  for (double lam : lambda_sweep) {
    out.xs.push_back(lam);
    out.values.push_back(jet_norm_separable(JetParams::paper(lam), lp, N, M));
  }
  out.fitted = fit_loglog(out.xs, out.values);
  out.predicted = jet_norm_exponent(lp, N, M);
  return out;
}

SweepFit verify_decorrelation(const std::function<double(double)>& f,
                              const std::function<double(double)>& g,
                              const std::vector<int>& sigma_sweep, double p) {
  const int n = 1 << 15;
  auto lp_of = [&](const std::function<double(double)>& h) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::pow(std::abs(h((i + 0.5) / double(n))), p);
    return std::pow(acc / n, 1.0 / p);
  };
  double base = lp_of(f) * lp_of(g);
  SweepFit out;
  for (int s : sigma_sweep) {
    if (s < 1) throw std::invalid_argument("verify_decorrelation: sigma must be positive");
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = (i + 0.5) / double(n);
      acc += std::pow(std::abs(f(x) * g(s * x - std::floor(s * x))), p);
    }
    out.xs.push_back(double(s));
    out.values.push_back(std::abs(std::pow(acc / n, 1.0 / p) - base));
  }
  out.predicted = -1.0 / p;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < out.values.size(); ++i)
    if (out.values[i] > 1e-15) {
      xs.push_back(out.xs[i]);
      ys.push_back(out.values[i]);
    }
  out.fitted = xs.size() >= 2 ? fit_loglog(xs, ys)
                              : -std::numeric_limits<double>::infinity();
  return out;
}

SweepFit verify_mean_oscillation(const SpectralField& a, const SpectralField& v,
                                 const std::vector<int>& lambda_sweep, double r) {
  if (a.n_components() != 1 || v.n_components() != 1)
    throw std::invalid_argument("verify_mean_oscillation: scalar fields required");
  if (std::abs(v.coeff(0, 0, 0, 0)) > 1e-12)
    throw std::invalid_argument("verify_mean_oscillation: v must be mean-free");
  double denom;
  {
    SpectralField ga = gradient(a);
    double rp = (r <= 1.0) ? infinity() : r / (r - 1.0);
    double na = std::isinf(r) ? norm_linf(ga) : norm_lp(ga, r);
    double nv = std::isinf(rp) ? norm_linf(v) : norm_lp(v, rp);
    denom = na * nv;
  }
  if (denom <= 0.0) throw std::invalid_argument("verify_mean_oscillation: degenerate inputs");

  SweepFit out;
  for (int lam : lambda_sweep) {
    if (lam < 1) throw std::invalid_argument("verify_mean_oscillation: lambda must be positive");
    cplx acc = 0.0;
    v.for_each_mode(0, [&](int k0, int k1, int k2, const cplx& c) {
      if (c == cplx(0.0, 0.0)) return;
      long q0 = -long(lam) * k0, q1 = -long(lam) * k1, q2 = -long(lam) * k2;
      const Dims& d = a.dims();
      if (std::abs(q0) >= d.n0 / 2 || std::abs(q1) >= d.n1 / 2 || std::abs(q2) >= d.n2 / 2)
        return;
      acc += c * a.coeff(0, int(q0), int(q1), int(q2));
    });
    out.xs.push_back(double(lam));
    out.values.push_back(std::abs(acc) / denom);
  }
  out.predicted = -1.0;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < out.values.size(); ++i)
    if (out.values[i] > 1e-15) {
      xs.push_back(out.xs[i]);
      ys.push_back(out.values[i]);
    }
  out.fitted = xs.size() >= 2 ? fit_loglog(xs, ys)
                              : -std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace lnse

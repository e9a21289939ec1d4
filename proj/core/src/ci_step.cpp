#include "lnse/ci_step.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "lnse/fft.hpp"
#include "lnse/operators.hpp"
#include "lnse/profiles.hpp"
#include "lnse/regression.hpp"

namespace lnse {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  double a = std::exp(-1.0 / s);
  double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v *= double(n - k + i) / i;
  return v;
}

// Unit-mass midpoint discretization of a smooth kernel supported in (0, ell).
std::vector<std::pair<double, double>> kernel_rule(double ell, int nodes) {
  if (nodes < 2) throw std::invalid_argument("mollifier: need at least 2 kernel nodes");
  std::vector<std::pair<double, double>> rule(size_t(nodes), {0.0, 0.0});
  double total = 0.0;
  for (int j = 0; j < nodes; ++j) {
    double s = (j + 0.5) / nodes;
    double u = 2.0 * s - 1.0;
    double w = std::exp(-1.0 / (1.0 - u * u));
    rule[size_t(j)] = {s * ell, w};
    total += w;
  }
  for (auto& [s, w] : rule) w /= total;
  return rule;
}

SpectralField scaled_dir(const SpectralField& g, const Eigen::Vector3d& dir) {
  if (g.n_components() != 1) throw std::invalid_argument("scaled_dir: scalar field required");
  SpectralField out(g.dims(), 3);
  for (int c = 0; c < 3; ++c) {
    if (dir(c) == 0.0) continue;
    for (long i = 0; i < g.modes_per_component(); ++i)
      out.data()[size_t(c * g.modes_per_component() + i)] = dir(c) * g.data()[size_t(i)];
  }
  return out;
}

// Pointwise dot / cross of two 3-vector fields on the doubled sampling grid,
// truncated back to the common dims (exact while bandwidths stay below the
// sampling headroom, same regime as the other pointwise products).
SpectralField dot_field(const SpectralField& u, const SpectralField& v) {
  if (!u.same_shape(v) || u.n_components() != 3)
    throw std::invalid_argument("dot_field: matching 3-vector fields required");
  PhysicalField pu = to_physical(u, 2), pv = to_physical(v, 2);
  PhysicalField s(pu.dims, 1);
  long n = pu.dims.size();
  for (long i = 0; i < n; ++i)
    s.v[size_t(i)] = pu.v[size_t(i)] * pv.v[size_t(i)] +
                     pu.v[size_t(n + i)] * pv.v[size_t(n + i)] +
                     pu.v[size_t(2 * n + i)] * pv.v[size_t(2 * n + i)];
  return from_physical(s, u.dims());
}

SpectralField cross_field(const SpectralField& u, const SpectralField& v) {
  if (!u.same_shape(v) || u.n_components() != 3)
    throw std::invalid_argument("cross_field: matching 3-vector fields required");
  PhysicalField pu = to_physical(u, 2), pv = to_physical(v, 2);
  PhysicalField w(pu.dims, 3);
  long n = pu.dims.size();
  for (long i = 0; i < n; ++i) {
    double a0 = pu.v[size_t(i)], a1 = pu.v[size_t(n + i)], a2 = pu.v[size_t(2 * n + i)];
    double b0 = pv.v[size_t(i)], b1 = pv.v[size_t(n + i)], b2 = pv.v[size_t(2 * n + i)];
    w.v[size_t(i)] = a1 * b2 - a2 * b1;
    w.v[size_t(n + i)] = a2 * b0 - a0 * b2;
    w.v[size_t(2 * n + i)] = a0 * b1 - a1 * b0;
  }
  return from_physical(w, u.dims());
}

SpectralField dir_dot_grad(const SpectralField& g, const Eigen::Vector3d& dir) {
  SpectralField out(g.dims(), 1);
  out.for_each_mode(0, [&](int k0, int k1, int k2, cplx& v) {
    v = cplx(0.0, kTwoPi * (dir(0) * k0 + dir(1) * k1 + dir(2) * k2)) * g.coeff(0, k0, k1, k2);
  });
  return out;
}

// 4th-order centered first derivative from 5 equispaced slices.
SpectralField fd4(const std::array<SpectralField, 5>& f, double h) {
  SpectralField d = f[0];
  d *= 1.0;
  d -= 8.0 * f[1];
  d += 8.0 * f[3];
  d -= f[4];
  d *= 1.0 / (12.0 * h);
  return d;
}

std::mutex jet_cache_mutex;

const JetTerms& cached_jet_terms(int k_index, const JetParams& p, int n_psi, int n_phi) {
  static std::map<std::array<double, 9>, JetTerms> cache;
  std::array<double, 9> key{p.r_par, p.r_perp, p.sigma, double(n_psi), double(n_phi),
                            double(k_index), p.shifts[size_t(k_index)](0),
                            p.shifts[size_t(k_index)](1), p.shifts[size_t(k_index)](2)};
  std::lock_guard<std::mutex> lock(jet_cache_mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, jet_terms(k_index, p, n_psi, n_phi)).first;
  return it->second;
}

double mean_of(const SpectralField& f) { return f.coeff(0, 0, 0, 0).real(); }

// L^p constants of the transverse potential profile (Frobenius over the
// grad_order derivative tuples), same mechanism as phi_norm_const.
double pot_norm_const(int grad_order, double p) {
  static std::map<std::pair<int, double>, double> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find({grad_order, p});
  if (it != cache.end()) return it->second;

  const int n = 512;
  std::vector<cplx> base(size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      base[size_t(i) * n + j] = phi_potential_profile(double(i) / n, double(j) / n);
  fft2(base, n, n, -1);

  std::vector<double> sq(size_t(n) * n, 0.0);
  std::vector<cplx> buf(size_t(n) * n);
  for (int a = 0; a <= grad_order; ++a) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        cplx d = std::pow(cplx(0.0, kTwoPi * freq_of(i, n)), a) *
                 std::pow(cplx(0.0, kTwoPi * freq_of(j, n)), grad_order - a);
        buf[size_t(i) * n + j] = d * base[size_t(i) * n + j];
      }
    fft2(buf, n, n, 1);
    double w = binomial(grad_order, a);
    for (size_t idx = 0; idx < buf.size(); ++idx) sq[idx] += w * buf[idx].real() * buf[idx].real();
  }
  double acc = 0.0, worst = 0.0;
  for (double s : sq) {
    double v = std::sqrt(s);
    worst = std::max(worst, v);
    acc += std::isinf(p) ? 0.0 : std::pow(v, p);
  }
  double v = std::isinf(p) ? worst : std::pow(acc / double(sq.size()), 1.0 / p);
  cache[{grad_order, p}] = v;
  return v;
}

double inv_or_zero(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

struct SliceBuild {
  double t = 0.0, chi = 0.0;
  bool active = false;
  AmplitudeSlice amp;
  SpectralField w_p, w_c, w_t, w_total, dw, potential;
  SpectralField f_osc1, f_osc2;
  double high_remainder = 0.0;
};

SpectralField zero_vec(Dims d) { return SpectralField(d, 3); }

}  // namespace

double CutoffChi::operator()(double t) const {
  return smoothstep((t - t_lo) / (t_hi - t_lo));
}

std::array<double, 3> CutoffChi::cn_bounds() const {
  const int n = 4000;
  double h = (t_hi - t_lo) / n;
  std::array<double, 3> b{1.0, 0.0, 0.0};
  for (int i = 1; i < n; ++i) {
    double t = t_lo + i * h;
    double f0 = (*this)(t - h), f1 = (*this)(t), f2 = (*this)(t + h);
    b[1] = std::max(b[1], std::abs((f2 - f0) / (2.0 * h)));
    b[2] = std::max(b[2], std::abs((f2 - 2.0 * f1 + f0) / (h * h)));
  }
  return b;
}

CutoffChi make_chi(double t_q2, double t_q1) {
  if (!(t_q2 < t_q1)) throw std::invalid_argument("make_chi: needs T_{q+2} < T_{q+1}");
  CutoffChi chi;
  chi.t_lo = 0.5 * (t_q2 + t_q1);
  chi.t_hi = t_q1;
  return chi;
}

SpectralField mollify_stress(const FieldSeries& r, double t, double ell, int nodes) {
  if (ell <= 0.0) throw std::invalid_argument("mollify_stress: ell must be positive");
  if (t - ell < -1e-12)
    throw std::runtime_error("mollify_stress: kernel support (0," + std::to_string(ell) +
                             ") exceeds available history at t = " + std::to_string(t));
  auto rule = kernel_rule(ell, nodes);
  SpectralField acc;
  bool first = true;
  for (const auto& [s, w] : rule) {
    SpectralField slice = r(t - s);
    slice *= w;
    if (first) {
      acc = std::move(slice);
      first = false;
    } else {
      acc += slice;
    }
  }
  return mollify_space(acc, ell);
}

AmplitudeSlice amplitudes(const SpectralField& r_ell, double gamma, double ell,
                          const WaveVectorSet& set) {
  if (r_ell.n_components() != 9)
    throw std::invalid_argument("amplitudes: 9-tensor stress required");
  if (gamma < 0.0)
    throw std::runtime_error("amplitudes: energy band violated, gamma = " +
                             std::to_string(gamma) + " < 0");
  const double eps_u = set.eps_u();

  PhysicalField pr = to_physical(r_ell, 2);
  const Dims m = pr.dims;
  const long n = m.size();
  std::array<std::vector<double>, 6> a_vals;
  for (auto& v : a_vals) v.assign(size_t(n), 0.0);
  std::vector<double> rho_vals(size_t(n), 0.0);

  AmplitudeSlice out;
  out.gamma = gamma;
  double velsum = 0.0;
  long worst_idx = -1;

  for (long i = 0; i < n; ++i) {
    Eigen::Matrix3d R;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) R(r, c) = pr.v[size_t((long(3 * r + c)) * n + i)];
    double fro = R.norm();
    double rho = 2.0 / eps_u * std::sqrt(ell * ell + fro * fro);
    rho_vals[size_t(i)] = rho;
    out.rho_mean += rho;
    double denom = rho + gamma;
    double adm = fro / denom;
    if (adm > out.admissibility) {
      out.admissibility = adm;
      worst_idx = i;
    }
    Eigen::Matrix3d S = Eigen::Matrix3d::Identity() - R / denom;
    std::array<double, 6> c = set.gamma_squared(S);
    Eigen::Matrix3d rec = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 6; ++k) {
      a_vals[size_t(k)][size_t(i)] = std::sqrt(denom * c[size_t(k)]);
      const Eigen::Vector3d& k1 = set.frames()[size_t(k)].k1;
      rec += denom * c[size_t(k)] * k1 * k1.transpose();
    }
    velsum += (rec - (denom * Eigen::Matrix3d::Identity() - R)).norm();
  }
  out.rho_mean /= double(n);
  out.velcancel_l1 = velsum / double(n);
  if (out.admissibility > eps_u + 1e-12) {
    std::ostringstream msg;
    msg << "amplitudes: admissibility |R_ell|/(rho+gamma) = " << out.admissibility
        << " exceeds eps_u = " << eps_u << " at sample index " << worst_idx;
    throw std::runtime_error(msg.str());
  }

  PhysicalField tmp(m, 1);
  tmp.v = rho_vals;
  out.rho = from_physical(tmp, r_ell.dims());
  for (int k = 0; k < 6; ++k) {
    tmp.v = a_vals[size_t(k)];
    out.a[size_t(k)] = from_physical(tmp, r_ell.dims());
  }
  return out;
}

double gamma_coefficient(const IterationState& st, const std::function<double(double)>& e,
                         double t, int nodes) {
  if (t - st.ell < -1e-12)
    throw std::runtime_error("gamma_coefficient: insufficient history at t = " +
                             std::to_string(t));
  const double eps_u = WaveVectorSet::builtin_345().eps_u();
  auto rule = kernel_rule(st.ell, nodes);
  double acc = 0.0;
  for (const auto& [s, w] : rule) {
    double ts = t - s;
    SpectralField u = st.u(ts);
    if (st.z) u += st.z(ts);
    double n2 = norm_l2(u);
    n2 *= n2;
    double f = 0.0;
    if (ts >= st.t_q1) {
      SpectralField r_ell = mollify_stress(st.r, ts, st.ell, nodes);
      PhysicalField pr = to_physical(r_ell, 1);
      long n = pr.dims.size();
      double rho_bar = 0.0;
      for (long i = 0; i < n; ++i) {
        double fro2 = 0.0;
        for (int c = 0; c < 9; ++c) {
          double v = pr.v[size_t(long(c) * n + i)];
          fro2 += v * v;
        }
        rho_bar += 2.0 / eps_u * std::sqrt(st.ell * st.ell + fro2);
      }
      rho_bar /= double(n);
      f = 0.75 * st.delta_q2 + 3.0 * rho_bar;
    }
    acc += w * (e(ts) - n2 - f) / 3.0;
  }
  if (acc < 0.0)
    throw std::runtime_error("gamma_coefficient: energy band violated, gamma(t=" +
                             std::to_string(t) + ") = " + std::to_string(acc));
  return acc;
}

namespace {

SliceBuild build_slice(const IterationState& st, const std::function<double(double)>& e,
                       double t, const StepOptions& opt, bool with_dw, bool with_forces) {
  CutoffChi chi = make_chi(st.t_q2, st.t_q1);
  SliceBuild sb;
  sb.t = t;
  sb.chi = chi(t);
  const Dims dims = st.dims;
  sb.w_p = zero_vec(dims);
  sb.w_c = zero_vec(dims);
  sb.w_t = zero_vec(dims);
  sb.dw = zero_vec(dims);
  sb.potential = zero_vec(dims);
  sb.f_osc1 = zero_vec(dims);
  sb.f_osc2 = zero_vec(dims);

  const double h = opt.fd_dt;
  std::array<double, 5> ts{t - 2 * h, t - h, t, t + h, t + 2 * h};
  bool any = false;
  for (double s : ts)
    if (chi(s) > 0.0) any = true;
  if (!any || (!with_dw && sb.chi <= 0.0)) {
    sb.w_total = sb.w_p;
    return sb;
  }
  sb.active = true;

  const int n_stencil = with_dw ? 5 : 1;
  std::array<AmplitudeSlice, 5> amp;
  std::array<double, 5> chis{};
  for (int j = 0; j < n_stencil; ++j) {
    double tj = with_dw ? ts[size_t(j)] : t;
    chis[size_t(j)] = chi(tj);
    if (chis[size_t(j)] > 0.0) {
      double g = gamma_coefficient(st, e, tj, opt.kernel_nodes);
      SpectralField r_ell = resample(mollify_stress(st.r, tj, st.ell, opt.kernel_nodes), dims);
      amp[size_t(j)] = amplitudes(r_ell, g, st.ell);
      amp[size_t(j)].t = tj;
    }
  }
  const int j0 = with_dw ? 2 : 0;
  sb.amp = amp[size_t(j0)];
  sb.chi = chis[size_t(j0)];

  const JetParams& p = st.jet;
  for (int k = 0; k < 6; ++k) {
    const JetTerms& jt = cached_jet_terms(k, p, opt.n_psi, opt.n_phi);
    const Eigen::Vector3d& k1 = jt.k1;
    SpectralField W = jet_field(jt, p, JetField::w, dims, t);
    SpectralField Wc = jet_field(jt, p, JetField::wc, dims, t);
    SpectralField Wtc = jet_field(jt, p, JetField::wtc, dims, t);

    std::array<SpectralField, 5> b, bsq;
    for (int j = 0; j < n_stencil; ++j) {
      if (chis[size_t(j)] > 0.0) {
        b[size_t(j)] = amp[size_t(j)].a[size_t(k)];
        b[size_t(j)] *= chis[size_t(j)];
      } else {
        b[size_t(j)] = SpectralField(dims, 1);
      }
      bsq[size_t(j)] = pointwise_multiply(b[size_t(j)], b[size_t(j)]);
    }
    const SpectralField& b0 = b[size_t(j0)];
    const SpectralField& bsq0 = bsq[size_t(j0)];
    SpectralField gb0 = gradient(b0);

    sb.w_p += pointwise_multiply(b0, W);
    sb.w_c += pointwise_multiply(b0, Wtc);
    sb.w_c += cross_field(gb0, Wc);
    sb.potential += pointwise_multiply(b0, Wc);

    SpectralField s_k = dot_field(W, W);
    SpectralField g_k = pointwise_multiply(bsq0, s_k);
    {
      SpectralField vt = leray_project(project_nonzero(scaled_dir(g_k, k1)));
      vt *= -1.0 / p.mu;
      sb.w_t += vt;
    }
    sb.high_remainder += mean_of(g_k) - mean_of(bsq0) * mean_of(s_k);

    if (with_forces) {
      SpectralField G = project_nonzero(s_k);
      SpectralField f1 = project_nonzero(
          scaled_dir(pointwise_multiply(dir_dot_grad(bsq0, k1), G), k1));
      sb.f_osc1 += f1;
    }
    if (with_dw) {
      SpectralField dW = jet_field(jt, p, JetField::w, dims, t, 1);
      SpectralField dWc = jet_field(jt, p, JetField::wc, dims, t, 1);
      SpectralField dWtc = jet_field(jt, p, JetField::wtc, dims, t, 1);
      SpectralField db = fd4(b, h);
      SpectralField dbsq = fd4(bsq, h);
      SpectralField ds_k = dot_field(W, dW);
      ds_k *= 2.0;

      sb.dw += pointwise_multiply(db, W);
      sb.dw += pointwise_multiply(b0, dW);
      sb.dw += pointwise_multiply(db, Wtc);
      sb.dw += pointwise_multiply(b0, dWtc);
      sb.dw += cross_field(gradient(db), Wc);
      sb.dw += cross_field(gb0, dWc);
      {
        SpectralField g = pointwise_multiply(dbsq, s_k);
        g += pointwise_multiply(bsq0, ds_k);
        SpectralField vt = leray_project(project_nonzero(scaled_dir(g, k1)));
        vt *= -1.0 / p.mu;
        sb.dw += vt;
      }
      if (with_forces) {
        SpectralField f2 = project_nonzero(scaled_dir(pointwise_multiply(dbsq, s_k), k1));
        f2 *= -1.0 / p.mu;
        sb.f_osc2 += f2;
      }
    }
  }
  sb.w_total = sb.w_p + sb.w_c + sb.w_t;
  return sb;
}

SpectralField eval_or_zero(const FieldSeries& f, double t, Dims dims, int nc) {
  if (!f) return SpectralField(dims, nc);
  return resample(f(t), dims);
}

GapRow make_gap_row(const IterationState& st, const std::function<double(double)>& e,
                    const SliceBuild& sb, const SpectralField& u_new) {
  GapRow row;
  row.t = sb.t;
  double mid = 0.5 * (st.t_q2 + st.t_q1);
  if (sb.t < mid)
    row.regime = 0;
  else if (sb.t <= st.t_q1)
    row.regime = 1;
  else if (sb.t <= 0.5 * (st.t_q1 + st.t_end))
    row.regime = 2;
  else
    row.regime = 3;
  row.lo = 0.5 * st.delta_q2;
  row.hi = 2.0 * st.delta_q1;
  double n2 = norm_l2(u_new);
  row.gap = e(sb.t) - n2 * n2;
  double pm = norm_l2(sb.w_p);
  row.principal_mass = pm * pm;
  row.principal_pred =
      sb.active ? 3.0 * sb.chi * sb.chi * (sb.amp.rho_mean + sb.amp.gamma) : 0.0;
  row.high_remainder = sb.high_remainder;
  return row;
}

}  // namespace

PerturbationSlice perturbations(const IterationState& st,
                                const std::function<double(double)>& e, double t,
                                const StepOptions& opt) {
  SliceBuild sb = build_slice(st, e, t, opt, true, false);
  PerturbationSlice out;
  out.t = t;
  out.chi = sb.chi;
  out.w_p = std::move(sb.w_p);
  out.w_c = std::move(sb.w_c);
  out.w_t = std::move(sb.w_t);
  out.w_total = std::move(sb.w_total);
  out.dw = std::move(sb.dw);
  out.potential = std::move(sb.potential);
  return out;
}

double relaxed_residual(const FieldSeries& u, const FieldSeries& r, const FieldSeries& z,
                        const FieldSeries& dudt, double nu, double t, double fd_dt) {
  SpectralField ut = u(t);
  SpectralField dd = dudt ? dudt(t)
                          : (1.0 / (2.0 * fd_dt)) * (u(t + fd_dt) - u(t - fd_dt));
  SpectralField uz = ut;
  if (z) uz += resample(z(t), ut.dims());
  SpectralField F = dd - nu * laplacian(ut) + divergence(outer_product(uz, uz)) -
                    divergence(resample(r(t), ut.dims()));
  return norm_l2(leray_project(project_nonzero(F)));
}

StepResult ci_step(const IterationState& st, const std::function<double(double)>& e,
                   const StepOptions& opt) {
  if (opt.analysis_times.empty())
    throw std::invalid_argument("ci_step: at least one analysis time required");
  for (int k = 0; k < 6; ++k) {
    const JetTerms& jt = cached_jet_terms(k, st.jet, opt.n_psi, opt.n_phi);
    int need = required_grid(jt, st.jet);
    if (st.dims.n0 < need || st.dims.n1 < need || st.dims.n2 < need)
      throw std::invalid_argument("ci_step: grid " + std::to_string(st.dims.n0) +
                                  " too small for the jets, need " + std::to_string(need));
  }
  const Dims dims = st.dims;
  const double p_lp = 16.0 / (16.0 - 7.0 * opt.p_exponent_eps);
  CutoffChi chi = make_chi(st.t_q2, st.t_q1);

  StepResult result;
  result.chi_bounds = chi.cn_bounds();
  result.u0_new = st.u(0.0);  // chi vanishes near 0: the datum is untouched

  bool first = true;
  for (double t : opt.analysis_times) {
    SliceBuild sb = build_slice(st, e, t, opt, true, true);
    SpectralField u_q = resample(st.u(t), dims);
    SpectralField z_t = eval_or_zero(st.z, t, dims, 3);
    SpectralField u_new = u_q + sb.w_total;
    double chi2 = sb.chi * sb.chi;

    SpectralField r_q = resample(st.r(t), dims);
    SpectralField r_ell = sb.active
                              ? resample(mollify_stress(st.r, t, st.ell, opt.kernel_nodes), dims)
                              : r_q;

    std::map<std::string, SpectralField> comp;
    comp["cut"] = (1.0 - chi2) * r_q;
    comp["osc3"] = chi2 * (r_q - r_ell);
    comp["osc1"] = inverse_divergence(sb.f_osc1, 1e-8);
    comp["osc2"] = inverse_divergence(sb.f_osc2, 1e-8);
    {
      SpectralField wct = sb.w_c + sb.w_t;
      SpectralField B = outer_product(sb.w_p, wct);
      B += transpose_tensor(B);
      B += outer_product(wct, wct);
      comp["cor"] = traceless_part(symmetric_part(B));
    }
    if (st.z) {
      SpectralField B = outer_product(sb.w_total, z_t);
      B += transpose_tensor(B);
      comp["com"] = traceless_part(symmetric_part(B));
    } else {
      comp["com"] = SpectralField(dims, 9);
    }
    {
      SpectralField F_lin = sb.dw - st.nu * laplacian(sb.w_total) +
                            divergence(outer_product(u_q, sb.w_total) +
                                       outer_product(sb.w_total, u_q));
      comp["lin"] = inverse_divergence(project_nonzero(leray_project(F_lin)), 1e-8);
    }

    SpectralField named = comp["lin"];
    for (const char* name : {"osc1", "osc2", "osc3", "cor", "com", "cut"})
      named += comp[name];

    SpectralField dudt_q = st.dudt
                               ? resample(st.dudt(t), dims)
                               : resample((1.0 / (2.0 * opt.fd_dt)) *
                                              (st.u(t + opt.fd_dt) - st.u(t - opt.fd_dt)),
                                          dims);
    SpectralField dudt_new = dudt_q + sb.dw;
    SpectralField uz = u_new + z_t;
    SpectralField F_full =
        dudt_new - st.nu * laplacian(u_new) + divergence(outer_product(uz, uz));
    comp["defect"] =
        inverse_divergence(project_nonzero(leray_project(F_full - divergence(named))), 1e-8);
    SpectralField r_sum = named + comp["defect"];

    SliceDiagnostics diag;
    diag.t = t;
    diag.residual_l2 =
        norm_l2(leray_project(project_nonzero(F_full - divergence(r_sum))));
    diag.baseline_residual_l2 =
        relaxed_residual(st.u, st.r, st.z, st.dudt, st.nu, t, opt.fd_dt);
    diag.div_defect = div_defect(u_new);
    diag.velcancel_l1 = sb.active ? sb.amp.velcancel_l1 : 0.0;
    diag.curl_identity_l2 = norm_l2(sb.w_p + sb.w_c - curl(sb.potential));
    for (const auto& [name, field] : comp) {
      ComponentNorms n;
      n.l1 = norm_lp(field, 1.0);
      n.lp = norm_lp(field, p_lp);
      n.trace_inf = trace_linf(field);
      n.sym_defect = symmetry_defect(field);
      diag.components[name] = n;
    }
    result.slices.push_back(std::move(diag));

    if (first) {
      result.u_new_first = u_new;
      if (opt.keep_fields) result.component_fields = std::move(comp);
      first = false;
    }
  }

  for (double t : opt.gap_times) {
    SliceBuild sb = build_slice(st, e, t, opt, false, false);
    SpectralField u_new = resample(st.u(t), dims) + sb.w_total;
    if (st.z) u_new += eval_or_zero(st.z, t, dims, 3);
    result.gaps.push_back(make_gap_row(st, e, sb, u_new));
  }
  return result;
}

std::vector<GapRow> energy_gap_report(const IterationState& st,
                                      const std::function<double(double)>& e,
                                      const StepOptions& opt) {
  std::vector<GapRow> rows;
  for (double t : opt.gap_times) {
    SliceBuild sb = build_slice(st, e, t, opt, false, false);
    SpectralField u_new = resample(st.u(t), st.dims) + sb.w_total;
    if (st.z) u_new += eval_or_zero(st.z, t, st.dims, 3);
    rows.push_back(make_gap_row(st, e, sb, u_new));
  }
  return rows;
}

double corrector_norm_separable(const JetParams& p, double lp, int N, int M) {
  validate(p);
  double invp = inv_or_zero(lp);
  double sn = p.sigma * WaveVectorSet::builtin_345().n_lambda();
  double jc = std::pow(sn / p.r_perp, 2);
  double acc = 0.0;
  for (int j = 0; j <= N; ++j)
    acc += binomial(N, j) * std::pow(sn, j + M) * std::pow(p.mu, M) *
           std::pow(p.r_par, invp - 0.5 - (j + M)) * psi_norm_const(j + M, lp) *
           std::pow(sn, 1 + N - j) *
           std::pow(p.r_perp, 2.0 * invp - 1.0 - (1 + N - j)) * pot_norm_const(1 + N - j, lp);
  return kTwoPi * acc / jc;
}

double transport_corrector_norm_separable(const JetParams& p, double lp, int N, int M) {
  validate(p);
  double invp = inv_or_zero(lp);
  double sn = p.sigma * WaveVectorSet::builtin_345().n_lambda();
  double jc = std::pow(sn / p.r_perp, 2);
  double acc = 0.0;
  for (int j = 0; j <= N; ++j)
    acc += binomial(N, j) * std::pow(sn, 1 + j + M) * std::pow(p.mu, M) *
           std::pow(p.r_par, invp - 0.5 - (1 + j + M)) * psi_norm_const(1 + j + M, lp) *
           std::pow(sn, 1 + N - j) *
           std::pow(p.r_perp, 2.0 * invp - 1.0 - (1 + N - j)) * pot_norm_const(1 + N - j, lp);
  return kTwoPi * kTwoPi * acc / jc;
}

double fast_square_norm_separable(const JetParams& p, double lp) {
  validate(p);
  double invp = inv_or_zero(lp);
  double cp = psi_norm_const(0, 2.0 * lp) * phi_norm_const(0, 2.0 * lp);
  return std::pow(p.r_par, invp - 1.0) * std::pow(p.r_perp, 2.0 * (invp - 1.0)) * cp * cp;
}

std::vector<ComponentFit> component_norm_report(const std::vector<double>& lambda_sweep,
                                                double eps, double ell, double nu) {
  if (lambda_sweep.size() < 4)
    throw std::invalid_argument("component_norm_report: need at least 4 sweep points");
  if (ell <= 0.0) throw std::invalid_argument("component_norm_report: ell must be positive");
  const double p_lp = 16.0 / (16.0 - 7.0 * eps);

  std::vector<ComponentFit> fits;
  auto add = [&](const std::string& name, double predicted, bool has_fit,
                 const std::function<double(const JetParams&)>& value) {
    ComponentFit f;
    f.name = name;
    f.predicted = predicted;
    f.has_fit = has_fit;
    for (double lam : lambda_sweep) {
      JetParams p = JetParams::paper(lam);
      f.lambdas.push_back(lam);
      f.values.push_back(value(p));
    }
    if (has_fit) f.fitted = fit_loglog(f.lambdas, f.values);
    fits.push_back(std::move(f));
  };

  add("lin", -1.0 / 7.0 + eps, true, [&](const JetParams& p) {
    double sn = p.sigma * WaveVectorSet::builtin_345().n_lambda();
    double v = nu * jet_norm_separable(p, p_lp, 1, 0);
    v += nu * (corrector_norm_separable(p, p_lp, 1, 0) +
               transport_corrector_norm_separable(p, p_lp, 1, 0));
    v += corrector_norm_separable(p, p_lp, 0, 1);  // d_t of the curl potential
    v += (2.0 + 1.0 / ell) / (kTwoPi * sn) * jet_norm_separable(p, p_lp, 0, 0);
    return v;
  });
  add("osc1", -1.0 / 7.0 + eps, true, [&](const JetParams& p) {
    double sn = p.sigma * WaveVectorSet::builtin_345().n_lambda();
    return fast_square_norm_separable(p, p_lp) / (kTwoPi * sn * ell);
  });
  add("osc2", -9.0 / 7.0 + eps, true, [&](const JetParams& p) {
    return fast_square_norm_separable(p, p_lp) / (p.mu * ell);
  });
  add("cor", -1.0 / 7.0, true, [&](const JetParams& p) {
    // cross term w_p x (w_c + w_t) per unit amplitude; the quadratic
    // corrector square carries an extra amplitude factor in the scheme
    double w2 = jet_norm_separable(p, 2.0, 0, 0);
    double c2 = transport_corrector_norm_separable(p, 2.0, 0, 0) +
                corrector_norm_separable(p, 2.0, 0, 0) / ell;
    double t2 = fast_square_norm_separable(p, 2.0) / p.mu;
    return w2 * (c2 + t2);
  });
  add("osc3", 0.0, false, [&](const JetParams&) { return 1.0; });
  add("com", 0.0, false, [&](const JetParams&) { return 0.0; });
  add("cut", 0.0, false, [&](const JetParams&) { return 1.0; });
  return fits;
}

}  // namespace lnse

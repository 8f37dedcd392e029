#pragma once

#include <array>
#include <cmath>
#include <string>

#include "ttlab/errors.hpp"
#include "ttlab/field.hpp"
#include "ttlab/grid.hpp"
#include "ttlab/models.hpp"

namespace ttlab {

// ----------------------------------------------------------------------------
// Norms.  Sobolev weights use the magnitude reading of the lattice wavenumbers
// (Nyquist kept); derivative factors inside the energy ledger use the
// derivative reading so the ledger matches the dynamics mode for mode.

enum class NormKind { l2, lp, linf, hm, hdot, hm_cap_hdot };

struct NormRequest {
  NormKind kind = NormKind::l2;
  double p = 2.0;   // for lp
  int m = 0;        // Sobolev order for hm / hm_cap_hdot
  double s = 0.0;   // homogeneous order for hdot (signed); for hm_cap_hdot the
                    // intersection partner is Lambda^{-s}
};

namespace detail {

// vol * sum w(|k|) |c_k|^2 with w a polynomial in |k|^2.
template <class Weight>
double weighted_spectral_sum(const SpectralScalar& f, Weight&& w) {
  const GridSpec& g = f.grid;
  double acc = 0.0;
  for (size_t i = 0; i < g.size(); ++i) acc += w(k_mag_sq(g, i)) * std::norm(f.c[i]);
  return g.volume() * acc;
}

inline double sobolev_weight(double k2, int m) {
  double w = 1.0, p = 1.0;
  for (int j = 1; j <= m; ++j) {
    p *= k2;
    w += p;
  }
  return w;
}

}  // namespace detail

inline double hm_norm_sq(const SpectralScalar& f, int m) {
  return detail::weighted_spectral_sum(f, [m](double k2) { return detail::sobolev_weight(k2, m); });
}

inline double hdot_norm_sq(const SpectralScalar& f, double s) {
  if (s == 0.0) return l2_norm_sq(f);
  const GridSpec& g = f.grid;
  if (s < 0.0 && std::abs(f.c[0]) > 1e-13 * std::max(l2_norm(f), 1e-300))
    throw NegativeOrderOnNonzeroMean("negative-order norm of a field with nonzero mean");
  double acc = 0.0;
  for (size_t i = 1; i < g.size(); ++i) {
    double k2 = k_mag_sq(g, i);
    if (k2 > 0.0) acc += std::pow(k2, s) * std::norm(f.c[i]);
  }
  return g.volume() * acc;
}

inline double norm(const SpectralScalar& f, const NormRequest& rq) {
  switch (rq.kind) {
    case NormKind::l2: return l2_norm(f);
    case NormKind::lp: return lp_norm(f, rq.p);
    case NormKind::linf: return linf_norm(f);
    case NormKind::hm: return std::sqrt(hm_norm_sq(f, rq.m));
    case NormKind::hdot: return std::sqrt(hdot_norm_sq(f, rq.s));
    case NormKind::hm_cap_hdot:
      return std::sqrt(hm_norm_sq(f, rq.m) + hdot_norm_sq(f, -rq.s));
  }
  return 0.0;
}

inline double norm(const SpectralVector& u, const NormRequest& rq) {
  if (rq.kind == NormKind::linf) {
    double m = 0.0;
    for (int a = 0; a < u.grid.d; ++a) m = std::max(m, linf_norm(u.comp[a]));
    return m;
  }
  if (rq.kind == NormKind::lp) {
    double acc = 0.0;
    for (int a = 0; a < u.grid.d; ++a) acc += std::pow(lp_norm(u.comp[a], rq.p), rq.p);
    return std::pow(acc, 1.0 / rq.p);
  }
  double acc = 0.0;
  for (int a = 0; a < u.grid.d; ++a) {
    double v = norm(u.comp[a], rq);
    acc += v * v;
  }
  return std::sqrt(acc);
}

// Pair norm over (u, eta): root sum of squares, except sup norms take the max.
inline double norm(const State& st, const NormRequest& rq) {
  if (rq.kind == NormKind::linf) return std::max(norm(st.u, rq), norm(st.eta, rq));
  double a = norm(st.u, rq);
  double b = norm(st.eta, rq);
  return std::sqrt(a * a + b * b);
}

inline double sobolev_pair(const State& st, int m) {
  NormRequest rq;
  rq.kind = NormKind::hm;
  rq.m = m;
  return norm(st, rq);
}

// Velocity component along the alignment direction e_1.
inline const SpectralScalar& ubar(const SpectralVector& u) { return u.comp[0]; }

inline double mean_eta(const State& st) { return st.eta.c[0].real(); }

// ----------------------------------------------------------------------------
// Energy ledger at derivative level k: every term of
//   d/dt 1/2 ||Lambda^k (u, eta)||^2 = -(dissipation) + sum(fluxes)
// for the perturbation-form dynamics.  Skew pairs (mean transport, pressure
// against velocity divergence) cancel exactly and are omitted.  Fluxes:
//   I   = -<L^k(u.grad u), L^k u>
//   II  = -<L^k(|u|^2 u),  L^k u>
//   III = -<L^k |u|^2,     L^k u_1>
//   IV  = -2<L^k(u_1 u),   L^k u>
//   V   = -<L^k div(eta u), L^k eta>
//   VI  = +<L^k((u+e_1).grad((u+e_1).grad u)), L^k u>      (TT only)
// Dissipation: ||L^k grad u||^2 + ||L^k div u||^2 + 2||L^k u_1||^2, plus
// ||L^k grad eta||^2 for PPTT.  The TT mean-transport square sits whole
// inside VI, so its damping is not broken out separately.
struct EnergyLedger {
  int level = 0;
  double energy = 0.0;
  double diss_grad_u = 0.0;
  double diss_div = 0.0;
  double diss_align = 0.0;
  double diss_grad_eta = 0.0;
  std::array<double, 6> flux{};  // I..VI
  double dissipation() const { return diss_grad_u + diss_div + diss_align + diss_grad_eta; }
  double flux_total() const {
    double s = 0.0;
    for (double f : flux) s += f;
    return s;
  }
};

namespace detail {

// <Lambda^k f, Lambda^k g> with magnitude-reading weights.
inline double weighted_inner(const SpectralScalar& f, const SpectralScalar& g, int k) {
  const GridSpec& gr = f.grid;
  if (!(gr == g.grid)) throw GridMismatch("weighted inner product across grids");
  double acc = 0.0;
  for (size_t i = 0; i < gr.size(); ++i) {
    double w = 1.0;
    if (k > 0) {
      double k2 = k_mag_sq(gr, i);
      for (int j = 0; j < k; ++j) w *= k2;
    }
    acc += w * (f.c[i].real() * g.c[i].real() + f.c[i].imag() * g.c[i].imag());
  }
  return gr.volume() * acc;
}

// vol * sum |k_d|^2 |k_m|^{2k} |c|^2: one derivative factor in the derivative
// reading, Sobolev weight in the magnitude reading.
inline double grad_diss(const SpectralScalar& f, int k) {
  const GridSpec& g = f.grid;
  double acc = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    std::array<double, 3> kd = k_deriv_vec(g, i);
    double kd2 = 0.0;
    for (int a = 0; a < g.d; ++a) kd2 += kd[a] * kd[a];
    double w = 1.0;
    if (k > 0) {
      double k2 = k_mag_sq(g, i);
      for (int j = 0; j < k; ++j) w *= k2;
    }
    acc += kd2 * w * std::norm(f.c[i]);
  }
  return g.volume() * acc;
}

}  // namespace detail

inline EnergyLedger energy_ledger(const State& st, int level, ModelKind kind) {
  const GridSpec& g = st.u.grid;
  const int d = g.d;
  EnergyLedger led;
  led.level = level;

  // Energy and quadratic dissipation.
  double e = 0.0;
  for (int a = 0; a < d; ++a)
    e += detail::weighted_inner(st.u.comp[a], st.u.comp[a], level);
  e += detail::weighted_inner(st.eta, st.eta, level);
  led.energy = 0.5 * e;
  for (int a = 0; a < d; ++a) led.diss_grad_u += detail::grad_diss(st.u.comp[a], level);
  SpectralScalar divu = divergence(st.u);
  led.diss_div = detail::weighted_inner(divu, divu, level);
  led.diss_align = 2.0 * detail::weighted_inner(st.u.comp[0], st.u.comp[0], level);
  if (kind == ModelKind::pptt) led.diss_grad_eta = detail::grad_diss(st.eta, level);

  // I: advection.
  for (int i = 0; i < d; ++i) {
    SpectralScalar adv = SpectralScalar::zeros(g);
    for (int j = 0; j < d; ++j) {
      SpectralScalar dui = partial_derivative(st.u.comp[i], j);
      SpectralScalar p = pointwise_product(st.u.comp[j], dui, 2);
      axpy(1.0, p, adv);
    }
    led.flux[0] -= detail::weighted_inner(adv, st.u.comp[i], level);
  }

  // II: cubic damping.  III: alignment source.  IV: mean-velocity coupling.
  SpectralScalar sq = SpectralScalar::zeros(g);
  for (int j = 0; j < d; ++j) {
    SpectralScalar p = pointwise_product(st.u.comp[j], st.u.comp[j], 2);
    axpy(1.0, p, sq);
  }
  for (int i = 0; i < d; ++i) {
    SpectralScalar cub = SpectralScalar::zeros(g);
    for (int j = 0; j < d; ++j) {
      SpectralScalar p = pointwise_product(st.u.comp[j], st.u.comp[j], st.u.comp[i], 3);
      axpy(1.0, p, cub);
    }
    led.flux[1] -= detail::weighted_inner(cub, st.u.comp[i], level);
    SpectralScalar ub = pointwise_product(st.u.comp[0], st.u.comp[i], 2);
    led.flux[3] -= 2.0 * detail::weighted_inner(ub, st.u.comp[i], level);
  }
  led.flux[2] = -detail::weighted_inner(sq, st.u.comp[0], level);

  // V: density transport.
  SpectralScalar divq = SpectralScalar::zeros(g);
  for (int j = 0; j < d; ++j) {
    SpectralScalar q = pointwise_product(st.eta, st.u.comp[j], 2);
    SpectralScalar dq = partial_derivative(q, j);
    axpy(1.0, dq, divq);
  }
  led.flux[4] = -detail::weighted_inner(divq, st.eta, level);

  // VI: TT nested transport, reconstructed exactly as the dynamics computes
  // it (nonlinear part from the fused evaluator in both model kinds, linear
  // part spectrally), so the ledger closes for full-band states.
  if (kind == ModelKind::tt) {
    Tendency nt = nonlinear_remainder(st, ModelKind::tt);
    Tendency np = nonlinear_remainder(st, ModelKind::pptt);
    for (int i = 0; i < d; ++i) {
      SpectralScalar nested = nt.du.comp[i];
      axpy(-1.0, np.du.comp[i], nested);
      SpectralScalar d1 = partial_derivative(st.u.comp[i], 0);
      SpectralScalar d11 = partial_derivative(d1, 0);
      axpy(1.0, d11, nested);
      led.flux[5] += detail::weighted_inner(nested, st.u.comp[i], level);
    }
  }
  return led;
}

// Residual of the ledger: five energy samples at t - 2h .. t + 2h give a
// fourth-order time derivative; the ledger at the center supplies the rest.
inline double ledger_residual(const std::array<double, 5>& energy, double h,
                              const EnergyLedger& center) {
  double dedt = (energy[0] - 8.0 * energy[1] + 8.0 * energy[3] - energy[4]) / (12.0 * h);
  return dedt + center.dissipation() - center.flux_total();
}

// ----------------------------------------------------------------------------
// Hypocoercive functional: the squared pair Sobolev norm plus a damped
// velocity-density cross term,
//   ||(u,eta)||_{H^m}^2 + delta0 sum_{k=0}^{m-1} <Lambda^k u, Lambda^k grad eta>.
inline double hypo_functional(const State& st, int m, double delta0) {
  const GridSpec& g = st.u.grid;
  double base = 0.0;
  for (int a = 0; a < g.d; ++a) base += hm_norm_sq(st.u.comp[a], m);
  base += hm_norm_sq(st.eta, m);

  double cross = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    std::array<double, 3> kd = k_deriv_vec(g, i);
    Complex uk(0.0, 0.0);
    for (int a = 0; a < g.d; ++a) uk += kd[a] * st.u.comp[a].c[i];
    double k2 = k_mag_sq(g, i);
    double w = 0.0, p = 1.0;
    for (int k = 0; k < m; ++k) {
      w += p;
      p *= k2;
    }
    cross += w * std::imag(uk * std::conj(st.eta.c[i]));
  }
  cross *= g.volume();
  return base + delta0 * cross;
}

// ----------------------------------------------------------------------------
// Decay-rate bookkeeping.

// Exponent of the slow algebraic branch; zero exactly at (d, m) = (3, 3).
inline double beta_exponent(int d, int m) {
  if (d != 2 && d != 3) throw ConfigError("beta exponent defined for d in {2, 3}");
  if (m < 2) throw ConfigError("beta exponent requires m >= 2");
  double a = 0.5 * d + m - 1.0;
  double disc = a * a + 8.0 * m - 2.0 * d * m - 2.0 * d;
  return 0.5 * (a - std::sqrt(disc));
}

struct DecayParams {
  ModelKind kind = ModelKind::pptt;
  int d = 3;
  int m = 3;
  int l = 0;        // derivative level whose decay rate is predicted
  double s = 0.0;   // negative-order index of the low-mode hypothesis

  void validate() const {
    if (d != 2 && d != 3) throw ConfigError("decay setup requires d in {2, 3}");
    if (m < 3) throw ConfigError("decay setup requires m >= 3");
    if (s < 0.0 || s >= 0.5 * d)
      throw ConfigError("decay setup requires s in [0, d/2), got s = " + std::to_string(s));
    if (s == 0.0 && !(d == 3 && m == 3))
      throw ConfigError("s = 0 is admissible only for (d, m) = (3, 3)");
    const int lmax = kind == ModelKind::tt ? m - 1 : m;
    if (l < 0 || l > lmax)
      throw ConfigError("decay level l must lie in [0, " + std::to_string(lmax) +
                        "] for this model kind");
  }

  // Predicted algebraic rate of ||Lambda^l (u, eta)||: (1+t)^{-(l+s)/2}.
  double rate() const { return -0.5 * (static_cast<double>(l) + s); }
};

}  // namespace ttlab

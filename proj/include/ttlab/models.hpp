#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ttlab/errors.hpp"
#include "ttlab/field.hpp"
#include "ttlab/grid.hpp"

namespace ttlab {

enum class ModelKind { tt, pptt };
enum class ModelForm { primitive, perturbation };

inline const char* to_string(ModelKind k) { return k == ModelKind::tt ? "tt" : "pptt"; }
inline const char* to_string(ModelForm f) { return f == ModelForm::primitive ? "primitive" : "perturbation"; }

struct ModelParams {
  ModelKind kind = ModelKind::pptt;
  ModelForm form = ModelForm::perturbation;
  double alpha = 1.0;
  double beta = 1.0;
  double pressure_slope = 1.0;
  double rho_s = 1.0;
  std::array<double, 3> e_dir{1.0, 0.0, 0.0};

  void validate(int d) const {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw ConfigError("alpha must be positive and finite, got " + std::to_string(alpha));
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw ConfigError("beta must be positive and finite, got " + std::to_string(beta));
    if (!(rho_s > 0.0) || !std::isfinite(rho_s))
      throw ConfigError("rho_s must be positive and finite, got " + std::to_string(rho_s));
    if (!std::isfinite(pressure_slope) || !(pressure_slope > 0.0))
      throw ConfigError("pressure_slope must be positive and finite, got " + std::to_string(pressure_slope));
    double nrm = 0.0;
    for (int a = 0; a < d; ++a) nrm += e_dir[a] * e_dir[a];
    for (int a = d; a < 3; ++a)
      if (e_dir[a] != 0.0) throw ConfigError("e_dir has a component outside the active dimensions");
    if (std::abs(std::sqrt(nrm) - 1.0) > 1e-12)
      throw ConfigError("e_dir must be a unit vector, |e| = " + std::to_string(std::sqrt(nrm)));
  }

  bool is_normalized(int d) const {
    if (alpha != 1.0 || beta != 1.0 || pressure_slope != 1.0 || rho_s != 1.0) return false;
    if (e_dir[0] != 1.0) return false;
    for (int a = 1; a < d; ++a)
      if (e_dir[a] != 0.0) return false;
    return true;
  }

  // Steady velocity magnitude sqrt(alpha/beta).
  double steady_speed() const { return std::sqrt(alpha / beta); }
};

struct State {
  SpectralVector u;    // velocity (primitive) or velocity deviation (perturbation)
  SpectralScalar eta;  // density (primitive) or density deviation (perturbation)
  double t = 0.0;

  static State zeros(const GridSpec& g) {
    State s;
    s.u = SpectralVector::zeros(g);
    s.eta = SpectralScalar::zeros(g);
    return s;
  }
};

struct Tendency {
  SpectralVector du;
  SpectralScalar deta;

  static Tendency zeros(const GridSpec& g) {
    Tendency t;
    t.du = SpectralVector::zeros(g);
    t.deta = SpectralScalar::zeros(g);
    return t;
  }
};

// Flocking steady state: rho = rho_s (constant), v = sqrt(alpha/beta) e.
inline State steady_state(const GridSpec& g, const ModelParams& p) {
  p.validate(g.d);
  State s = State::zeros(g);
  const double speed = p.steady_speed();
  for (int a = 0; a < g.d; ++a) s.u.comp[a].c[0] = Complex(speed * p.e_dir[a], 0.0);
  s.eta.c[0] = Complex(p.rho_s, 0.0);
  return s;
}

// ----------------------------------------------------------------------------
// Per-mode linearization matrix, ordered (u_1..u_d, eta).

struct ModeMatrix {
  int dim = 0;                     // d + 1
  std::array<Complex, 16> a{};     // row-major, dim x dim

  Complex& at(int i, int j) { return a[static_cast<size_t>(i * dim + j)]; }
  const Complex& at(int i, int j) const { return a[static_cast<size_t>(i * dim + j)]; }

  void apply(const Complex* in, Complex* out) const {
    for (int i = 0; i < dim; ++i) {
      Complex acc(0.0, 0.0);
      for (int j = 0; j < dim; ++j) acc += at(i, j) * in[j];
      out[i] = acc;
    }
  }

  Eigen::MatrixXcd to_eigen() const {
    Eigen::MatrixXcd m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = at(i, j);
    return m;
  }
};

// Linearization about the steady state for general parameters, at wavevector k.
// Velocity rows: -i(v_s.k) u - 2 alpha (e.u) e - k (k.u) - |k|^2 u - i slope k eta,
// with the TT transport square adding -(v_s.k)^2 u.  Density row:
// -i rho_s (k.u) - i(v_s.k) eta, plus -|k|^2 eta for PPTT.
inline ModeMatrix linear_mode_matrix_primitive(const std::array<double, 3>& k, int d,
                                               const ModelParams& p) {
  ModeMatrix m;
  m.dim = d + 1;
  const double speed = p.steady_speed();
  double vk = 0.0, k2 = 0.0;
  for (int a = 0; a < d; ++a) {
    vk += speed * p.e_dir[a] * k[a];
    k2 += k[a] * k[a];
  }
  const Complex adv(0.0, -vk);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      Complex v(-k[i] * k[j] - 2.0 * p.alpha * p.e_dir[i] * p.e_dir[j], 0.0);
      if (i == j) {
        v += adv;
        v += Complex(-k2, 0.0);
        if (p.kind == ModelKind::tt) v += Complex(-vk * vk, 0.0);
      }
      m.at(i, j) = v;
    }
    m.at(i, d) = Complex(0.0, -p.pressure_slope * k[i]);
    m.at(d, i) = Complex(0.0, -p.rho_s * k[i]);
  }
  m.at(d, d) = adv;
  if (p.kind == ModelKind::pptt) m.at(d, d) += Complex(-k2, 0.0);
  return m;
}

// Normalized perturbation form (alpha = beta = rho_s = slope = 1, e = e_1).
inline ModeMatrix linear_mode_matrix(const std::array<double, 3>& k, int d, ModelKind kind) {
  ModelParams p;
  p.kind = kind;
  p.form = ModelForm::perturbation;
  return linear_mode_matrix_primitive(k, d, p);
}

// Apply the per-mode linearization across the whole lattice.
inline Tendency apply_linear(const State& st, ModelKind kind) {
  const GridSpec& g = st.u.grid;
  Tendency out = Tendency::zeros(g);
  const int d = g.d;
  Complex in[4], res[4];
  for (size_t f = 0; f < g.size(); ++f) {
    std::array<double, 3> k = k_deriv_vec(g, f);
    ModeMatrix m = linear_mode_matrix(k, d, kind);
    for (int a = 0; a < d; ++a) in[a] = st.u.comp[a].c[f];
    in[d] = st.eta.c[f];
    m.apply(in, res);
    for (int a = 0; a < d; ++a) out.du.comp[a].c[f] = res[a];
    out.deta.c[f] = res[d];
  }
  return out;
}

// ----------------------------------------------------------------------------
// Fused nonlinear evaluator.
//
// All quadratic and cubic terms are produced in one pass over a single padded
// lattice: scatter the needed coefficient arrays, run one inverse transform
// each, combine pointwise, and run one forward transform per output channel.
// The padding policy matches pointwise_product, so term-by-term assembly via
// that routine gives identical coefficients up to roundoff; this path just
// avoids re-transforming shared factors.  Physical-space buffers are kept in
// a lazily sized pool so repeated right-hand-side evaluations do not allocate.

namespace detail {

class ModelPool {
 public:
  static CVec& get(int slot, size_t total) {
    static std::array<CVec, 32> bufs;
    CVec& b = bufs[static_cast<size_t>(slot)];
    if (b.size() < total) b.resize(total);
    return b;
  }
};

// Slot layout for the fused evaluator (d <= 3).
constexpr int kSlotSpec = 0;                                     // scatter/analysis staging
constexpr int kSlotU(int i) { return 1 + i; }                    // 1..3
constexpr int kSlotEta = 4;
constexpr int kSlotDU(int i, int j) { return 5 + 3 * i + j; }    // 5..13
constexpr int kSlotAdv(int i) { return 14 + i; }                 // 14..16
constexpr int kSlotSq = 17;
constexpr int kSlotA(int i) { return 18 + i; }                   // 18..20
constexpr int kSlotQ(int j) { return 21 + j; }                   // 21..23
constexpr int kSlotW(int i) { return 24 + i; }                   // 24..26 (spectral, padded)

inline void synth_padded(const SpectralScalar& f, const std::vector<int>& pd, size_t total,
                         CVec& out) {
  CVec& spec = ModelPool::get(kSlotSpec, total);
  std::fill(spec.begin(), spec.begin() + static_cast<std::ptrdiff_t>(total), Complex(0.0, 0.0));
  pad_scatter(f, spec.data());
  fft_synthesis(pd, spec.data(), out.data());
}

inline void analyze_gather(const CVec& phys, const std::vector<int>& pd, size_t total,
                           const GridSpec& g, SpectralScalar& out) {
  CVec& spec = ModelPool::get(kSlotSpec, total);
  fft_analysis(pd, phys.data(), spec.data());
  pad_gather(g, spec.data(), out);
}

}  // namespace detail

// Nonlinear part of the perturbation-form tendency (everything the per-mode
// linearization does not cover).  Velocity channel:
//   -u.grad u - |u|^2 u - e_1 |u|^2 - 2 u_1 u  [+ TT: u.grad w + d_1(u.grad u),
//    where w = u.grad u + d_1 u].
// Density channel: -div(eta u).
inline Tendency nonlinear_remainder(const State& st, ModelKind kind) {
  const GridSpec& g = st.u.grid;
  const int d = g.d;
  const std::vector<int> pd = detail::padded_dims(g);
  const size_t total = detail::dims_total(pd);
  using detail::ModelPool;

  // Physical samples of u, eta, and all first derivatives of u.
  for (int i = 0; i < d; ++i)
    detail::synth_padded(st.u.comp[i], pd, total, ModelPool::get(detail::kSlotU(i), total));
  detail::synth_padded(st.eta, pd, total, ModelPool::get(detail::kSlotEta, total));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      SpectralScalar dui = partial_derivative(st.u.comp[i], j);
      detail::synth_padded(dui, pd, total, ModelPool::get(detail::kSlotDU(i, j), total));
    }

  // Pointwise combinations.
  CVec& sq = ModelPool::get(detail::kSlotSq, total);
  std::fill(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(total), Complex(0.0, 0.0));
  for (int i = 0; i < d; ++i) {
    const CVec& ui = ModelPool::get(detail::kSlotU(i), total);
    for (size_t x = 0; x < total; ++x) sq[x] += ui[x] * ui[x];
  }
  for (int i = 0; i < d; ++i) {
    CVec& adv = ModelPool::get(detail::kSlotAdv(i), total);
    std::fill(adv.begin(), adv.begin() + static_cast<std::ptrdiff_t>(total), Complex(0.0, 0.0));
    for (int j = 0; j < d; ++j) {
      const CVec& uj = ModelPool::get(detail::kSlotU(j), total);
      const CVec& duij = ModelPool::get(detail::kSlotDU(i, j), total);
      for (size_t x = 0; x < total; ++x) adv[x] += uj[x] * duij[x];
    }
  }
  const CVec& u1 = ModelPool::get(detail::kSlotU(0), total);
  for (int i = 0; i < d; ++i) {
    CVec& acc = ModelPool::get(detail::kSlotA(i), total);
    const CVec& ui = ModelPool::get(detail::kSlotU(i), total);
    const CVec& adv = ModelPool::get(detail::kSlotAdv(i), total);
    for (size_t x = 0; x < total; ++x) {
      Complex v = -adv[x] - sq[x] * ui[x] - 2.0 * u1[x] * ui[x];
      if (i == 0) v -= sq[x];
      acc[x] = v;
    }
  }
  for (int j = 0; j < d; ++j) {
    CVec& q = ModelPool::get(detail::kSlotQ(j), total);
    const CVec& uj = ModelPool::get(detail::kSlotU(j), total);
    const CVec& et = ModelPool::get(detail::kSlotEta, total);
    for (size_t x = 0; x < total; ++x) q[x] = et[x] * uj[x];
  }

  if (kind == ModelKind::tt) {
    // w_i = (u.grad u)_i + d_1 u_i lives below the padded band limit, so its
    // derivatives can be taken exactly on the padded lattice.
    GridSpec gp = g;
    gp.n = pd[0];
    for (int i = 0; i < d; ++i) {
      CVec& w = ModelPool::get(detail::kSlotW(i), total);
      const CVec& adv = ModelPool::get(detail::kSlotAdv(i), total);
      const CVec& du0 = ModelPool::get(detail::kSlotDU(i, 0), total);
      CVec& phys = ModelPool::get(detail::kSlotSpec, total);
      for (size_t x = 0; x < total; ++x) phys[x] = adv[x] + du0[x];
      fft_analysis(pd, phys.data(), w.data());
    }
    for (int i = 0; i < d; ++i) {
      CVec& acc = ModelPool::get(detail::kSlotA(i), total);
      for (int j = 0; j < d; ++j) {
        CVec& spec = ModelPool::get(detail::kSlotSpec, total);
        const CVec& w = ModelPool::get(detail::kSlotW(i), total);
        for (size_t f = 0; f < total; ++f) {
          double kj = k_deriv_vec(gp, f)[static_cast<size_t>(j)];
          spec[f] = Complex(0.0, kj) * w[f];
        }
        // Overwrite the derivative buffer: DU is fully consumed above.
        CVec& dw = ModelPool::get(detail::kSlotDU(i, j), total);
        fft_synthesis(pd, spec.data(), dw.data());
        const CVec& uj = ModelPool::get(detail::kSlotU(j), total);
        for (size_t x = 0; x < total; ++x) acc[x] += uj[x] * dw[x];
      }
    }
  }

  // Forward transforms and truncation back to the base lattice.
  Tendency out = Tendency::zeros(g);
  SpectralScalar tmp = SpectralScalar::zeros(g);
  for (int i = 0; i < d; ++i) {
    detail::analyze_gather(ModelPool::get(detail::kSlotA(i), total), pd, total, g, out.du.comp[i]);
  }
  if (kind == ModelKind::tt) {
    // d_1(u.grad u) enters the velocity channel as an exact spectral derivative.
    for (int i = 0; i < d; ++i) {
      detail::analyze_gather(ModelPool::get(detail::kSlotAdv(i), total), pd, total, g, tmp);
      for (size_t f = 0; f < g.size(); ++f) {
        double k0 = g.k_deriv(unflatten(g, f)[0]);
        out.du.comp[i].c[f] += Complex(0.0, k0) * tmp.c[f];
      }
    }
  }
  for (int j = 0; j < d; ++j) {
    detail::analyze_gather(ModelPool::get(detail::kSlotQ(j), total), pd, total, g, tmp);
    for (size_t f = 0; f < g.size(); ++f) {
      double kj = g.k_deriv(unflatten(g, f)[j]);
      out.deta.c[f] -= Complex(0.0, kj) * tmp.c[f];
    }
  }
  return out;
}

inline Tendency rhs_tt_perturbed(const State& st) {
  Tendency lin = apply_linear(st, ModelKind::tt);
  Tendency non = nonlinear_remainder(st, ModelKind::tt);
  const GridSpec& g = st.u.grid;
  for (int a = 0; a < g.d; ++a) axpy(1.0, non.du.comp[a], lin.du.comp[a]);
  axpy(1.0, non.deta, lin.deta);
  return lin;
}

inline Tendency rhs_pptt_perturbed(const State& st) {
  Tendency lin = apply_linear(st, ModelKind::pptt);
  Tendency non = nonlinear_remainder(st, ModelKind::pptt);
  const GridSpec& g = st.u.grid;
  for (int a = 0; a < g.d; ++a) axpy(1.0, non.du.comp[a], lin.du.comp[a]);
  axpy(1.0, non.deta, lin.deta);
  return lin;
}

// Full primitive-form tendency.  Velocity:
//   -v.grad v + alpha v - beta |v|^2 v + grad div v + lap v - slope grad rho
//   [+ TT: v.grad(v.grad v)].
// Density: -div(rho v) [+ PPTT: lap rho].
inline Tendency rhs_primitive(const State& st, const ModelParams& p) {
  const GridSpec& g = st.u.grid;
  p.validate(g.d);
  if (p.form != ModelForm::primitive)
    throw FormMismatch("primitive right-hand side called with form tag '" +
                       std::string(to_string(p.form)) + "'");
  const int d = g.d;
  const std::vector<int> pd = detail::padded_dims(g);
  const size_t total = detail::dims_total(pd);
  using detail::ModelPool;

  for (int i = 0; i < d; ++i)
    detail::synth_padded(st.u.comp[i], pd, total, ModelPool::get(detail::kSlotU(i), total));
  detail::synth_padded(st.eta, pd, total, ModelPool::get(detail::kSlotEta, total));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      SpectralScalar dvi = partial_derivative(st.u.comp[i], j);
      detail::synth_padded(dvi, pd, total, ModelPool::get(detail::kSlotDU(i, j), total));
    }

  CVec& sq = ModelPool::get(detail::kSlotSq, total);
  std::fill(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(total), Complex(0.0, 0.0));
  for (int i = 0; i < d; ++i) {
    const CVec& vi = ModelPool::get(detail::kSlotU(i), total);
    for (size_t x = 0; x < total; ++x) sq[x] += vi[x] * vi[x];
  }
  for (int i = 0; i < d; ++i) {
    CVec& adv = ModelPool::get(detail::kSlotAdv(i), total);
    std::fill(adv.begin(), adv.begin() + static_cast<std::ptrdiff_t>(total), Complex(0.0, 0.0));
    for (int j = 0; j < d; ++j) {
      const CVec& vj = ModelPool::get(detail::kSlotU(j), total);
      const CVec& dvij = ModelPool::get(detail::kSlotDU(i, j), total);
      for (size_t x = 0; x < total; ++x) adv[x] += vj[x] * dvij[x];
    }
  }
  for (int i = 0; i < d; ++i) {
    CVec& acc = ModelPool::get(detail::kSlotA(i), total);
    const CVec& vi = ModelPool::get(detail::kSlotU(i), total);
    const CVec& adv = ModelPool::get(detail::kSlotAdv(i), total);
    for (size_t x = 0; x < total; ++x) acc[x] = -adv[x] - p.beta * sq[x] * vi[x];
  }
  for (int j = 0; j < d; ++j) {
    CVec& q = ModelPool::get(detail::kSlotQ(j), total);
    const CVec& vj = ModelPool::get(detail::kSlotU(j), total);
    const CVec& rho = ModelPool::get(detail::kSlotEta, total);
    for (size_t x = 0; x < total; ++x) q[x] = rho[x] * vj[x];
  }

  if (p.kind == ModelKind::tt) {
    GridSpec gp = g;
    gp.n = pd[0];
    for (int i = 0; i < d; ++i) {
      CVec& w = ModelPool::get(detail::kSlotW(i), total);
      fft_analysis(pd, ModelPool::get(detail::kSlotAdv(i), total).data(), w.data());
    }
    for (int i = 0; i < d; ++i) {
      CVec& acc = ModelPool::get(detail::kSlotA(i), total);
      for (int j = 0; j < d; ++j) {
        CVec& spec = ModelPool::get(detail::kSlotSpec, total);
        const CVec& w = ModelPool::get(detail::kSlotW(i), total);
        for (size_t f = 0; f < total; ++f) {
          double kj = k_deriv_vec(gp, f)[static_cast<size_t>(j)];
          spec[f] = Complex(0.0, kj) * w[f];
        }
        CVec& dw = ModelPool::get(detail::kSlotDU(i, j), total);
        fft_synthesis(pd, spec.data(), dw.data());
        const CVec& vj = ModelPool::get(detail::kSlotU(j), total);
        for (size_t x = 0; x < total; ++x) acc[x] += vj[x] * dw[x];
      }
    }
  }

  Tendency out = Tendency::zeros(g);
  SpectralScalar tmp = SpectralScalar::zeros(g);
  for (int i = 0; i < d; ++i)
    detail::analyze_gather(ModelPool::get(detail::kSlotA(i), total), pd, total, g, out.du.comp[i]);
  for (int j = 0; j < d; ++j) {
    detail::analyze_gather(ModelPool::get(detail::kSlotQ(j), total), pd, total, g, tmp);
    for (size_t f = 0; f < g.size(); ++f) {
      double kj = g.k_deriv(unflatten(g, f)[j]);
      out.deta.c[f] -= Complex(0.0, kj) * tmp.c[f];
    }
  }

  // Linear terms assembled directly in coefficient space.
  for (size_t f = 0; f < g.size(); ++f) {
    std::array<double, 3> k = k_deriv_vec(g, f);
    double k2 = 0.0;
    Complex divu(0.0, 0.0);
    for (int a = 0; a < d; ++a) {
      k2 += k[a] * k[a];
      divu += Complex(0.0, k[a]) * st.u.comp[a].c[f];
    }
    for (int i = 0; i < d; ++i) {
      Complex v = out.du.comp[i].c[f];
      v += p.alpha * st.u.comp[i].c[f];
      v += Complex(0.0, k[i]) * divu;                           // grad div v
      v -= k2 * st.u.comp[i].c[f];                              // lap v
      v -= Complex(0.0, p.pressure_slope * k[i]) * st.eta.c[f];  // pressure
      out.du.comp[i].c[f] = v;
    }
    if (p.kind == ModelKind::pptt) out.deta.c[f] -= k2 * st.eta.c[f];
  }
  return out;
}

inline Tendency rhs_tt_primitive(const State& st, const ModelParams& p) {
  if (p.kind != ModelKind::tt)
    throw FormMismatch("rhs_tt_primitive called with kind tag '" +
                       std::string(to_string(p.kind)) + "'");
  return rhs_primitive(st, p);
}

inline Tendency rhs_pptt_primitive(const State& st, const ModelParams& p) {
  if (p.kind != ModelKind::pptt)
    throw FormMismatch("rhs_pptt_primitive called with kind tag '" +
                       std::string(to_string(p.kind)) + "'");
  return rhs_primitive(st, p);
}

// ----------------------------------------------------------------------------
// Exact linear evolution: per-mode matrix exponentials of the linearization.

class LinearPropagator {
 public:
  LinearPropagator(const GridSpec& g, ModelKind kind, double dt) : grid_(g), dt_(dt) {
    const int d = g.d;
    const int dim = d + 1;
    table_.resize(g.size() * static_cast<size_t>(dim * dim));
    for (size_t f = 0; f < g.size(); ++f) {
      std::array<double, 3> k = k_deriv_vec(grid_, f);
      Eigen::MatrixXcd m = linear_mode_matrix(k, d, kind).to_eigen();
      Eigen::MatrixXcd e = (dt * m).exp();
      Complex* dst = &table_[f * static_cast<size_t>(dim * dim)];
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) dst[i * dim + j] = e(i, j);
    }
  }

  double dt() const { return dt_; }
  const GridSpec& grid() const { return grid_; }

  void apply(State& st) const {
    if (!(st.u.grid == grid_)) throw GridMismatch("propagator applied on a different grid");
    const int d = grid_.d;
    const int dim = d + 1;
    Complex in[4], out[4];
    for (size_t f = 0; f < grid_.size(); ++f) {
      const Complex* m = &table_[f * static_cast<size_t>(dim * dim)];
      for (int a = 0; a < d; ++a) in[a] = st.u.comp[a].c[f];
      in[d] = st.eta.c[f];
      for (int i = 0; i < dim; ++i) {
        Complex acc(0.0, 0.0);
        for (int j = 0; j < dim; ++j) acc += m[i * dim + j] * in[j];
        out[i] = acc;
      }
      for (int a = 0; a < d; ++a) st.u.comp[a].c[f] = out[a];
      st.eta.c[f] = out[d];
    }
    st.t += dt_;
  }

 private:
  GridSpec grid_;
  double dt_;
  std::vector<Complex> table_;
};

inline State exact_linear_propagator(const State& st, double t, ModelKind kind) {
  State out = st;
  if (t == 0.0) return out;
  LinearPropagator prop(st.u.grid, kind, t);
  prop.apply(out);
  out.t = st.t + t;
  return out;
}

}  // namespace ttlab

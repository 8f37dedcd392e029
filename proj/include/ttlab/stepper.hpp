#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ttlab/errors.hpp"
#include "ttlab/field.hpp"
#include "ttlab/grid.hpp"
#include "ttlab/models.hpp"

namespace ttlab {

enum class Scheme { imex_euler, imex_rk2, imex_rk3 };

inline Scheme parse_scheme(const std::string& s) {
  if (s == "imex-euler") return Scheme::imex_euler;
  if (s == "imex-rk2") return Scheme::imex_rk2;
  if (s == "imex-rk3") return Scheme::imex_rk3;
  throw ConfigError("unknown scheme '" + s + "' (expected imex-euler, imex-rk2, imex-rk3)");
}

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::imex_euler: return "imex-euler";
    case Scheme::imex_rk2: return "imex-rk2";
    default: return "imex-rk3";
  }
}

inline int scheme_order(Scheme s) {
  switch (s) {
    case Scheme::imex_euler: return 1;
    case Scheme::imex_rk2: return 2;
    default: return 3;
  }
}

struct StepperConfig {
  Scheme scheme = Scheme::imex_rk2;
  double dt = 1e-2;
  double t_end = 1.0;
  size_t output_every = 1;    // observer stride, in steps
  double blowup_factor = 1e3;
  bool linear_only = false;   // drop the nonlinear remainder, keep the implicit part

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive and finite");
    if (!std::isfinite(t_end) || t_end < 0.0) throw ConfigError("t_end must be nonnegative");
    if (output_every == 0) throw ConfigError("output_every must be at least 1");
    if (!(blowup_factor > 1.0)) throw ConfigError("blowup_factor must exceed 1");
  }
};

struct StepReport {
  size_t step = 0;
  double t = 0.0;
  double dt_used = 0.0;
  double max_u = 0.0;        // sup norm of the velocity field
  double max_eta = 0.0;      // sup norm of the density field
  double cfl = 0.0;          // dt * advective speed * largest wavenumber
};

using Observer = std::function<void(const State&, const StepReport&)>;

// Largest advected wavenumber magnitude on the lattice.
inline double max_wavenumber(const GridSpec& g) {
  return g.dk() * (g.n / 2.0) * std::sqrt(static_cast<double>(g.d));
}

// IMEX integrator: the per-mode linearization is treated implicitly, the
// nonlinear remainder explicitly.  Primitive states are integrated in
// deviation variables about the steady state, so a steady input stays fixed
// to roundoff.  Schemes: backward/forward Euler, and the stiffly accurate
// two- and four-stage additive Runge-Kutta pairs of order two and three with
// a single implicit diagonal coefficient, so each run needs one factorization
// table per step size.
class Stepper {
 public:
  Stepper(const GridSpec& g, const ModelParams& params, const StepperConfig& cfg)
      : grid_(g), params_(params), cfg_(cfg) {
    params_.validate(g.d);
    cfg_.validate();
    if (params_.form == ModelForm::perturbation && !params_.is_normalized(g.d))
      throw ConfigError("perturbation form requires normalized parameters");
    dim_ = g.d + 1;
    build_m_table();
  }

  const GridSpec& grid() const { return grid_; }

  // Advance to cfg.t_end.  The observer fires on the initial state, after
  // every output_every-th step, and on the final step.
  State integrate(const State& initial, const Observer& obs = {}) {
    if (!(initial.u.grid == grid_)) throw GridMismatch("initial state on a different grid");
    if (cfg_.t_end < initial.t) throw ConfigError("t_end precedes the initial time");

    State y = initial;
    if (params_.form == ModelForm::primitive) to_deviation(y);

    StepReport rep = make_report(y, 0, initial.t, 0.0);
    const double scale0 = std::max(rep.max_u, rep.max_eta);
    if (obs) observe(y, rep, obs);

    const double span = cfg_.t_end - initial.t;
    if (span <= 0.0) {
      State out = y;
      if (params_.form == ModelForm::primitive) from_deviation(out);
      return out;
    }

    size_t nsteps = static_cast<size_t>(std::ceil(span / cfg_.dt - 1e-12));
    if (nsteps == 0) nsteps = 1;

    for (size_t s = 1; s <= nsteps; ++s) {
      double dt = cfg_.dt;
      if (s == nsteps) dt = cfg_.t_end - y.t;  // land exactly on t_end
      if (dt <= 0.0) break;
      step(y, dt);
      y.t = (s == nsteps) ? cfg_.t_end : initial.t + static_cast<double>(s) * cfg_.dt;

      const bool report_now = (s % cfg_.output_every == 0) || s == nsteps;
      if (report_now || cfg_.blowup_factor > 0.0) {
        rep = make_report(y, s, y.t, dt);
        const double scale = scale0 > 0.0 ? scale0 : 1.0;
        if (std::max(rep.max_u, rep.max_eta) > cfg_.blowup_factor * scale ||
            !std::isfinite(rep.max_u) || !std::isfinite(rep.max_eta))
          throw BlowUp("solution exceeded " + std::to_string(cfg_.blowup_factor) +
                       " times its initial amplitude at t = " + std::to_string(y.t));
        if (rep.cfl > 1.0 && !cfl_warned_) {
          cfl_warned_ = true;
          std::fprintf(stderr, "warning: CFL number %.3f exceeds 1 at t = %.6g; "
                       "advective features may be under-resolved\n", rep.cfl, y.t);
        }
        if (report_now && obs) observe(y, rep, obs);
      }
    }

    if (params_.form == ModelForm::primitive) from_deviation(y);
    return y;
  }

 private:
  // ---- steady-state shift ----------------------------------------------
  void to_deviation(State& y) const {
    const double speed = params_.steady_speed();
    for (int a = 0; a < grid_.d; ++a) y.u.comp[a].c[0] -= Complex(speed * params_.e_dir[a], 0.0);
    y.eta.c[0] -= Complex(params_.rho_s, 0.0);
  }
  void from_deviation(State& y) const {
    const double speed = params_.steady_speed();
    for (int a = 0; a < grid_.d; ++a) y.u.comp[a].c[0] += Complex(speed * params_.e_dir[a], 0.0);
    y.eta.c[0] += Complex(params_.rho_s, 0.0);
  }

  // ---- per-mode tables ---------------------------------------------------
  void build_m_table() {
    const size_t nn = grid_.size();
    m_table_.resize(nn * static_cast<size_t>(dim_ * dim_));
    for (size_t f = 0; f < nn; ++f) {
      std::array<double, 3> k = k_deriv_vec(grid_, f);
      ModeMatrix m = params_.form == ModelForm::primitive
                         ? linear_mode_matrix_primitive(k, grid_.d, params_)
                         : linear_mode_matrix(k, grid_.d, params_.kind);
      Complex* dst = &m_table_[f * static_cast<size_t>(dim_ * dim_)];
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) dst[i * dim_ + j] = m.at(i, j);
    }
  }

  const std::vector<Complex>& inverse_table(double coef) {
    auto it = inv_tables_.find(coef);
    if (it != inv_tables_.end()) return it->second;
    const size_t nn = grid_.size();
    std::vector<Complex> table(nn * static_cast<size_t>(dim_ * dim_));
    Eigen::MatrixXcd b(dim_, dim_);
    for (size_t f = 0; f < nn; ++f) {
      const Complex* src = &m_table_[f * static_cast<size_t>(dim_ * dim_)];
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          b(i, j) = (i == j ? 1.0 : 0.0) - coef * src[i * dim_ + j];
      Eigen::FullPivLU<Eigen::MatrixXcd> lu(b);
      if (!lu.isInvertible())
        throw SolveSingular("implicit stage matrix is singular at mode index " +
                            std::to_string(f));
      Eigen::MatrixXcd inv = lu.inverse();
      Complex* dst = &table[f * static_cast<size_t>(dim_ * dim_)];
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) dst[i * dim_ + j] = inv(i, j);
    }
    return inv_tables_.emplace(coef, std::move(table)).first->second;
  }

  void table_apply(const std::vector<Complex>& table, const State& in, State& out) const {
    Complex a[4], r[4];
    const size_t nn = grid_.size();
    for (size_t f = 0; f < nn; ++f) {
      const Complex* m = &table[f * static_cast<size_t>(dim_ * dim_)];
      for (int c = 0; c < grid_.d; ++c) a[c] = in.u.comp[c].c[f];
      a[grid_.d] = in.eta.c[f];
      for (int i = 0; i < dim_; ++i) {
        Complex acc(0.0, 0.0);
        for (int j = 0; j < dim_; ++j) acc += m[i * dim_ + j] * a[j];
        r[i] = acc;
      }
      for (int c = 0; c < grid_.d; ++c) out.u.comp[c].c[f] = r[c];
      out.eta.c[f] = r[grid_.d];
    }
  }

  // ---- state algebra ----------------------------------------------------
  static void add_scaled(double a, const State& x, State& y) {
    for (size_t c = 0; c < x.u.comp.size(); ++c) axpy(a, x.u.comp[c], y.u.comp[c]);
    axpy(a, x.eta, y.eta);
  }
  static void add_scaled(double a, const Tendency& x, State& y) {
    for (size_t c = 0; c < x.du.comp.size(); ++c) axpy(a, x.du.comp[c], y.u.comp[c]);
    axpy(a, x.deta, y.eta);
  }

  // Nonlinear remainder in the working variables.
  Tendency eval_n(const State& y) {
    if (cfg_.linear_only) return Tendency::zeros(grid_);
    if (params_.form == ModelForm::perturbation) return nonlinear_remainder(y, params_.kind);
    // Primitive: full tendency at (steady + deviation) minus the linear table.
    State full = y;
    from_deviation(full);
    Tendency t = rhs_primitive(full, params_);
    State my = State::zeros(grid_);
    table_apply(m_table_, y, my);
    for (int a = 0; a < grid_.d; ++a) axpy(-1.0, my.u.comp[a], t.du.comp[a]);
    axpy(-1.0, my.eta, t.deta);
    return t;
  }

  // ---- single step -------------------------------------------------------
  void step(State& y, double dt) {
    switch (cfg_.scheme) {
      case Scheme::imex_euler: {
        Tendency n0 = eval_n(y);
        add_scaled(dt, n0, y);
        State out = State::zeros(grid_);
        table_apply(inverse_table(dt), y, out);
        y.u = std::move(out.u);
        y.eta = std::move(out.eta);
        break;
      }
      case Scheme::imex_rk2: {
        const double g = 1.0 - std::sqrt(2.0) / 2.0;
        const double dl = 1.0 - 1.0 / (2.0 * g);
        const auto& inv = inverse_table(g * dt);
        Tendency n0 = eval_n(y);
        State rhs = y;
        add_scaled(g * dt, n0, rhs);
        State y1 = State::zeros(grid_);
        table_apply(inv, rhs, y1);
        State my1 = State::zeros(grid_);
        table_apply(m_table_, y1, my1);
        Tendency n1 = eval_n(y1);
        rhs = y;
        add_scaled(dl * dt, n0, rhs);
        add_scaled((1.0 - dl) * dt, n1, rhs);
        add_scaled((1.0 - g) * dt, my1, rhs);
        State y2 = State::zeros(grid_);
        table_apply(inv, rhs, y2);
        y.u = std::move(y2.u);
        y.eta = std::move(y2.eta);
        break;
      }
      case Scheme::imex_rk3: {
        const auto& inv = inverse_table(0.5 * dt);
        Tendency n0 = eval_n(y);
        State rhs = y;
        add_scaled(0.5 * dt, n0, rhs);
        State y1 = State::zeros(grid_);
        table_apply(inv, rhs, y1);
        State my1 = State::zeros(grid_);
        table_apply(m_table_, y1, my1);
        Tendency n1 = eval_n(y1);

        rhs = y;
        add_scaled(dt * 11.0 / 18.0, n0, rhs);
        add_scaled(dt / 18.0, n1, rhs);
        add_scaled(dt / 6.0, my1, rhs);
        State y2 = State::zeros(grid_);
        table_apply(inv, rhs, y2);
        State my2 = State::zeros(grid_);
        table_apply(m_table_, y2, my2);
        Tendency n2 = eval_n(y2);

        rhs = y;
        add_scaled(dt * 5.0 / 6.0, n0, rhs);
        add_scaled(-dt * 5.0 / 6.0, n1, rhs);
        add_scaled(0.5 * dt, n2, rhs);
        add_scaled(-0.5 * dt, my1, rhs);
        add_scaled(0.5 * dt, my2, rhs);
        State y3 = State::zeros(grid_);
        table_apply(inv, rhs, y3);
        State my3 = State::zeros(grid_);
        table_apply(m_table_, y3, my3);
        Tendency n3 = eval_n(y3);

        rhs = y;
        add_scaled(0.25 * dt, n0, rhs);
        add_scaled(1.75 * dt, n1, rhs);
        add_scaled(0.75 * dt, n2, rhs);
        add_scaled(-1.75 * dt, n3, rhs);
        add_scaled(1.5 * dt, my1, rhs);
        add_scaled(-1.5 * dt, my2, rhs);
        add_scaled(0.5 * dt, my3, rhs);
        State y4 = State::zeros(grid_);
        table_apply(inv, rhs, y4);
        y.u = std::move(y4.u);
        y.eta = std::move(y4.eta);
        break;
      }
    }
  }

  // ---- reporting ---------------------------------------------------------
  StepReport make_report(const State& y, size_t s, double t, double dt) {
    StepReport r;
    r.step = s;
    r.t = t;
    r.dt_used = dt;
    State full = y;
    if (params_.form == ModelForm::primitive) from_deviation(full);
    for (int a = 0; a < grid_.d; ++a) r.max_u = std::max(r.max_u, linf_norm(full.u.comp[a]));
    r.max_eta = linf_norm(full.eta);
    double speed = r.max_u;
    if (params_.form == ModelForm::perturbation) speed += 1.0;  // mean flow
    r.cfl = (dt > 0.0 ? dt : cfg_.dt) * speed * max_wavenumber(grid_);
    return r;
  }

  void observe(const State& y, const StepReport& rep, const Observer& obs) const {
    if (params_.form == ModelForm::primitive) {
      State full = y;
      from_deviation(full);
      obs(full, rep);
    } else {
      obs(y, rep);
    }
  }

  GridSpec grid_;
  ModelParams params_;
  StepperConfig cfg_;
  int dim_ = 0;
  bool cfl_warned_ = false;
  std::vector<Complex> m_table_;
  std::map<double, std::vector<Complex>> inv_tables_;
};

// Suggested step size from the advective stability limit.
inline double cfl_step(const State& st, const ModelParams& p, double safety = 0.5) {
  const GridSpec& g = st.u.grid;
  double vmax = 0.0;
  for (int a = 0; a < g.d; ++a) vmax = std::max(vmax, linf_norm(st.u.comp[a]));
  if (p.form == ModelForm::perturbation) vmax += 1.0;
  double kmax = max_wavenumber(g);
  if (vmax * kmax == 0.0) return safety;
  return safety / (vmax * kmax);
}

}  // namespace ttlab

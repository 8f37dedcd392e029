// Acceptance harness: one verdict line per criterion, exit 4 on any failure.
// Invoke with a criterion number (1..10) to run a single check, or with no
// arguments to run the full battery.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "json.hpp"
#include "ttlab/experiments.hpp"

using namespace ttlab;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string cfg_path(const std::string& name) {
  return std::string(TTLAB_CONFIG_DIR) + "/" + name;
}

struct Series {
  std::vector<json> records;  // step records only
  RunResult result;
};

Series run_series(const ExperimentConfig& cfg) {
  Series s;
  std::ostringstream out;
  s.result = run_experiment(cfg, out);
  std::istringstream in(out.str());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.value("record", "") == "step") s.records.push_back(std::move(j));
  }
  return s;
}

std::vector<std::pair<double, double>> level_samples(const Series& s, int level,
                                                     const char* key = "hdot_l") {
  std::vector<std::pair<double, double>> out;
  const std::string lk = std::to_string(level);
  for (const json& r : s.records)
    out.emplace_back(r.at("t").get<double>(), r.at(key).at(lk).get<double>());
  return out;
}

void verdict(bool ok, int crit, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", crit, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------------------

// 1. Every nonlinear term of both models against direct convolution.
bool criterion1() {
  auto t0 = Clock::now();
  GridSpec g = make_grid(2, 8, 2 * std::numbers::pi, Dealias::one_half);
  double worst = 0.0;
  bool ok = true;
  for (ModelKind kind : {ModelKind::pptt, ModelKind::tt}) {
    OracleReport rep = oracle_smallgrid(g, kind, 2);
    worst = std::max(worst, rep.max_err());
    ok = ok && rep.pass();
    for (const OracleCheck& c : rep.checks)
      if (!(c.err <= rep.tolerance))
        std::printf("  %s / %s: err %.3e\n", to_string(kind), c.name.c_str(), c.err);
  }
  double el = seconds_since(t0);
  ok = ok && el < 1.0;
  verdict(ok, 1, fmt("nonlinear terms match direct convolution "
                     "(max err %.3e, %.3f s)", worst, el));
  return ok;
}

// 2. Primitive dynamics hold the ordered steady state for a thousand steps.
bool criterion2() {
  bool ok = true;
  std::string detail;
  for (const char* kind : {"pptt", "tt"}) {
    ExperimentConfig cfg = load_config(cfg_path("criterion2.cfg"), {{"model.kind", kind}});
    Series s = run_series(cfg);
    double drift = 0.0;
    for (const json& r : s.records) drift = std::max(drift, r.at("h3").get<double>());
    ok = ok && s.result.steps == 1000 && drift <= 1e-10;
    detail += fmt("%s drift %.3e (%zu steps)  ", kind, drift, s.result.steps);
  }
  verdict(ok, 2, "steady state preserved in H3: " + detail);
  return ok;
}

// 3. Auxiliary decay exponents in closed form.
bool criterion3() {
  double b33 = beta_exponent(3, 3);
  double b23 = beta_exponent(2, 3);
  double b34 = beta_exponent(3, 4);
  double e23 = (3.0 - std::sqrt(17.0)) / 2.0;
  double e34 = (4.5 - std::sqrt(22.25)) / 2.0;
  bool ok = b33 == 0.0 && std::abs(b23 - e23) <= 1e-12 && std::abs(b34 - e34) <= 1e-12;
  verdict(ok, 3, fmt("beta(3,3) = %g exactly, beta(2,3) err %.2e, beta(3,4) err %.2e",
                     b33, std::abs(b23 - e23), std::abs(b34 - e34)));
  return ok;
}

// 4. Sharp interpolation ratios over a thousand random mean-free fields.
bool criterion4() {
  auto t0 = Clock::now();
  GridSpec g = make_grid(2, 16, 2 * std::numbers::pi, Dealias::one_half);
  Spectrum sp = Spectrum::parse("power:-1.0");
  const double triples[3][3] = {{0.0, 1.0, 2.0}, {-0.5, 0.5, 2.0}, {1.0, 2.0, 3.0}};
  double worst = 0.0;
  for (uint64_t i = 0; i < 1000; ++i) {
    SpectralScalar u = random_band_limited(g, sp, 1000003ULL * i + 17ULL);
    for (const auto& tr : triples)
      worst = std::max(worst, check_interpolation(u, tr[0], tr[1], tr[2]));
  }
  // single shell: equality with constant one
  SpectralScalar mono = SpectralScalar::zeros(g);
  mono.c[flatten(g, {2, 1, 0})] = Complex(0.3, -0.1);
  mono.c[flatten(g, {14, 15, 0})] = Complex(0.3, 0.1);
  double mono_dev = 0.0;
  for (const auto& tr : triples)
    mono_dev = std::max(mono_dev,
                        std::abs(check_interpolation(mono, tr[0], tr[1], tr[2]) - 1.0));
  double el = seconds_since(t0);
  bool ok = worst <= 1.0 + 1e-9 && mono_dev <= 1e-12 && el < 10.0;
  verdict(ok, 4, fmt("interpolation sup ratio %.12f, single-shell dev %.2e, %.2f s",
                     worst, mono_dev, el));
  return ok;
}

// 5. PPTT small-data H3 monotonicity over T = 50.
bool criterion5() {
  ExperimentConfig cfg = load_config(cfg_path("criterion5.cfg"));
  Series s = run_series(cfg);
  double worst_jump = -1.0;
  double prev = 0.0;
  bool first = true;
  for (const json& r : s.records) {
    double h3 = r.at("h3").get<double>();
    if (!first) worst_jump = std::max(worst_jump, h3 - prev * (1.0 + 1e-12));
    prev = h3;
    first = false;
  }
  bool ok = worst_jump <= 0.0 && s.records.size() >= 100;
  verdict(ok, 5, fmt("H3 nonincreasing over %zu records (worst slack-adjusted jump %.3e)",
                     s.records.size(), worst_jump));
  return ok;
}

// 6. TT hypocoercive functional: monotone and sandwiched by (1 +- delta0) H3^2.
bool criterion6() {
  ExperimentConfig cfg = load_config(cfg_path("criterion6.cfg"));
  Series s = run_series(cfg);
  const double d0 = cfg.diag.delta0;
  double worst_jump = -1.0;
  double prev = 0.0;
  bool first = true;
  bool sandwich = true;
  for (const json& r : s.records) {
    double hy = r.at("hypo").get<double>();
    double h3 = r.at("h3").get<double>();
    if (!first) worst_jump = std::max(worst_jump, hy - prev * (1.0 + 1e-12));
    prev = hy;
    first = false;
    double lo = (1.0 - d0) * h3 * h3;
    double hi = (1.0 + d0) * h3 * h3;
    if (!(lo <= hy * (1.0 + 1e-12) && hy <= hi * (1.0 + 1e-12))) sandwich = false;
  }
  bool ok = worst_jump <= 0.0 && sandwich && s.records.size() >= 100;
  verdict(ok, 6, fmt("functional nonincreasing (worst jump %.3e) and inside the "
                     "(1 +- %.1f) H3^2 sandwich over %zu records",
                     worst_jump, d0, s.records.size()));
  return ok;
}

// 7. Exact linear decay exponents against a per-mode quadrature oracle.
//
// The oracle never touches the production mode matrices: it rebuilds the
// PPTT linearization per mode from the dispersion relation, propagates
// P_k(t + h) = e^{h M_k} P_k(t) with one cached exponential per mode, and
// accumulates the phase-averaged norm Q_l(t) = sum_k A(k)^2 |k|^{2l}
// ||P_k(t)||_F^2 over the populated shell.  For independent uniform phases
// per component the expected squared amplitude of e^{tM} w(0) is exactly
// A(k)^2 ||e^{tM}||_F^2, and with ~1.2e5 modes in the shell the sample
// fluctuation of the fitted slope is far below the 15% gate.
bool criterion7() {
  ExperimentConfig cfg = load_config(cfg_path("criterion7.cfg"));
  Series s = run_series(cfg);

  const GridSpec& g = cfg.grid;
  const double a = cfg.init.a, k0 = cfg.init.k0, sdec = cfg.diag.s;
  const double hop = cfg.stepper.dt * static_cast<double>(cfg.stepper.output_every);

  using M3 = std::array<Complex, 9>;
  std::vector<M3> prop, cur;
  std::vector<double> w2, kk_of;
  for (size_t f = 0; f < g.size(); ++f) {
    std::array<double, 3> k = k_deriv_vec(g, f);
    double kk = k[0] * k[0] + k[1] * k[1];
    if (kk <= 0.0 || kk > k0 * k0 * (1.0 + 1e-12)) continue;
    const Complex i1(0.0, 1.0);
    Eigen::Matrix3cd m;
    m(0, 0) = -i1 * k[0] - 2.0 - k[0] * k[0] - kk;
    m(0, 1) = Complex(-k[0] * k[1], 0.0);
    m(1, 0) = Complex(-k[0] * k[1], 0.0);
    m(1, 1) = -i1 * k[0] - k[1] * k[1] - kk;
    m(0, 2) = -i1 * k[0];
    m(1, 2) = -i1 * k[1];
    m(2, 0) = -i1 * k[0];
    m(2, 1) = -i1 * k[1];
    m(2, 2) = -i1 * k[0] - kk;  // parabolic density relaxation
    Eigen::Matrix3cd e = (hop * m).exp();
    M3 em, id{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) em[static_cast<size_t>(3 * r + c)] = e(r, c);
    id[0] = id[4] = id[8] = Complex(1.0, 0.0);
    prop.push_back(em);
    cur.push_back(id);
    w2.push_back(std::pow(kk, a));  // |k|^{2a}
    kk_of.push_back(kk);
  }

  std::vector<std::pair<double, double>> oq0, oq1;
  size_t nhops = static_cast<size_t>(std::llround(cfg.stepper.t_end / hop));
  for (size_t h = 0; h <= nhops; ++h) {
    double t = static_cast<double>(h) * hop;
    double q0 = 0.0, q1 = 0.0;
    for (size_t m = 0; m < cur.size(); ++m) {
      double fr = 0.0;
      for (const Complex& z : cur[m]) fr += std::norm(z);
      q0 += w2[m] * fr;
      q1 += w2[m] * kk_of[m] * fr;
    }
    oq0.emplace_back(t, std::sqrt(q0));
    oq1.emplace_back(t, std::sqrt(q1));
    if (h == nhops) break;
    for (size_t m = 0; m < cur.size(); ++m) {
      const M3& e = prop[m];
      const M3 p = cur[m];
      M3 np{};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          Complex acc(0.0, 0.0);
          for (int j = 0; j < 3; ++j)
            acc += e[static_cast<size_t>(3 * r + j)] * p[static_cast<size_t>(3 * j + c)];
          np[static_cast<size_t>(3 * r + c)] = acc;
        }
      cur[m] = np;
    }
  }

  const double nominal[2] = {-0.30, -0.80};
  bool ok = true;
  std::string detail;
  for (int l = 0; l <= 1; ++l) {
    DecayFit sim = fit_decay(level_samples(s, l), l, sdec, cfg.fit.t0, cfg.fit.t1, 1.0);
    DecayFit orc = fit_decay(l == 0 ? oq0 : oq1, l, sdec, cfg.fit.t0, cfg.fit.t1, 1.0);
    bool m1 = std::abs(sim.slope - orc.slope) <= 0.15 * std::abs(orc.slope);
    bool m2 = std::abs(orc.slope - nominal[l]) <= 0.15 * std::abs(nominal[l]);
    ok = ok && m1 && m2;
    detail += fmt("l=%d sim %.4f oracle %.4f nominal %.2f  ", l, sim.slope, orc.slope,
                  nominal[l]);
  }
  verdict(ok, 7, "linear decay exponents: " + detail);
  return ok;
}

// 8. Nonlinear runs keep the weighted decay envelopes bounded on [10, 100].
bool criterion8() {
  bool ok = true;
  std::string detail;
  for (const char* kind : {"pptt", "tt"}) {
    ExperimentConfig cfg = load_config(cfg_path("criterion8.cfg"), {{"model.kind", kind}});
    Series s = run_series(cfg);
    for (int l = 0; l <= 1; ++l) {
      auto env = level_samples(s, l, "envelope");
      double ref = -1.0, worst = 0.0;
      for (const auto& [t, v] : env)
        if (std::abs(t - 10.0) < 1e-9) ref = v;
      for (const auto& [t, v] : env)
        if (t >= 10.0 - 1e-9 && t <= 100.0 + 1e-9) worst = std::max(worst, v / ref);
      ok = ok && ref > 0.0 && worst <= 2.0 * (1.0 + 1e-12);
      detail += fmt("%s l=%d sup/ref %.3f  ", kind, l, worst);
    }
  }
  verdict(ok, 8, "nonlinear envelopes bounded by twice their t = 10 value: " + detail);
  return ok;
}

// 9. Convergence order of the IMEX schemes against the exact propagator.
bool criterion9() {
  ExperimentConfig cfg = load_config(cfg_path("criterion9.cfg"));
  State init = make_initial_data(cfg.grid, cfg.init, cfg.diag.s);
  State exact = exact_linear_propagator(init, cfg.stepper.t_end, cfg.model.kind);
  const double dts[3] = {1e-2, 5e-3, 2.5e-3};
  bool ok = true;
  std::string detail;
  for (Scheme sc : {Scheme::imex_euler, Scheme::imex_rk2, Scheme::imex_rk3}) {
    double err[3];
    for (int i = 0; i < 3; ++i) {
      StepperConfig st = {sc, dts[i], cfg.stepper.t_end, 1000000, 1e6, true};
      Stepper stepper(cfg.grid, cfg.model, st);
      State y = stepper.integrate(init);
      State diff = y;
      for (int a = 0; a < cfg.grid.d; ++a)
        for (size_t f = 0; f < cfg.grid.size(); ++f)
          diff.u.comp[a].c[f] -= exact.u.comp[a].c[f];
      for (size_t f = 0; f < cfg.grid.size(); ++f) diff.eta.c[f] -= exact.eta.c[f];
      err[i] = sobolev_pair(diff, 0);
    }
    double o1 = std::log2(err[0] / err[1]);
    double o2 = std::log2(err[1] / err[2]);
    int p = scheme_order(sc);
    detail += fmt("%s orders %.3f / %.3f  ", to_string(sc), o1, o2);
    if (sc == Scheme::imex_rk3) continue;  // reported, not gated
    double lo = p - 0.2, hi = p + 0.3;
    ok = ok && o1 >= lo && o1 <= hi && o2 >= lo && o2 <= hi;
  }
  verdict(ok, 9, "scheme orders against the exact propagator: " + detail);
  return ok;
}

// 10. Mean density is conserved to near machine precision by every variant.
bool criterion10() {
  bool ok = true;
  std::string detail;
  for (const char* kind : {"pptt", "tt"}) {
    for (const char* form : {"perturbation", "primitive"}) {
      ExperimentConfig cfg = load_config(cfg_path("criterion10.cfg"),
                                         {{"model.kind", kind}, {"model.form", form}});
      Series s = run_series(cfg);
      double m0 = s.records.front().at("mean_eta").get<double>();
      double drift = 0.0;
      for (const json& r : s.records)
        drift = std::max(drift, std::abs(r.at("mean_eta").get<double>() - m0));
      ok = ok && s.result.steps == 1000 && drift <= 1e-12;
      detail += fmt("%s/%s %.2e  ", kind, form, drift);
    }
  }
  verdict(ok, 10, "mean density drift over a thousand steps: " + detail);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  bool (*crits[10])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                         criterion6, criterion7, criterion8, criterion9, criterion10};
  bool all = true;
  if (argc > 1) {
    int idx = std::atoi(argv[1]);
    if (idx < 1 || idx > 10) {
      std::fprintf(stderr, "usage: %s [1..10]\n", argv[0]);
      return 1;
    }
    all = crits[idx - 1]();
  } else {
    for (auto* c : crits) all = c() && all;
  }
  return all ? 0 : 4;
}

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"

#include "ttlab/diagnostics.hpp"
#include "ttlab/errors.hpp"
#include "ttlab/field.hpp"
#include "ttlab/grid.hpp"
#include "ttlab/inequalities.hpp"
#include "ttlab/models.hpp"
#include "ttlab/multiindex.hpp"
#include "ttlab/oracle.hpp"
#include "ttlab/stepper.hpp"

namespace ttlab {

// ----------------------------------------------------------------------------
// Configuration.

enum class Propagation { nonlinear, linear_imex, linear_exact };

inline const char* to_string(Propagation p) {
  switch (p) {
    case Propagation::nonlinear: return "nonlinear";
    case Propagation::linear_imex: return "linear-imex";
    default: return "linear-exact";
  }
}

inline const char* to_string(Dealias d) {
  switch (d) {
    case Dealias::none: return "none";
    case Dealias::two_thirds: return "two-thirds";
    default: return "one-half";
  }
}

struct InitConfig {
  std::string kind = "low_freq_bump";  // low_freq_bump | power_profile | random_small
  double epsilon = 1e-3;               // exact pair Sobolev size of the data
  double a = -0.4;                     // power_profile exponent
  double k0 = 1.0;                     // power_profile physical radius
  uint64_t seed = 1;
};

struct DiagConfig {
  int m = 3;
  double s = 0.5;       // negative-order index of the low-mode hypothesis
  double delta0 = 0.1;  // hypocoercive cross-term weight
  std::vector<int> levels{0, 1};
  std::vector<int> ledger_levels{0, 3};
};

struct OutputConfig {
  std::string dir = "out";
  std::string series = "series.jsonl";
  std::string checkpoint;     // final-state checkpoint filename; empty = skip
  int checkpoint_every = 0;   // also rewrite it every this many steps
};

struct FitConfig {
  double t0 = 10.0;
  double t1 = 100.0;
  double tolerance = 0.1;     // one-sided slack on the fitted slope
  std::vector<int> levels;    // empty = diagnostics levels
};

struct IneqConfig {
  size_t count = 64;
  uint64_t seed = 1;
  std::string spectrum = "power:-1.0";
  std::vector<std::string> items;  // empty = full matrix
};

struct OracleCliConfig {
  double tolerance = 1e-10;
  uint64_t seed = 2;
  double amplitude = 0.02;
  double mean_shift = 0.005;
  double dt = 1e-3;
};

struct SteadyCliConfig {
  double tolerance = 1e-10;
};

struct ExperimentConfig {
  ModelParams model;
  GridSpec grid = make_grid(2, 64, 2.0 * std::numbers::pi, Dealias::one_half);
  StepperConfig stepper;
  Propagation propagation = Propagation::nonlinear;
  InitConfig init;
  DiagConfig diag;
  OutputConfig output;
  FitConfig fit;
  IneqConfig ineq;
  OracleCliConfig oracle;
  SteadyCliConfig steady;
};

// Box lengths accept an optional "pi" suffix: "2pi", "400pi", "pi", "6.28".
inline double parse_length_value(const std::string& raw) {
  std::string s = raw;
  auto ltrim = s.find_first_not_of(" \t");
  auto rtrim = s.find_last_not_of(" \t");
  if (ltrim == std::string::npos) throw ConfigError("empty length value");
  s = s.substr(ltrim, rtrim - ltrim + 1);
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = std::numbers::pi;
    s = s.substr(0, s.size() - 2);
    auto r = s.find_last_not_of(" \t");
    s = r == std::string::npos ? "" : s.substr(0, r + 1);
    if (s.empty()) return factor;
  }
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v * factor;
  } catch (const std::exception&) {
    throw ConfigError("malformed length value '" + raw + "' (want a number, optionally *pi as in 400pi)");
  }
}

namespace detail {

inline std::string trim_copy(const std::string& s) {
  auto l = s.find_first_not_of(" \t\r\n");
  if (l == std::string::npos) return "";
  auto r = s.find_last_not_of(" \t\r\n");
  return s.substr(l, r - l + 1);
}

// Pulls typed values out of the tree, pushing one message per violation so a
// bad file reports everything wrong with it at once.
struct ConfigReader {
  const boost::property_tree::ptree& pt;
  std::vector<std::string>& errs;

  bool has(const std::string& key) const { return pt.get_optional<std::string>(key).has_value(); }

  std::string str(const std::string& key, const std::string& dflt) const {
    auto v = pt.get_optional<std::string>(key);
    return v ? trim_copy(*v) : dflt;
  }

  double num(const std::string& key, double dflt) const {
    auto v = pt.get_optional<std::string>(key);
    if (!v) return dflt;
    try {
      std::string t = trim_copy(*v);
      size_t pos = 0;
      double x = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return x;
    } catch (const std::exception&) {
      errs.push_back(key + ": '" + *v + "' is not a number");
      return dflt;
    }
  }

  long long integer(const std::string& key, long long dflt) const {
    auto v = pt.get_optional<std::string>(key);
    if (!v) return dflt;
    try {
      std::string t = trim_copy(*v);
      size_t pos = 0;
      long long x = std::stoll(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return x;
    } catch (const std::exception&) {
      errs.push_back(key + ": '" + *v + "' is not an integer");
      return dflt;
    }
  }

  uint64_t u64(const std::string& key, uint64_t dflt) const {
    auto v = pt.get_optional<std::string>(key);
    if (!v) return dflt;
    try {
      std::string t = trim_copy(*v);
      size_t pos = 0;
      uint64_t x = std::stoull(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return x;
    } catch (const std::exception&) {
      errs.push_back(key + ": '" + *v + "' is not an unsigned integer");
      return dflt;
    }
  }

  std::vector<std::string> list(const std::string& key, const std::vector<std::string>& dflt) const {
    auto v = pt.get_optional<std::string>(key);
    if (!v) return dflt;
    std::vector<std::string> out;
    std::stringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim_copy(tok);
      if (!tok.empty()) out.push_back(tok);
    }
    return out;
  }

  std::vector<int> int_list(const std::string& key, const std::vector<int>& dflt) const {
    if (!has(key)) return dflt;
    std::vector<int> out;
    for (const std::string& tok : list(key, {})) {
      try {
        size_t pos = 0;
        int x = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        out.push_back(x);
      } catch (const std::exception&) {
        errs.push_back(key + ": '" + tok + "' is not an integer");
      }
    }
    return out;
  }
};

}  // namespace detail

// Validate and assemble a configuration from a parsed INI tree.  Every
// violation is collected; the exception message enumerates all of them.
inline ExperimentConfig parse_config_tree(const boost::property_tree::ptree& pt) {
  std::vector<std::string> errs;
  detail::ConfigReader r{pt, errs};
  ExperimentConfig cfg;

  // [model]
  std::string kind = r.str("model.kind", "pptt");
  if (kind == "tt") cfg.model.kind = ModelKind::tt;
  else if (kind == "pptt") cfg.model.kind = ModelKind::pptt;
  else errs.push_back("model.kind: expected tt or pptt, got '" + kind + "'");
  std::string form = r.str("model.form", "perturbation");
  if (form == "primitive") cfg.model.form = ModelForm::primitive;
  else if (form == "perturbation") cfg.model.form = ModelForm::perturbation;
  else errs.push_back("model.form: expected primitive or perturbation, got '" + form + "'");
  cfg.model.alpha = r.num("model.alpha", 1.0);
  cfg.model.beta = r.num("model.beta", 1.0);
  cfg.model.rho_s = r.num("model.rho_s", 1.0);
  cfg.model.pressure_slope = r.num("model.pressure_slope", 1.0);
  for (auto [key, val] : {std::pair<const char*, double>{"model.alpha", cfg.model.alpha},
                          {"model.beta", cfg.model.beta},
                          {"model.rho_s", cfg.model.rho_s},
                          {"model.pressure_slope", cfg.model.pressure_slope}})
    if (!(val > 0.0) || !std::isfinite(val))
      errs.push_back(std::string(key) + ": must be positive and finite");

  // [grid]
  int d = static_cast<int>(r.integer("grid.d", 2));
  if (d != 2 && d != 3) {
    errs.push_back("grid.d: d ∈ {2,3} is required, got " + std::to_string(d));
    d = 2;  // placeholder so later checks can proceed
  }
  int n = static_cast<int>(r.integer("grid.n", 64));
  if (n < 8 || n % 2 != 0) {
    errs.push_back("grid.n: need an even n >= 8, got " + std::to_string(n));
    n = 8;
  }
  double L = 2.0 * std::numbers::pi;
  try {
    L = parse_length_value(r.str("grid.L", "2pi"));
  } catch (const ConfigError& e) {
    errs.push_back(std::string("grid.L: ") + e.what());
  }
  if (!(L > 0.0) || !std::isfinite(L)) {
    errs.push_back("grid.L: must be positive and finite");
    L = 2.0 * std::numbers::pi;
  }
  Dealias dealias = Dealias::one_half;
  std::string da = r.str("grid.dealias", "one-half");
  if (da == "one-half") dealias = Dealias::one_half;
  else if (da == "two-thirds") dealias = Dealias::two_thirds;
  else if (da == "none") dealias = Dealias::none;
  else errs.push_back("grid.dealias: expected one-half, two-thirds, or none, got '" + da + "'");

  if (cfg.model.form == ModelForm::perturbation && !cfg.model.is_normalized(d))
    errs.push_back("model: perturbation form requires alpha = beta = rho_s = pressure_slope = 1 "
                   "(the equations are written about the normalized ordered state)");

  // [stepper]
  try {
    cfg.stepper.scheme = parse_scheme(r.str("stepper.scheme", "imex-rk2"));
  } catch (const ConfigError& e) {
    errs.push_back(std::string("stepper.scheme: ") + e.what());
  }
  cfg.stepper.dt = r.num("stepper.dt", 1e-2);
  if (!(cfg.stepper.dt > 0.0) || !std::isfinite(cfg.stepper.dt))
    errs.push_back("stepper.dt: must be positive and finite");
  cfg.stepper.t_end = r.num("stepper.t_end", 1.0);
  if (!std::isfinite(cfg.stepper.t_end) || cfg.stepper.t_end < 0.0)
    errs.push_back("stepper.t_end: must be nonnegative and finite");
  long long oe = r.integer("stepper.output_every", 1);
  if (oe < 1) errs.push_back("stepper.output_every: must be at least 1");
  else cfg.stepper.output_every = static_cast<size_t>(oe);
  cfg.stepper.blowup_factor = r.num("stepper.blowup_factor", 1e3);
  if (!(cfg.stepper.blowup_factor > 1.0))
    errs.push_back("stepper.blowup_factor: must exceed 1");
  std::string prop = r.str("stepper.propagation", "nonlinear");
  if (prop == "nonlinear") cfg.propagation = Propagation::nonlinear;
  else if (prop == "linear-imex") cfg.propagation = Propagation::linear_imex;
  else if (prop == "linear-exact") cfg.propagation = Propagation::linear_exact;
  else errs.push_back("stepper.propagation: expected nonlinear, linear-imex, or linear-exact, got '" + prop + "'");
  if (cfg.propagation == Propagation::linear_exact && cfg.model.form != ModelForm::perturbation)
    errs.push_back("stepper.propagation: linear-exact is defined for the perturbation form");

  // [init]
  cfg.init.kind = r.str("init.kind", "low_freq_bump");
  if (cfg.init.kind != "low_freq_bump" && cfg.init.kind != "power_profile" &&
      cfg.init.kind != "random_small")
    errs.push_back("init.kind: expected low_freq_bump, power_profile, or random_small, got '" +
                   cfg.init.kind + "'");
  cfg.init.epsilon = r.num("init.epsilon", 1e-3);
  if (!(cfg.init.epsilon >= 0.0) || !std::isfinite(cfg.init.epsilon))
    errs.push_back("init.epsilon: must be nonnegative and finite");
  cfg.init.a = r.num("init.a", -0.4);
  if (!std::isfinite(cfg.init.a)) errs.push_back("init.a: must be finite");
  cfg.init.k0 = r.num("init.k0", 1.0);
  if (!(cfg.init.k0 > 0.0) || !std::isfinite(cfg.init.k0))
    errs.push_back("init.k0: must be positive and finite");
  cfg.init.seed = r.u64("init.seed", 1);

  // [diagnostics]
  cfg.diag.m = static_cast<int>(r.integer("diagnostics.m", 3));
  if (cfg.diag.m < 3) errs.push_back("diagnostics.m: the decay framework requires m >= 3");
  cfg.diag.s = r.num("diagnostics.s", 0.5);
  if (cfg.diag.s == 0.0) {
    if (!(d == 3 && cfg.diag.m == 3))
      errs.push_back("diagnostics.s: s = 0 is admissible only for (d, m) = (3, 3); the low-mode "
                     "decay hypothesis otherwise needs s ∈ (0, d/2)");
  } else if (cfg.diag.s < 0.0 || cfg.diag.s >= 0.5 * d) {
    errs.push_back("diagnostics.s: the low-mode decay hypothesis requires s ∈ (0, d/2), got s = " +
                   std::to_string(cfg.diag.s) + " with d = " + std::to_string(d));
  }
  cfg.diag.delta0 = r.num("diagnostics.delta0", 0.1);
  if (!(cfg.diag.delta0 > 0.0 && cfg.diag.delta0 < 1.0))
    errs.push_back("diagnostics.delta0: must lie in (0, 1)");
  const int lmax = cfg.model.kind == ModelKind::tt ? cfg.diag.m - 1 : cfg.diag.m;
  cfg.diag.levels = r.int_list("diagnostics.levels", {0, 1});
  for (int l : cfg.diag.levels)
    if (l < 0 || l > lmax)
      errs.push_back("diagnostics.levels: level " + std::to_string(l) +
                     " outside [0, " + std::to_string(lmax) + "] for this model");
  cfg.diag.ledger_levels = r.int_list("diagnostics.ledger_levels", {0, cfg.diag.m});
  for (int l : cfg.diag.ledger_levels)
    if (l < 0 || l > cfg.diag.m)
      errs.push_back("diagnostics.ledger_levels: level " + std::to_string(l) +
                     " outside [0, m]");

  if (cfg.init.kind == "power_profile" && 2.0 * cfg.init.a - 2.0 * cfg.diag.s <= -d)
    errs.push_back("init: power profile a = " + std::to_string(cfg.init.a) +
                   " is incompatible with s = " + std::to_string(cfg.diag.s) +
                   " (the low-mode norm needs 2a - 2s > -d)");

  // [output]
  cfg.output.dir = r.str("output.dir", "out");
  cfg.output.series = r.str("output.series", "series.jsonl");
  cfg.output.checkpoint = r.str("output.checkpoint", "");
  long long ce = r.integer("output.checkpoint_every", 0);
  if (ce < 0) errs.push_back("output.checkpoint_every: must be nonnegative");
  else cfg.output.checkpoint_every = static_cast<int>(ce);

  // [fit]
  cfg.fit.t0 = r.num("fit.t0", 10.0);
  cfg.fit.t1 = r.num("fit.t1", 100.0);
  if (!(cfg.fit.t1 > cfg.fit.t0)) errs.push_back("fit: t1 must exceed t0");
  cfg.fit.tolerance = r.num("fit.tolerance", 0.1);
  if (!(cfg.fit.tolerance > 0.0)) errs.push_back("fit.tolerance: must be positive");
  cfg.fit.levels = r.int_list("fit.levels", cfg.diag.levels);
  for (int l : cfg.fit.levels)
    if (l < 0 || l > lmax)
      errs.push_back("fit.levels: level " + std::to_string(l) + " outside [0, " +
                     std::to_string(lmax) + "] for this model");

  // [inequalities]
  long long cnt = r.integer("inequalities.count", 64);
  if (cnt < 1) errs.push_back("inequalities.count: must be at least 1");
  else cfg.ineq.count = static_cast<size_t>(cnt);
  cfg.ineq.seed = r.u64("inequalities.seed", 1);
  cfg.ineq.spectrum = r.str("inequalities.spectrum", "power:-1.0");
  try {
    Spectrum::parse(cfg.ineq.spectrum);
  } catch (const ConfigError& e) {
    errs.push_back(std::string("inequalities.spectrum: ") + e.what());
  }
  cfg.ineq.items = r.list("inequalities.items", {});

  // [oracle]
  cfg.oracle.tolerance = r.num("oracle.tolerance", 1e-10);
  if (!(cfg.oracle.tolerance > 0.0)) errs.push_back("oracle.tolerance: must be positive");
  cfg.oracle.seed = r.u64("oracle.seed", 2);
  cfg.oracle.amplitude = r.num("oracle.amplitude", 0.02);
  if (!(cfg.oracle.amplitude > 0.0)) errs.push_back("oracle.amplitude: must be positive");
  cfg.oracle.mean_shift = r.num("oracle.mean_shift", 0.005);
  if (!(cfg.oracle.mean_shift >= 0.0)) errs.push_back("oracle.mean_shift: must be nonnegative");
  cfg.oracle.dt = r.num("oracle.dt", 1e-3);
  if (!(cfg.oracle.dt > 0.0)) errs.push_back("oracle.dt: must be positive");

  // [steady]
  cfg.steady.tolerance = r.num("steady.tolerance", 1e-10);
  if (!(cfg.steady.tolerance > 0.0)) errs.push_back("steady.tolerance: must be positive");

  if (!errs.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& e : errs) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  cfg.grid = make_grid(d, n, L, dealias);
  return cfg;
}

inline void apply_overrides(boost::property_tree::ptree& pt,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
  for (const auto& [key, value] : overrides) {
    if (key.find('.') == std::string::npos)
      throw ConfigError("override key '" + key + "' must look like section.key");
    pt.put(key, value);
  }
}

inline ExperimentConfig parse_config_string(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  apply_overrides(pt, overrides);
  return parse_config_tree(pt);
}

inline ExperimentConfig load_config(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_string(ss.str(), overrides);
}

// ----------------------------------------------------------------------------
// Initial data.  All kinds are rescaled so the pair Sobolev norm at order
// max(3, d - 2) equals epsilon exactly; epsilon = 0 yields the zero state.

namespace detail {

inline void add_conjugate_pair(SpectralScalar& f, const std::array<int, 3>& js, Complex c) {
  const GridSpec& g = f.grid;
  std::array<int, 3> jp{0, 0, 0}, jm{0, 0, 0};
  for (int a = 0; a < g.d; ++a) {
    jp[a] = js[a] >= 0 ? js[a] : g.n + js[a];
    jm[a] = js[a] == 0 ? 0 : g.n - jp[a];
  }
  f.c[flatten(g, jp)] += c;
  f.c[flatten(g, jm)] += std::conj(c);
}

// Random phases on the canonical half-lattice below a physical radius, with a
// power-law amplitude profile.
inline SpectralScalar power_modes(const GridSpec& g, double a, double k0, uint64_t seed) {
  SpectralScalar f = SpectralScalar::zeros(g);
  std::mt19937_64 eng(seed);
  const int bl = g.band_limit();
  for (size_t idx = 0; idx < g.size(); ++idx) {
    auto j = unflatten(g, idx);
    std::array<int, 3> js{0, 0, 0};
    bool keep = true, canonical = false, nonzero = false;
    for (int ax = 0; ax < g.d && keep; ++ax) {
      js[ax] = g.signed_index(j[ax]);
      if (std::abs(js[ax]) > bl) keep = false;
      if (!nonzero && js[ax] != 0) {
        nonzero = true;
        canonical = js[ax] > 0;
      }
    }
    if (!keep || !nonzero || !canonical) continue;
    double k2 = k_mag_sq(g, idx);
    if (k2 > k0 * k0 * (1.0 + 1e-12)) continue;
    double theta = 2.0 * std::numbers::pi * detail::uniform01(eng);
    Complex c = std::pow(std::sqrt(k2), a) * Complex(std::cos(theta), std::sin(theta));
    f.c[idx] = c;
    std::array<int, 3> jm{0, 0, 0};
    for (int ax = 0; ax < g.d; ++ax) jm[ax] = js[ax] == 0 ? 0 : (g.n - j[ax]);
    f.c[flatten(g, jm)] = std::conj(c);
  }
  return f;
}

}  // namespace detail

inline State make_initial_data(const GridSpec& g, const InitConfig& ic, double s) {
  State st = State::zeros(g);
  if (ic.epsilon == 0.0) return st;

  if (ic.kind == "low_freq_bump") {
    // Fixed low-mode pattern (seed-independent): one sine per velocity
    // component, a mild cross-mode asymmetry, and a density bump.
    for (int a = 0; a < g.d; ++a) {
      std::array<int, 3> e{0, 0, 0};
      e[a] = 1;
      detail::add_conjugate_pair(st.u.comp[a], e, Complex(0.0, -0.5));
      std::array<int, 3> x{0, 0, 0};
      x[a] = 1;
      x[(a + 1) % g.d] += 1;
      detail::add_conjugate_pair(st.u.comp[a], x, Complex(0.1 * (a + 1), 0.0));
    }
    detail::add_conjugate_pair(st.eta, {1, 0, 0}, Complex(0.25, 0.0));
    detail::add_conjugate_pair(st.eta, {1, 1, 0}, Complex(0.0, 0.1));
  } else if (ic.kind == "power_profile") {
    if (2.0 * ic.a - 2.0 * s <= -g.d)
      throw ConfigError("power profile a = " + std::to_string(ic.a) +
                        " is incompatible with s = " + std::to_string(s) +
                        " (needs 2a - 2s > -d)");
    for (int a = 0; a < g.d; ++a)
      st.u.comp[a] = detail::power_modes(g, ic.a, ic.k0, detail::trial_seed(ic.seed, 11 + a));
    st.eta = detail::power_modes(g, ic.a, ic.k0, detail::trial_seed(ic.seed, 17));
  } else if (ic.kind == "random_small") {
    Spectrum flat{};
    for (int a = 0; a < g.d; ++a)
      st.u.comp[a] = random_band_limited(g, flat, detail::trial_seed(ic.seed, 23 + a));
    st.eta = random_band_limited(g, flat, detail::trial_seed(ic.seed, 29));
  } else {
    throw ConfigError("unknown init kind '" + ic.kind + "'");
  }

  const int order = std::max(3, g.d - 2);
  double p2 = 0.0;
  for (int a = 0; a < g.d; ++a) p2 += hm_norm_sq(st.u.comp[a], order);
  p2 += hm_norm_sq(st.eta, order);
  if (p2 == 0.0)
    throw ConfigError("initial profile has no modes on this grid (k0 below the lattice spacing?)");
  const double scale_by = ic.epsilon / std::sqrt(p2);
  for (int a = 0; a < g.d; ++a) scale(st.u.comp[a], scale_by);
  scale(st.eta, scale_by);
  return st;
}

// ----------------------------------------------------------------------------
// Checkpoints: "TTLB", version, geometry, time, interleaved complex payload
// (velocity components then density, flat index order), FNV-1a checksum.
// Everything little-endian.

namespace detail {

inline uint64_t fnv1a_bytes(const unsigned char* p, size_t n) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

template <class T>
void put_raw(std::vector<unsigned char>& buf, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  buf.insert(buf.end(), b, b + sizeof(T));
}

}  // namespace detail

inline void write_checkpoint(const std::string& path, const State& st) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint format is little-endian");
  const GridSpec& g = st.u.grid;
  std::vector<unsigned char> payload;
  payload.reserve((static_cast<size_t>(g.d) + 1) * g.size() * 16);
  auto put_field = [&](const SpectralScalar& f) {
    for (const Complex& z : f.c) {
      detail::put_raw(payload, z.real());
      detail::put_raw(payload, z.imag());
    }
  };
  for (int a = 0; a < g.d; ++a) put_field(st.u.comp[a]);
  put_field(st.eta);
  const uint64_t sum = detail::fnv1a_bytes(payload.data(), payload.size());

  std::vector<unsigned char> head;
  head.insert(head.end(), {'T', 'T', 'L', 'B'});
  detail::put_raw(head, static_cast<uint32_t>(1));
  detail::put_raw(head, static_cast<uint64_t>(g.d));
  detail::put_raw(head, static_cast<uint64_t>(g.n));
  detail::put_raw(head, g.L);
  detail::put_raw(head, st.t);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path);
  f.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
  f.write(reinterpret_cast<const char*>(payload.data()),
          static_cast<std::streamsize>(payload.size()));
  std::vector<unsigned char> tail;
  detail::put_raw(tail, sum);
  f.write(reinterpret_cast<const char*>(tail.data()), static_cast<std::streamsize>(tail.size()));
  f.flush();
  if (!f) throw IoError("short write on checkpoint: " + path);
}

inline State read_checkpoint(const std::string& path, Dealias dealias = Dealias::one_half) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint format is little-endian");
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  auto need = [&](void* dst, size_t bytes) {
    if (!f.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(bytes)))
      throw IoError("truncated checkpoint: " + path);
  };
  char magic[4];
  need(magic, 4);
  if (std::memcmp(magic, "TTLB", 4) != 0) throw IoError("not a checkpoint (bad magic): " + path);
  uint32_t version = 0;
  need(&version, sizeof(version));
  if (version != 1)
    throw IoError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
  uint64_t d64 = 0, n64 = 0;
  double L = 0.0, t = 0.0;
  need(&d64, 8);
  need(&n64, 8);
  need(&L, 8);
  need(&t, 8);
  if (d64 < 2 || d64 > 3 || n64 < 8 || n64 % 2 != 0 || n64 > (1u << 16) || !(L > 0.0) ||
      !std::isfinite(L) || !std::isfinite(t))
    throw IoError("corrupt checkpoint header: " + path);
  GridSpec g = make_grid(static_cast<int>(d64), static_cast<int>(n64), L, dealias);
  const size_t bytes = (static_cast<size_t>(g.d) + 1) * g.size() * 16;
  std::vector<unsigned char> payload(bytes);
  need(payload.data(), bytes);
  uint64_t sum = 0;
  need(&sum, 8);
  if (detail::fnv1a_bytes(payload.data(), payload.size()) != sum)
    throw ChecksumMismatch("checkpoint payload checksum mismatch: " + path);

  State st = State::zeros(g);
  st.t = t;
  size_t off = 0;
  auto get_field = [&](SpectralScalar& fld) {
    for (Complex& z : fld.c) {
      double re = 0.0, im = 0.0;
      std::memcpy(&re, payload.data() + off, 8);
      std::memcpy(&im, payload.data() + off + 8, 8);
      off += 16;
      z = Complex(re, im);
    }
  };
  for (int a = 0; a < g.d; ++a) get_field(st.u.comp[a]);
  get_field(st.eta);
  return st;
}

// ----------------------------------------------------------------------------
// Series output: one JSON object per line, header first, then one record per
// observed step.  Byte-for-byte reproducible: no timestamps, fixed key order.

namespace detail {

inline State deviation_of(const State& full, const ModelParams& p) {
  if (p.form == ModelForm::perturbation) return full;
  State dev = full;
  const GridSpec& g = full.u.grid;
  const double speed = p.steady_speed();
  for (int a = 0; a < g.d; ++a) dev.u.comp[a].c[0] -= Complex(speed * p.e_dir[a], 0.0);
  dev.eta.c[0] -= Complex(p.rho_s, 0.0);
  return dev;
}

inline double pair_hdot(const State& st, double s) {
  double acc = 0.0;
  for (int a = 0; a < st.u.grid.d; ++a) acc += hdot_norm_sq(st.u.comp[a], s);
  acc += hdot_norm_sq(st.eta, s);
  return std::sqrt(acc);
}

inline double pair_hm(const State& st, int m) {
  double acc = 0.0;
  for (int a = 0; a < st.u.grid.d; ++a) acc += hm_norm_sq(st.u.comp[a], m);
  acc += hm_norm_sq(st.eta, m);
  return std::sqrt(acc);
}

}  // namespace detail

inline nlohmann::ordered_json series_header(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["record"] = "header";
  j["model"] = to_string(cfg.model.kind);
  j["form"] = to_string(cfg.model.form);
  j["d"] = cfg.grid.d;
  j["n"] = cfg.grid.n;
  j["L"] = cfg.grid.L;
  j["dealias"] = to_string(cfg.grid.dealias);
  j["scheme"] = to_string(cfg.stepper.scheme);
  j["propagation"] = to_string(cfg.propagation);
  j["dt"] = cfg.stepper.dt;
  j["t_end"] = cfg.stepper.t_end;
  j["output_every"] = cfg.stepper.output_every;
  j["init"] = cfg.init.kind;
  j["epsilon"] = cfg.init.epsilon;
  j["seed"] = cfg.init.seed;
  j["m"] = cfg.diag.m;
  j["s"] = cfg.diag.s;
  j["delta0"] = cfg.diag.delta0;
  j["levels"] = cfg.diag.levels;
  j["ledger_levels"] = cfg.diag.ledger_levels;
  return j;
}

// Diagnostics of one observed state.  All norms are of the deviation from the
// ordered steady state (which is the state itself in perturbation form).
// Negative-order norms are taken on the mean-projected deviation.
inline nlohmann::ordered_json series_record(const State& full, size_t step,
                                            const ExperimentConfig& cfg) {
  State dev = detail::deviation_of(full, cfg.model);
  nlohmann::ordered_json j;
  j["record"] = "step";
  j["step"] = step;
  j["t"] = full.t;
  j["h3"] = detail::pair_hm(dev, 3);
  j["hm"] = detail::pair_hm(dev, cfg.diag.m);

  State proj = dev;
  for (int a = 0; a < cfg.grid.d; ++a) proj.u.comp[a].c[0] = Complex(0.0, 0.0);
  proj.eta.c[0] = Complex(0.0, 0.0);
  j["hdot_minus_s"] = detail::pair_hdot(proj, -cfg.diag.s);

  nlohmann::ordered_json hl, env;
  for (int l : cfg.diag.levels) {
    double v = detail::pair_hdot(dev, static_cast<double>(l));
    hl[std::to_string(l)] = v;
    env[std::to_string(l)] = v * std::pow(1.0 + full.t, 0.5 * (cfg.diag.s + l));
  }
  j["hdot_l"] = hl;

  j["ubar_l2"] = l2_norm(ubar(dev.u));
  j["hypo"] = hypo_functional(dev, cfg.diag.m, cfg.diag.delta0);
  j["envelope"] = env;
  j["mean_eta"] = mean_eta(dev);

  nlohmann::ordered_json led = nlohmann::ordered_json::object();
  if (cfg.model.form == ModelForm::perturbation || cfg.model.is_normalized(cfg.grid.d)) {
    for (int l : cfg.diag.ledger_levels) {
      EnergyLedger el = energy_ledger(dev, l, cfg.model.kind);
      nlohmann::ordered_json e;
      e["energy"] = el.energy;
      e["diss_grad_u"] = el.diss_grad_u;
      e["diss_div"] = el.diss_div;
      e["diss_align"] = el.diss_align;
      e["diss_grad_eta"] = el.diss_grad_eta;
      e["flux_advection"] = el.flux[0];
      e["flux_cubic"] = el.flux[1];
      e["flux_alignment_sq"] = el.flux[2];
      e["flux_mean"] = el.flux[3];
      e["flux_density"] = el.flux[4];
      e["flux_nested"] = el.flux[5];
      e["dissipation"] = el.dissipation();
      e["flux_total"] = el.flux_total();
      led[std::to_string(l)] = e;
    }
  }
  j["ledger"] = led;
  return j;
}

// ----------------------------------------------------------------------------
// Experiment driver.

struct RunResult {
  State final_state;
  size_t records = 0;
  size_t steps = 0;
};

inline RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& out) {
  const GridSpec& g = cfg.grid;
  State init = make_initial_data(g, cfg.init, cfg.diag.s);
  if (cfg.model.form == ModelForm::primitive) {
    State base = steady_state(g, cfg.model);
    for (int a = 0; a < g.d; ++a) init.u.comp[a].c[0] += base.u.comp[a].c[0];
    init.eta.c[0] += base.eta.c[0];
  }

  out << series_header(cfg).dump() << "\n" << std::flush;
  RunResult res;
  const std::string ckpt_path =
      cfg.output.checkpoint.empty() ? "" : cfg.output.dir + "/" + cfg.output.checkpoint;
  auto emit = [&](const State& full, size_t step) {
    out << series_record(full, step, cfg).dump() << "\n" << std::flush;
    ++res.records;
    if (!ckpt_path.empty() && cfg.output.checkpoint_every > 0 && step > 0 &&
        step % static_cast<size_t>(cfg.output.checkpoint_every) == 0)
      write_checkpoint(ckpt_path, full);
  };

  if (cfg.propagation == Propagation::linear_exact) {
    const double dt = cfg.stepper.dt;
    const double t_end = cfg.stepper.t_end;
    const size_t nsteps =
        t_end <= 0.0 ? 0 : static_cast<size_t>(std::ceil(t_end / dt - 1e-9));
    State cur = init;
    emit(cur, 0);
    std::map<long long, std::unique_ptr<LinearPropagator>> props;
    size_t j = 0;
    while (j < nsteps) {
      size_t next = std::min(j + cfg.stepper.output_every, nsteps);
      double target = next == nsteps ? t_end : static_cast<double>(next) * dt;
      double hop = target - cur.t;
      long long key = static_cast<long long>(std::llround(hop * 1e12));
      auto it = props.find(key);
      if (it == props.end())
        it = props.emplace(key, std::make_unique<LinearPropagator>(g, cfg.model.kind, hop)).first;
      it->second->apply(cur);
      cur.t = target;
      j = next;
      emit(cur, j);
    }
    res.final_state = cur;
    res.steps = nsteps;
  } else {
    StepperConfig sc = cfg.stepper;
    sc.linear_only = cfg.propagation == Propagation::linear_imex;
    Stepper stepper(g, cfg.model, sc);
    size_t last_step = 0;
    res.final_state = stepper.integrate(init, [&](const State& full, const StepReport& rep) {
      emit(full, rep.step);
      last_step = rep.step;
    });
    res.steps = last_step;
  }
  if (!ckpt_path.empty()) write_checkpoint(ckpt_path, res.final_state);
  return res;
}

// ----------------------------------------------------------------------------
// Decay-rate fitting on series data.

struct DecayFit {
  int level = 0;
  double slope = 0.0;
  double stderr_ = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  double t0 = 0.0, t1 = 0.0;
  size_t points = 0;
  bool pass = false;
};

// Least-squares slope of log ||Lambda^l (u, eta)|| against log(1 + t) over
// [t0, t1].  Passes when the fitted slope is at most expected + tolerance,
// where expected = -(s + l)/2; decaying faster than predicted is fine.
inline DecayFit fit_decay(const std::vector<std::pair<double, double>>& samples, int level,
                          double s, double t0, double t1, double tolerance) {
  DecayFit r;
  r.level = level;
  r.expected = -0.5 * (s + static_cast<double>(level));
  r.tolerance = tolerance;
  r.t0 = t0;
  r.t1 = t1;
  std::vector<double> xs, ys;
  for (const auto& [t, v] : samples) {
    if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
    if (!std::isfinite(t) || !std::isfinite(v)) throw NotANumberInSeries("non-finite series sample");
    if (!(v > 0.0)) continue;  // dead modes carry no slope information
    xs.push_back(std::log1p(t));
    ys.push_back(std::log(v));
  }
  r.points = xs.size();
  if (r.points < 3)
    throw WindowTooShort("decay fit needs at least 3 positive samples in [" + std::to_string(t0) +
                         ", " + std::to_string(t1) + "], got " + std::to_string(r.points));
  double xm = 0.0, ym = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= static_cast<double>(r.points);
  ym /= static_cast<double>(r.points);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - xm, dy = ys[i] - ym;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw WindowTooShort("decay fit window collapses to a single time");
  r.slope = sxy / sxx;
  double ss_res = syy - r.slope * sxy;
  if (ss_res < 0.0) ss_res = 0.0;
  r.stderr_ = r.points > 2
                  ? std::sqrt(ss_res / (static_cast<double>(r.points - 2) * sxx))
                  : 0.0;
  r.pass = r.slope <= r.expected + tolerance;
  return r;
}

// Extract (t, ||Lambda^l (u, eta)||) pairs from a series stream.
inline std::vector<std::pair<double, double>> read_series_level(std::istream& in, int level) {
  std::vector<std::pair<double, double>> out;
  const std::string key = std::to_string(level);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception&) {
      throw IoError("malformed series line " + std::to_string(lineno));
    }
    if (j.value("record", std::string()) != "step") continue;
    if (!j.contains("t") || !j.contains("hdot_l") || !j["hdot_l"].contains(key) ||
        !j["t"].is_number() || !j["hdot_l"][key].is_number())
      throw NotANumberInSeries("series record " + std::to_string(lineno) +
                               " lacks a numeric t or hdot_l[" + key + "]");
    double t = j["t"].get<double>();
    double v = j["hdot_l"][key].get<double>();
    if (!std::isfinite(t) || !std::isfinite(v))
      throw NotANumberInSeries("non-finite sample on series line " + std::to_string(lineno));
    out.emplace_back(t, v);
  }
  return out;
}

// ----------------------------------------------------------------------------
// Small-grid oracle harness: the production pipeline against direct
// convolution, term by term, plus one implicit Euler step against a dense
// per-mode solve fed by the oracle nonlinearity.

struct OracleCheck {
  std::string name;
  double err = 0.0;
};

struct OracleReport {
  ModelKind kind = ModelKind::pptt;
  double tolerance = 1e-10;
  std::vector<OracleCheck> checks;

  double max_err() const {
    double m = 0.0;
    for (const auto& c : checks) m = std::max(m, c.err);
    return m;
  }
  bool pass() const { return max_err() <= tolerance; }
};

namespace detail {

inline double max_rel_err_vec(const SpectralVector& a, const SpectralVector& b) {
  double m = 0.0;
  for (int i = 0; i < a.grid.d; ++i) m = std::max(m, oracle::max_rel_err(a.comp[i], b.comp[i]));
  return m;
}

}  // namespace detail

inline OracleReport oracle_smallgrid(const GridSpec& g, ModelKind kind, uint64_t seed,
                                     double amplitude = 0.02, double mean_shift = 0.005,
                                     double dt = 1e-3, double tolerance = 1e-10) {
  if (g.n > 16) throw ConfigError("oracle grids are capped at n = 16 (direct convolution cost)");
  OracleReport rep;
  rep.kind = kind;
  rep.tolerance = tolerance;
  const int d = g.d;
  const int e = 0;

  // Trial state: dense band-limited randomness plus zero-mode shifts so the
  // alignment and mean-coupling paths see nonzero means.
  Spectrum flat{};
  State st = State::zeros(g);
  for (int a = 0; a < d; ++a) {
    st.u.comp[a] = random_band_limited(g, flat, detail::trial_seed(seed, 100 + a));
    scale(st.u.comp[a], amplitude);
  }
  st.eta = random_band_limited(g, flat, detail::trial_seed(seed, 200));
  scale(st.eta, amplitude);
  st.u.comp[e].c[0] += Complex(mean_shift, 0.0);
  st.eta.c[0] += Complex(0.5 * mean_shift, 0.0);

  const SpectralVector& u = st.u;

  // Term 1: advection u.grad u.
  {
    double err = 0.0;
    for (int i = 0; i < d; ++i) {
      SpectralScalar prod = SpectralScalar::zeros(g);
      for (int a = 0; a < d; ++a)
        axpy(1.0, pointwise_product(u.comp[a], partial_derivative(u.comp[i], a), 2), prod);
      err = std::max(err, oracle::max_rel_err(prod, oracle::advect(u, u.comp[i])));
    }
    rep.checks.push_back({"advection", err});
  }
  // Term 2: cubic damping |u|^2 u.
  {
    double err = 0.0;
    for (int i = 0; i < d; ++i) {
      SpectralScalar prod = SpectralScalar::zeros(g);
      SpectralScalar orac = SpectralScalar::zeros(g);
      for (int a = 0; a < d; ++a) {
        axpy(1.0, pointwise_product(u.comp[a], u.comp[a], u.comp[i], 3), prod);
        axpy(1.0, oracle::product(u.comp[a], u.comp[a], u.comp[i]), orac);
      }
      err = std::max(err, oracle::max_rel_err(prod, orac));
    }
    rep.checks.push_back({"cubic", err});
  }
  // Term 3: alignment source |u|^2.
  {
    SpectralScalar prod = SpectralScalar::zeros(g);
    SpectralScalar orac = SpectralScalar::zeros(g);
    for (int a = 0; a < d; ++a) {
      axpy(1.0, pointwise_product(u.comp[a], u.comp[a], 2), prod);
      axpy(1.0, oracle::product(u.comp[a], u.comp[a]), orac);
    }
    rep.checks.push_back({"alignment_sq", oracle::max_rel_err(prod, orac)});
  }
  // Term 4: mean coupling 2 u_1 u.
  {
    double err = 0.0;
    for (int i = 0; i < d; ++i) {
      SpectralScalar prod = pointwise_product(u.comp[e], u.comp[i], 2);
      scale(prod, 2.0);
      SpectralScalar orac = oracle::product(u.comp[e], u.comp[i]);
      scale(orac, 2.0);
      err = std::max(err, oracle::max_rel_err(prod, orac));
    }
    rep.checks.push_back({"mean_coupling", err});
  }
  // Term 5: density flux div(eta u).
  {
    SpectralScalar prod = SpectralScalar::zeros(g);
    SpectralScalar orac = SpectralScalar::zeros(g);
    for (int a = 0; a < d; ++a) {
      axpy(1.0, partial_derivative(pointwise_product(st.eta, u.comp[a], 2), a), prod);
      axpy(1.0, partial_derivative(oracle::product(st.eta, u.comp[a]), a), orac);
    }
    rep.checks.push_back({"density_flux", oracle::max_rel_err(prod, orac)});
  }
  // Term 6 (TT): nonlinear content of the nested transport, isolated from the
  // fused evaluator as the difference of the two model remainders.
  SpectralVector nested_orac = SpectralVector::zeros(g);
  if (kind == ModelKind::tt) {
    Tendency tt = nonlinear_remainder(st, ModelKind::tt);
    Tendency pp = nonlinear_remainder(st, ModelKind::pptt);
    SpectralVector nested_prod = SpectralVector::zeros(g);
    for (int i = 0; i < d; ++i) {
      nested_prod.comp[i] = tt.du.comp[i];
      axpy(-1.0, pp.du.comp[i], nested_prod.comp[i]);
    }
    nested_orac = oracle::nested_transport_nonlinear(u, e);
    rep.checks.push_back({"nested_transport", detail::max_rel_err_vec(nested_prod, nested_orac)});
  }
  // Oracle nonlinear remainder, assembled independently of the fused path.
  Tendency n_orac = Tendency::zeros(g);
  {
    SpectralScalar usq = SpectralScalar::zeros(g);
    for (int a = 0; a < d; ++a) axpy(1.0, oracle::product(u.comp[a], u.comp[a]), usq);
    for (int i = 0; i < d; ++i) {
      SpectralScalar acc = SpectralScalar::zeros(g);
      axpy(-1.0, oracle::advect(u, u.comp[i]), acc);
      for (int a = 0; a < d; ++a) axpy(-1.0, oracle::product(u.comp[a], u.comp[a], u.comp[i]), acc);
      if (i == e) axpy(-1.0, usq, acc);
      SpectralScalar mean_term = oracle::product(u.comp[e], u.comp[i]);
      axpy(-2.0, mean_term, acc);
      if (kind == ModelKind::tt) axpy(1.0, nested_orac.comp[i], acc);
      n_orac.du.comp[i] = acc;
    }
    SpectralScalar deta = SpectralScalar::zeros(g);
    for (int a = 0; a < d; ++a)
      axpy(-1.0, partial_derivative(oracle::product(st.eta, u.comp[a]), a), deta);
    n_orac.deta = deta;
  }
  {
    Tendency n_prod = nonlinear_remainder(st, kind);
    double err = detail::max_rel_err_vec(n_prod.du, n_orac.du);
    err = std::max(err, oracle::max_rel_err(n_prod.deta, n_orac.deta));
    rep.checks.push_back({"remainder_total", err});
  }
  // Commutators [d^gamma, u.grad] at second order, production composition
  // against the oracle expansion.
  {
    double err = 0.0;
    for (const auto& gamma : multi_indices(d, 2)) {
      SpectralScalar adv = SpectralScalar::zeros(g);
      for (int a = 0; a < d; ++a)
        axpy(1.0, pointwise_product(u.comp[a], partial_derivative(st.eta, a), 2), adv);
      SpectralScalar lead = apply_multi_derivative(adv, gamma);
      SpectralScalar dgv = apply_multi_derivative(st.eta, gamma);
      for (int a = 0; a < d; ++a)
        axpy(-1.0, pointwise_product(u.comp[a], partial_derivative(dgv, a), 2), lead);
      err = std::max(err, oracle::max_rel_err(lead, oracle::commutator(u, st.eta, gamma)));
    }
    rep.checks.push_back({"commutator", err});
  }
  // One implicit Euler step against a dense per-mode solve with the oracle
  // nonlinearity on the right-hand side.
  {
    ModelParams params;
    params.kind = kind;
    params.form = ModelForm::perturbation;
    StepperConfig sc;
    sc.scheme = Scheme::imex_euler;
    sc.dt = dt;
    sc.t_end = dt;
    Stepper stepper(g, params, sc);
    State prod = stepper.integrate(st);

    const int dim = d + 1;
    double scale_ref = 0.0, dev = 0.0;
    for (size_t f = 0; f < g.size(); ++f) {
      auto kv = k_deriv_vec(g, f);
      ModeMatrix m = linear_mode_matrix(kv, d, kind);
      Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(dim, dim) - dt * m.to_eigen();
      Eigen::VectorXcd rhs(dim);
      for (int i = 0; i < d; ++i) rhs(i) = st.u.comp[i].c[f] + dt * n_orac.du.comp[i].c[f];
      rhs(d) = st.eta.c[f] + dt * n_orac.deta.c[f];
      Eigen::VectorXcd y = A.partialPivLu().solve(rhs);
      for (int i = 0; i < d; ++i) {
        scale_ref = std::max(scale_ref, std::abs(prod.u.comp[i].c[f]));
        dev = std::max(dev, std::abs(y(i) - prod.u.comp[i].c[f]));
      }
      scale_ref = std::max(scale_ref, std::abs(prod.eta.c[f]));
      dev = std::max(dev, std::abs(y(d) - prod.eta.c[f]));
    }
    rep.checks.push_back({"imex_step", scale_ref > 0.0 ? dev / scale_ref : dev});
  }
  return rep;
}

}  // namespace ttlab

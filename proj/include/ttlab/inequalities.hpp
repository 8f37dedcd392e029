#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ttlab/diagnostics.hpp"
#include "ttlab/errors.hpp"
#include "ttlab/field.hpp"
#include "ttlab/grid.hpp"
#include "ttlab/multiindex.hpp"

namespace ttlab {

// ----------------------------------------------------------------------------
// Trial-field generation.

enum class SpectrumShape { flat, power, gaussian };

struct Spectrum {
  SpectrumShape shape = SpectrumShape::flat;
  double param = 0.0;

  // Tags: "flat", "power:<a>" (|u_k| ~ |k|^a), "gaussian:<width>".
  static Spectrum parse(const std::string& tag) {
    Spectrum sp;
    auto colon = tag.find(':');
    std::string head = tag.substr(0, colon);
    if (head == "flat") {
      sp.shape = SpectrumShape::flat;
      return sp;
    }
    if (colon == std::string::npos)
      throw ConfigError("spectrum tag '" + tag + "' needs a parameter, e.g. power:-0.5");
    try {
      sp.param = std::stod(tag.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("spectrum tag '" + tag + "' has a malformed parameter");
    }
    if (head == "power") sp.shape = SpectrumShape::power;
    else if (head == "gaussian") sp.shape = SpectrumShape::gaussian;
    else throw ConfigError("unknown spectrum tag '" + head + "' (flat | power | gaussian)");
    if (sp.shape == SpectrumShape::gaussian && !(sp.param > 0.0))
      throw ConfigError("gaussian spectrum width must be positive");
    return sp;
  }

  std::string str() const {
    switch (shape) {
      case SpectrumShape::flat: return "flat";
      case SpectrumShape::power: return "power:" + std::to_string(param);
      default: return "gaussian:" + std::to_string(param);
    }
  }

  double amplitude(double kmag) const {
    switch (shape) {
      case SpectrumShape::flat: return 1.0;
      case SpectrumShape::power: return std::pow(kmag, param);
      default: return std::exp(-kmag * kmag / (2.0 * param * param));
    }
  }
};

struct TrialEnsemble {
  GridSpec grid;
  Spectrum spectrum;
  size_t count = 64;
  uint64_t seed = 1;
};

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline uint64_t trial_seed(uint64_t base, uint64_t index) {
  return splitmix64(base + index * 0x9E3779B97F4A7C15ULL);
}

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1p-53;
}

}  // namespace detail

// Real mean-zero field, band-limited to the dealias cutoff, with |u_k| set by
// the spectrum profile and independent uniform phases.  Draws are consumed in
// ascending flat-index order over the canonical half-lattice, so the result is
// bit-identical for equal (grid, spectrum, seed).
inline SpectralScalar random_band_limited(const GridSpec& g, const Spectrum& sp, uint64_t seed) {
  SpectralScalar f = SpectralScalar::zeros(g);
  std::mt19937_64 eng(seed);
  const int bl = g.band_limit();
  for (size_t idx = 0; idx < g.size(); ++idx) {
    auto j = unflatten(g, idx);
    std::array<int, 3> js{0, 0, 0};
    bool keep = true, canonical = false, nonzero = false;
    for (int a = 0; a < g.d && keep; ++a) {
      js[a] = g.signed_index(j[a]);
      if (std::abs(js[a]) > bl) keep = false;
      if (!nonzero && js[a] != 0) {
        nonzero = true;
        canonical = js[a] > 0;
      }
    }
    if (!keep || !nonzero || !canonical) continue;
    double theta = 2.0 * std::numbers::pi * detail::uniform01(eng);
    double amp = sp.amplitude(std::sqrt(k_mag_sq(g, idx)));
    Complex c = amp * Complex(std::cos(theta), std::sin(theta));
    f.c[idx] = c;
    std::array<int, 3> jm{0, 0, 0};
    for (int a = 0; a < g.d; ++a) jm[a] = js[a] == 0 ? 0 : (g.n - j[a]);
    f.c[flatten(g, jm)] = std::conj(c);
  }
  return f;
}

inline SpectralVector random_vector_band_limited(const GridSpec& g, const Spectrum& sp,
                                                 uint64_t seed) {
  SpectralVector u = SpectralVector::zeros(g);
  for (int a = 0; a < g.d; ++a)
    u.comp[a] = random_band_limited(g, sp, detail::trial_seed(seed, 0x517CC1B7ULL + a));
  return u;
}

// ----------------------------------------------------------------------------
// Norm conventions for the checks.  L^2 derivative aggregates use the
// |k|-multiplier; sup and other L^p aggregates of order-k derivatives take the
// max over the d^k individual components on the collocation grid.

namespace detail {

inline double deriv_lp_max(const SpectralScalar& f, int k, double p) {
  if (k == 0) return std::isinf(p) ? linf_norm(f) : lp_norm(f, p);
  double m = 0.0;
  for (const auto& gamma : multi_indices(f.grid.d, k)) {
    SpectralScalar df = apply_multi_derivative(f, gamma);
    m = std::max(m, std::isinf(p) ? linf_norm(df) : lp_norm(df, p));
  }
  return m;
}

inline double deriv_sup(const SpectralScalar& f, int k) {
  return deriv_lp_max(f, k, std::numeric_limits<double>::infinity());
}

inline double lambda_l2(const SpectralScalar& f, double s) { return std::sqrt(hdot_norm_sq(f, s)); }

// Inhomogeneous fractional Sobolev surrogate: L^2 plus the homogeneous part.
inline double hs_norm(const SpectralScalar& f, double sigma) {
  if (sigma <= 0.0) return l2_norm(f);
  double a = l2_norm_sq(f);
  return std::sqrt(a + hdot_norm_sq(f, sigma));
}

inline double root_sum_sq(std::initializer_list<double> xs) {
  double s = 0.0;
  for (double x : xs) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

// Sharp interpolation of homogeneous norms: ratio of ||u||_{H^s} against
// ||u||_{H^s1}^{(s2-s)/(s2-s1)} ||u||_{H^s2}^{(s-s1)/(s2-s1)}.  Holds with
// constant one, so callers may assert ratio <= 1 up to roundoff.
inline double check_interpolation(const SpectralScalar& u, double s1, double s, double s2) {
  if (!(s1 < s && s < s2))
    throw ConfigError("interpolation exponents must satisfy s1 < s < s2");
  double lhs = detail::lambda_l2(u, s);
  double a = detail::lambda_l2(u, s1);
  double b = detail::lambda_l2(u, s2);
  double th = (s2 - s) / (s2 - s1);
  double rhs = std::pow(a, th) * std::pow(b, 1.0 - th);
  if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

struct InequalityReport {
  std::string name;
  std::string params;
  size_t count = 0;
  double max_ratio = 0.0;
  double max_ratio_half = 0.0;  // sup over the first half of the ensemble
  uint64_t argmax_seed = 0;
  double box_length = 0.0;
  bool exact_constant = false;  // constant-1 items assert max_ratio <= 1 + 1e-9
  bool stable = true;           // sup moved < 10% when the ensemble doubled
};

namespace detail {

struct InequalityItem {
  std::string name;
  std::string params;
  bool exact_constant = false;
  std::function<double(uint64_t)> ratio;
};

inline InequalityReport run_item(const TrialEnsemble& ens, const InequalityItem& item) {
  InequalityReport rep;
  rep.name = item.name;
  rep.params = item.params;
  rep.count = ens.count;
  rep.box_length = ens.grid.L;
  rep.exact_constant = item.exact_constant;
  const uint64_t stream = splitmix64(ens.seed ^ fnv1a(item.name + "|" + item.params));
  for (size_t t = 0; t < 2 * ens.count; ++t) {
    uint64_t ts = trial_seed(stream, t);
    double r = item.ratio(ts);
    if (t < ens.count && r > rep.max_ratio_half) rep.max_ratio_half = r;
    if (r > rep.max_ratio) {
      rep.max_ratio = r;
      rep.argmax_seed = ts;
    }
  }
  rep.stable = rep.max_ratio <= 1.10 * rep.max_ratio_half;
  return rep;
}

// The verification matrix at its pinned instantiations.  Trial fields are
// drawn from an item-tagged stream so dropping one item never reshuffles
// another's ensemble.  All lambdas capture by value: items may outlive this
// builder's locals.
inline std::vector<InequalityItem> build_items(const TrialEnsemble& ens) {
  const GridSpec g = ens.grid;
  const int d = g.d;
  const Spectrum sp = ens.spectrum;
  std::vector<InequalityItem> out;

  // (i) Agmon-type: ||d^k u||_inf against interpolated homogeneous norms.
  for (auto inst : {std::array<double, 3>{0, 0, 2}, std::array<double, 3>{1, 0, 3}}) {
    int ki = static_cast<int>(inst[0]);
    double s1 = inst[1], s2 = inst[2];
    double mid = ki + 0.5 * d;
    if (!(s1 < mid && mid < s2)) continue;
    std::string params =
        "k=" + std::to_string(ki) + " s1=" + std::to_string(s1) + " s2=" + std::to_string(s2);
    out.push_back({"big_i", params, false, [g, sp, ki, s1, s2, mid](uint64_t ts) {
                     SpectralScalar u = random_band_limited(g, sp, ts);
                     double th = (s2 - mid) / (s2 - s1);
                     double rhs = std::pow(detail::lambda_l2(u, s1), th) *
                                  std::pow(detail::lambda_l2(u, s2), 1.0 - th);
                     return detail::deriv_sup(u, ki) / rhs;
                   }});
  }

  // (ii) Interpolation, constant exactly one.
  for (auto inst : {std::array<double, 3>{0, 1, 2}, std::array<double, 3>{-0.5, 0.5, 2},
                    std::array<double, 3>{1, 2, 3}}) {
    double s1 = inst[0], s = inst[1], s2 = inst[2];
    std::string params =
        "s1=" + std::to_string(s1) + " s=" + std::to_string(s) + " s2=" + std::to_string(s2);
    out.push_back({"big_ii", params, true, [g, sp, s1, s, s2](uint64_t ts) {
                     SpectralScalar u = random_band_limited(g, sp, ts);
                     return check_interpolation(u, s1, s, s2);
                   }});
  }

  // (iii) Product estimate in homogeneous norms.
  for (double s : {1.0, 1.5, 3.0}) {
    out.push_back({"big_iii", "s=" + std::to_string(s), false, [g, sp, s](uint64_t ts) {
                     SpectralScalar u = random_band_limited(g, sp, ts);
                     SpectralScalar v = random_band_limited(g, sp, detail::splitmix64(ts));
                     SpectralScalar uv = pointwise_product(u, v, 2);
                     double rhs = linf_norm(u) * detail::lambda_l2(v, s) +
                                  linf_norm(v) * detail::lambda_l2(u, s);
                     return detail::lambda_l2(uv, s) / rhs;
                   }});
  }

  // (iv) Commutator estimate at the Hoelder pairings used downstream.
  //      LHS: max over |gamma| = k of ||d^gamma(u.grad v) - u.grad d^gamma v||_p.
  struct IvCase {
    int k;
    double p, p1, q1, p2, q2;  // infinity encoded as INFINITY
  };
  const double inf = std::numeric_limits<double>::infinity();
  for (const IvCase c : {IvCase{2, 2, inf, 2, inf, 2},
                         IvCase{2, 2, 2.0 * d, 2.0 * d / (d - 1.0), inf, 2},
                         IvCase{3, 2, inf, 2, inf, 2},
                         IvCase{2, 2.0 * d, inf, 2.0 * d, inf, 2.0 * d}}) {
    std::string params = "k=" + std::to_string(c.k) + " p=" + std::to_string(c.p) +
                         " p1=" + std::to_string(c.p1) + " q1=" + std::to_string(c.q1) +
                         " p2=" + std::to_string(c.p2) + " q2=" + std::to_string(c.q2);
    out.push_back({"big_iv", params, false, [g, sp, d, c](uint64_t ts) {
      SpectralVector u = random_vector_band_limited(g, sp, ts);
      SpectralScalar v = random_band_limited(g, sp, detail::splitmix64(ts ^ 0xABCDULL));
      SpectralScalar udv = SpectralScalar::zeros(g);
      for (int a = 0; a < d; ++a) {
        SpectralScalar dv = partial_derivative(v, a);
        SpectralScalar p = pointwise_product(u.comp[a], dv, 2);
        axpy(1.0, p, udv);
      }
      double lhs = 0.0;
      for (const auto& gamma : multi_indices(d, c.k)) {
        SpectralScalar t1 = apply_multi_derivative(udv, gamma);
        SpectralScalar dgv = apply_multi_derivative(v, gamma);
        for (int a = 0; a < d; ++a) {
          SpectralScalar ddgv = partial_derivative(dgv, a);
          SpectralScalar p = pointwise_product(u.comp[a], ddgv, 2);
          axpy(-1.0, p, t1);
        }
        lhs = std::max(lhs, std::isinf(c.p) ? linf_norm(t1) : lp_norm(t1, c.p));
      }
      double grad_u = 0.0;
      for (int i = 0; i < d; ++i)
        for (int a = 0; a < d; ++a) {
          SpectralScalar dui = partial_derivative(u.comp[i], a);
          grad_u = std::max(grad_u, std::isinf(c.p1) ? linf_norm(dui) : lp_norm(dui, c.p1));
        }
      double dkv = c.q1 == 2 ? detail::lambda_l2(v, c.k) : detail::deriv_lp_max(v, c.k, c.q1);
      double grad_v = 0.0;
      for (int a = 0; a < d; ++a) {
        SpectralScalar dv = partial_derivative(v, a);
        grad_v = std::max(grad_v, std::isinf(c.p2) ? linf_norm(dv) : lp_norm(dv, c.p2));
      }
      double dku = 0.0;
      for (int i = 0; i < d; ++i) {
        double t = c.q2 == 2 ? detail::lambda_l2(u.comp[i], c.k)
                             : detail::deriv_lp_max(u.comp[i], c.k, c.q2);
        dku = std::max(dku, t);
      }
      return lhs / (grad_u * dkv + grad_v * dku);
    }});
  }

  // (v) Negative-order smoothing into higher integrability.
  {
    double s = d == 2 ? 0.5 : 1.0;
    double p = 2.0;
    double q = 1.0 / (1.0 / p - s / d);
    std::string params =
        "s=" + std::to_string(s) + " p=" + std::to_string(p) + " q=" + std::to_string(q);
    out.push_back({"big_v", params, false, [g, sp, s, p, q](uint64_t ts) {
                     SpectralScalar u = random_band_limited(g, sp, ts);
                     SpectralScalar lu = apply_lambda(u, -s);
                     return lp_norm(lu, q) / lp_norm(u, p);
                   }});
  }

  // (vi) Critical Sobolev embedding.
  for (double s : d == 2 ? std::vector<double>{1.0, 0.5} : std::vector<double>{1.0, 0.75}) {
    out.push_back({"big_vi", "s=" + std::to_string(s), false, [g, sp, d, s](uint64_t ts) {
                     SpectralScalar u = random_band_limited(g, sp, ts);
                     return lp_norm(u, d / s) / detail::lambda_l2(u, 0.5 * d - s);
                   }});
  }

  // Auxiliary items.
  {  // (i) k = 2
    const int k = 2;
    const double sg = (d - 2.0) * (k + 1.0) / (2.0 * (k - 1.0));
    out.push_back({"aux_i", "k=2", false, [g, sp, k, sg](uint64_t ts) {
      SpectralScalar u = random_band_limited(g, sp, ts);
      SpectralScalar v = random_band_limited(g, sp, detail::splitmix64(ts ^ 0x1ULL));
      SpectralScalar w = random_band_limited(g, sp, detail::splitmix64(ts ^ 0x2ULL));
      double lhs = detail::deriv_sup(u, 1) * detail::lambda_l2(v, k) * detail::lambda_l2(w, k);
      double hi = detail::root_sum_sq({detail::lambda_l2(u, k + 1), detail::lambda_l2(v, k + 1),
                                       detail::lambda_l2(w, k + 1)});
      double rhs =
          (detail::hs_norm(u, sg) + detail::root_sum_sq({l2_norm(v), l2_norm(w)})) * hi * hi;
      return lhs / rhs;
    }});
  }
  for (int k : {1, 2}) {  // (ii)
    const double sg = (d - 2.0) * (k + 1.0) / (2.0 * k);
    out.push_back({"aux_ii", "k=" + std::to_string(k), false, [g, sp, k, sg](uint64_t ts) {
      SpectralScalar u = random_band_limited(g, sp, ts);
      SpectralScalar v = random_band_limited(g, sp, detail::splitmix64(ts ^ 0x3ULL));
      double lhs = linf_norm(u) * detail::lambda_l2(v, k);
      double hi = detail::root_sum_sq({detail::lambda_l2(u, k + 1), detail::lambda_l2(v, k + 1)});
      return lhs / ((detail::hs_norm(u, sg) + l2_norm(v)) * hi);
    }});
  }
  {  // (iii) k = 1
    const int k = 1;
    const double sg = (d - 2.0) * (k + 2.0) / (2.0 * k);
    out.push_back({"aux_iii", "k=1", false, [g, sp, k, sg](uint64_t ts) {
      SpectralScalar u = random_band_limited(g, sp, ts);
      SpectralScalar v = random_band_limited(g, sp, detail::splitmix64(ts ^ 0x4ULL));
      double lhs = detail::deriv_sup(u, 1) * detail::lambda_l2(v, k);
      double hi = detail::root_sum_sq({detail::lambda_l2(u, k + 2), detail::lambda_l2(v, k + 2)});
      return lhs / ((detail::hs_norm(u, sg) + l2_norm(v)) * hi);
    }});
  }
  for (int k : {2, 3}) {  // (iv) with the slow-branch exponent
    const double beta = beta_exponent(d, k);
    out.push_back({"aux_iv", "k=" + std::to_string(k) + " beta=" + std::to_string(beta), false,
                   [g, sp, k, beta](uint64_t ts) {
      SpectralScalar u = random_band_limited(g, sp, ts);
      SpectralScalar v = random_band_limited(g, sp, detail::splitmix64(ts ^ 0x5ULL));
      double lk = detail::lambda_l2(v, k);
      double lhs = linf_norm(u) * lk * lk;
      double low = detail::root_sum_sq({detail::lambda_l2(u, beta), detail::lambda_l2(v, beta)});
      double ku = detail::lambda_l2(u, k);
      double kv1 = detail::lambda_l2(v, k + 1);
      return lhs / (low * (ku * ku + kv1 * kv1));
    }});
  }
  {  // (v) k = 2
    const int k = 2;
    out.push_back({"aux_v", "k=2", false, [g, sp, d, k](uint64_t ts) {
      SpectralScalar u = random_band_limited(g, sp, ts);
      SpectralScalar v = random_band_limited(g, sp, detail::splitmix64(ts ^ 0x6ULL));
      double lk = detail::lambda_l2(v, k);
      double lhs = detail::deriv_lp_max(u, 2, 2.0 * d) * lk * lk;
      double h3 =
          detail::root_sum_sq({std::sqrt(hm_norm_sq(u, 3)), std::sqrt(hm_norm_sq(v, 3))});
      double ku1 = detail::lambda_l2(u, k + 1);
      double kv1 = detail::lambda_l2(v, k + 1);
      return lhs / (h3 * (ku1 * ku1 + kv1 * kv1));
    }});
  }
  if (d == 3) {  // (vi) three-dimensional only
    out.push_back({"aux_vi", "d=3", false, [g, sp](uint64_t ts) {
      SpectralScalar u = random_band_limited(g, sp, ts);
      SpectralScalar v = random_band_limited(g, sp, detail::splitmix64(ts ^ 0x7ULL));
      SpectralScalar w = random_band_limited(g, sp, detail::splitmix64(ts ^ 0x8ULL));
      double lhs = detail::deriv_sup(u, 1) * detail::lambda_l2(v, 2) * detail::lambda_l2(w, 2);
      double h1 = detail::root_sum_sq({std::sqrt(hm_norm_sq(u, 1)), std::sqrt(hm_norm_sq(v, 1)),
                                       std::sqrt(hm_norm_sq(w, 1))});
      double hi = detail::root_sum_sq(
          {detail::lambda_l2(u, 3), detail::lambda_l2(v, 3), detail::lambda_l2(w, 3)});
      return lhs / (h1 * hi * hi);
    }});
  }
  return out;
}

}  // namespace detail

// Run the whole matrix, or the named subset.  Unknown names and items whose
// preconditions the grid cannot meet (aux item (vi) needs d = 3) raise
// ConfigError when requested explicitly.
inline std::vector<InequalityReport> run_inequality_suite(
    const TrialEnsemble& ens, const std::vector<std::string>& names = {}) {
  auto items = detail::build_items(ens);
  std::vector<InequalityReport> out;
  if (names.empty()) {
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(detail::run_item(ens, item));
    return out;
  }
  for (const auto& name : names) {
    if (name == "aux_vi" && ens.grid.d != 3)
      throw ConfigError("inequality item aux_vi is defined for d = 3 only");
    bool found = false;
    for (const auto& item : items)
      if (item.name == name) {
        out.push_back(detail::run_item(ens, item));
        found = true;
      }
    if (!found) throw ConfigError("unknown inequality item '" + name + "'");
  }
  return out;
}

}  // namespace ttlab

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "ttlab/errors.hpp"

namespace ttlab {

enum class Dealias { none, two_thirds, one_half };

// Uniform periodic box [0,L)^d sampled with n points per axis.
//
// Mode bookkeeping: the flat coefficient array stores FFT order per axis,
// index j in [0,n) holding the signed mode j for j < n/2 and j-n otherwise.
// Two wavenumber readings coexist:
//   * k_deriv: used by differential operators; the unpaired Nyquist mode
//     j = n/2 maps to 0 so odd derivatives of real fields stay real.
//   * k_mag:   used by |k|^s multipliers and norm weights; Nyquist keeps its
//     magnitude (2pi/L)(n/2).
// All test and production fields are kept band-limited below Nyquist, where
// the two readings agree.
struct GridSpec {
    int d = 2;
    int n = 0;
    double L = 0.0;
    Dealias dealias = Dealias::one_half;

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n);
        return s;
    }
    double dk() const { return 2.0 * std::numbers::pi / L; }
    double dx() const { return L / n; }
    double volume() const { return std::pow(L, d); }
    double cell_volume() const { return std::pow(L / n, d); }

    int signed_index(int j) const { return j < n - n / 2 ? j : j - n; }
    double k_deriv(int j) const {
        int js = signed_index(j);
        return js == -n / 2 ? 0.0 : dk() * js;
    }
    double k_mag(int j) const { return dk() * signed_index(j); }

    // Largest per-axis |signed mode| that generated data may occupy.
    int band_limit() const {
        switch (dealias) {
            case Dealias::two_thirds: return n / 3;
            default: return n / 2 - 1;
        }
    }
    // Points per axis of the zero-padded grid products are evaluated on.
    int padded_n() const {
        switch (dealias) {
            case Dealias::none: return n;
            case Dealias::two_thirds: return (3 * n) / 2;
            case Dealias::one_half: return 2 * n;
        }
        return n;
    }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.d == b.d && a.n == b.n && a.L == b.L && a.dealias == b.dealias;
    }
};

inline GridSpec make_grid(int d, int n, double L, Dealias dealias) {
    if (d != 2 && d != 3) throw BadDimension("grid: d must be 2 or 3");
    if (n < 8 || n % 2 != 0) throw BadResolution("grid: n must be even and >= 8");
    if (!(L > 0.0) || !std::isfinite(L)) throw BadLength("grid: L must be positive and finite");
    return GridSpec{d, n, L, dealias};
}

// Decompose a flat index into per-axis indices (last axis fastest).
inline std::array<int, 3> unflatten(const GridSpec& g, std::size_t idx) {
    std::array<int, 3> j{0, 0, 0};
    for (int a = g.d - 1; a >= 0; --a) {
        j[a] = static_cast<int>(idx % g.n);
        idx /= g.n;
    }
    return j;
}

inline std::size_t flatten(const GridSpec& g, const std::array<int, 3>& j) {
    std::size_t idx = 0;
    for (int a = 0; a < g.d; ++a) idx = idx * g.n + static_cast<std::size_t>(j[a]);
    return idx;
}

// Squared |k| of a flat mode index (magnitude reading, Nyquist included).
inline double k_mag_sq(const GridSpec& g, std::size_t idx) {
    auto j = unflatten(g, idx);
    double s = 0.0;
    for (int a = 0; a < g.d; ++a) {
        double k = g.k_mag(j[a]);
        s += k * k;
    }
    return s;
}

// Derivative-reading wavevector of a flat mode index.
inline std::array<double, 3> k_deriv_vec(const GridSpec& g, std::size_t idx) {
    auto j = unflatten(g, idx);
    std::array<double, 3> k{0.0, 0.0, 0.0};
    for (int a = 0; a < g.d; ++a) k[a] = g.k_deriv(j[a]);
    return k;
}

} // namespace ttlab

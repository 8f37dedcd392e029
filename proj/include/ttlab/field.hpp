#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "ttlab/errors.hpp"
#include "ttlab/fft.hpp"
#include "ttlab/grid.hpp"

namespace ttlab {

// A real scalar field stored as the full complex coefficient array of its
// trigonometric interpolant, zero mode = spatial mean.
struct SpectralScalar {
    GridSpec grid;
    CVec c;

    static SpectralScalar zeros(const GridSpec& g) {
        SpectralScalar f;
        f.grid = g;
        f.c.assign(g.size(), Complex{0.0, 0.0});
        return f;
    }
};

struct SpectralVector {
    GridSpec grid;
    std::vector<SpectralScalar> comp;

    static SpectralVector zeros(const GridSpec& g) {
        SpectralVector v;
        v.grid = g;
        v.comp.assign(g.d, SpectralScalar::zeros(g));
        return v;
    }
    SpectralScalar& operator[](int i) { return comp[static_cast<std::size_t>(i)]; }
    const SpectralScalar& operator[](int i) const { return comp[static_cast<std::size_t>(i)]; }
};

namespace detail {

// Scratch buffers for padded-grid work, reused across calls.
inline CVec& scratch(int slot, std::size_t size) {
    static CVec bufs[4];
    if (bufs[slot].size() < size) bufs[slot].assign(size, Complex{0.0, 0.0});
    return bufs[slot];
}

inline std::vector<int> base_dims(const GridSpec& g) {
    return std::vector<int>(static_cast<std::size_t>(g.d), g.n);
}

inline std::vector<int> padded_dims(const GridSpec& g) {
    return std::vector<int>(static_cast<std::size_t>(g.d), g.padded_n());
}

inline std::size_t dims_total(const std::vector<int>& dims) {
    std::size_t t = 1;
    for (int m : dims) t *= static_cast<std::size_t>(m);
    return t;
}

// Scatter base-grid coefficients into a (zeroed) padded coefficient array.
inline void pad_scatter(const SpectralScalar& f, Complex* padded) {
    const GridSpec& g = f.grid;
    const int M = g.padded_n();
    const std::size_t total = g.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (f.c[idx] == Complex{0.0, 0.0}) continue;
        auto j = unflatten(g, idx);
        std::size_t pidx = 0;
        for (int a = 0; a < g.d; ++a) {
            int js = g.signed_index(j[a]);
            int pj = js >= 0 ? js : M + js;
            pidx = pidx * static_cast<std::size_t>(M) + static_cast<std::size_t>(pj);
        }
        padded[pidx] = f.c[idx];
    }
}

// Gather a padded coefficient array back onto the base grid, zeroing modes
// beyond the dealias band so generated fields stay band-limited.  The padded
// policies keep strictly below the base Nyquist pair, and without padding the
// transfer is the identity, so every surviving mode maps to a single padded
// slot.
inline void pad_gather(const GridSpec& g, const Complex* padded, SpectralScalar& out) {
    const int M = g.padded_n();
    const std::size_t total = g.size();
    const int bl = g.dealias == Dealias::none ? g.n / 2 : g.band_limit();
    for (std::size_t idx = 0; idx < total; ++idx) {
        auto j = unflatten(g, idx);
        bool outside = false;
        std::size_t pidx = 0;
        for (int a = 0; a < g.d; ++a) {
            int js = g.signed_index(j[a]);
            if (std::abs(js) > bl) outside = true;
            int pj = js >= 0 ? js : M + js;
            pidx = pidx * static_cast<std::size_t>(M) + static_cast<std::size_t>(pj);
        }
        out.c[idx] = outside ? Complex{0.0, 0.0} : padded[pidx];
    }
}

} // namespace detail

inline SpectralScalar transform_forward(const GridSpec& g, const std::vector<double>& samples) {
    if (samples.size() != g.size()) throw GridMismatch("transform_forward: sample count != n^d");
    for (double v : samples)
        if (!std::isfinite(v)) throw NonFiniteField("transform_forward: non-finite sample");
    CVec& in = detail::scratch(0, g.size());
    for (std::size_t i = 0; i < samples.size(); ++i) in[i] = Complex{samples[i], 0.0};
    SpectralScalar f = SpectralScalar::zeros(g);
    fft_analysis(detail::base_dims(g), in.data(), f.c.data());
    return f;
}

// Complex collocation samples on the base grid.
inline CVec physical_samples(const SpectralScalar& f) {
    CVec out(f.grid.size());
    fft_synthesis(detail::base_dims(f.grid), f.c.data(), out.data());
    return out;
}

inline std::vector<double> transform_inverse(const SpectralScalar& f) {
    CVec s = physical_samples(f);
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i].real();
    return out;
}

inline SpectralScalar partial_derivative(const SpectralScalar& f, int axis) {
    const GridSpec& g = f.grid;
    if (axis < 0 || axis >= g.d) throw BadAxis("partial_derivative: axis out of range");
    SpectralScalar out = SpectralScalar::zeros(g);
    const std::size_t total = g.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        auto j = unflatten(g, idx);
        double k = g.k_deriv(j[axis]);
        out.c[idx] = Complex{0.0, k} * f.c[idx];
    }
    return out;
}

inline SpectralScalar divergence(const SpectralVector& v) {
    SpectralScalar out = SpectralScalar::zeros(v.grid);
    for (int a = 0; a < v.grid.d; ++a) {
        SpectralScalar da = partial_derivative(v[a], a);
        for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] += da.c[i];
    }
    return out;
}

inline SpectralVector gradient(const SpectralScalar& f) {
    SpectralVector out = SpectralVector::zeros(f.grid);
    for (int a = 0; a < f.grid.d; ++a) out[a] = partial_derivative(f, a);
    return out;
}

inline double l2_norm_sq(const SpectralScalar& f) {
    double s = 0.0;
    for (const Complex& z : f.c) s += std::norm(z);
    return s * f.grid.volume();
}

inline double l2_norm(const SpectralScalar& f) { return std::sqrt(l2_norm_sq(f)); }

// |k|^s Fourier multiplier. Zero mode: annihilated for s > 0, left for the
// caller to have zeroed for s < 0 (negative orders are only defined on
// mean-zero fields; the norm is taken modulo constants).
inline SpectralScalar apply_lambda(const SpectralScalar& f, double s) {
    const GridSpec& g = f.grid;
    SpectralScalar out = f;
    if (s == 0.0) return out;
    if (s < 0.0) {
        double c0 = std::abs(f.c[0]);
        if (c0 > 1e-13 * l2_norm(f))
            throw NegativeOrderOnNonzeroMean("apply_lambda: negative order on field with nonzero mean");
        out.c[0] = Complex{0.0, 0.0};
    } else {
        out.c[0] = Complex{0.0, 0.0};
    }
    const std::size_t total = g.size();
    for (std::size_t idx = 1; idx < total; ++idx) {
        double k2 = k_mag_sq(g, idx);
        out.c[idx] *= std::pow(k2, 0.5 * s);
    }
    return out;
}

inline double inner_product_l2(const SpectralScalar& f, const SpectralScalar& h) {
    if (!(f.grid == h.grid)) throw GridMismatch("inner_product_l2: grids differ");
    double s = 0.0;
    for (std::size_t i = 0; i < f.c.size(); ++i)
        s += f.c[i].real() * h.c[i].real() + f.c[i].imag() * h.c[i].imag();
    return s * f.grid.volume();
}

// Dealiased product. Factors are synthesized on the grid's padded resolution,
// multiplied pointwise, and truncated back; with the one-half rule (2x
// padding) this is exact through cubic nonlinearities of band-limited fields.
inline SpectralScalar pointwise_product(const SpectralScalar& f, const SpectralScalar& h, int degree) {
    if (!(f.grid == h.grid)) throw GridMismatch("pointwise_product: grids differ");
    if (degree < 2) throw Error("pointwise_product: degree must be >= 2");
    const GridSpec& g = f.grid;
    auto pdims = detail::padded_dims(g);
    std::size_t pt = detail::dims_total(pdims);
    CVec& spec = detail::scratch(0, pt);
    CVec& pf = detail::scratch(1, pt);
    CVec& ph = detail::scratch(2, pt);
    std::fill(spec.begin(), spec.begin() + pt, Complex{0.0, 0.0});
    detail::pad_scatter(f, spec.data());
    fft_synthesis(pdims, spec.data(), pf.data());
    std::fill(spec.begin(), spec.begin() + pt, Complex{0.0, 0.0});
    detail::pad_scatter(h, spec.data());
    fft_synthesis(pdims, spec.data(), ph.data());
    for (std::size_t i = 0; i < pt; ++i) pf[i] *= ph[i];
    fft_analysis(pdims, pf.data(), spec.data());
    SpectralScalar out = SpectralScalar::zeros(g);
    detail::pad_gather(g, spec.data(), out);
    return out;
}

inline SpectralScalar pointwise_product(const SpectralScalar& f, const SpectralScalar& h,
                                        const SpectralScalar& w, int degree) {
    if (!(f.grid == h.grid) || !(f.grid == w.grid))
        throw GridMismatch("pointwise_product: grids differ");
    if (degree < 3) throw Error("pointwise_product: triple product needs degree >= 3");
    const GridSpec& g = f.grid;
    auto pdims = detail::padded_dims(g);
    std::size_t pt = detail::dims_total(pdims);
    CVec& spec = detail::scratch(0, pt);
    CVec& acc = detail::scratch(1, pt);
    CVec& tmp = detail::scratch(2, pt);
    std::fill(spec.begin(), spec.begin() + pt, Complex{0.0, 0.0});
    detail::pad_scatter(f, spec.data());
    fft_synthesis(pdims, spec.data(), acc.data());
    for (const SpectralScalar* fac : {&h, &w}) {
        std::fill(spec.begin(), spec.begin() + pt, Complex{0.0, 0.0});
        detail::pad_scatter(*fac, spec.data());
        fft_synthesis(pdims, spec.data(), tmp.data());
        for (std::size_t i = 0; i < pt; ++i) acc[i] *= tmp[i];
    }
    fft_analysis(pdims, acc.data(), spec.data());
    SpectralScalar out = SpectralScalar::zeros(g);
    detail::pad_gather(g, spec.data(), out);
    return out;
}

// Collocation quadrature norms on the base grid.
inline double lp_norm(const SpectralScalar& f, double p) {
    CVec s = physical_samples(f);
    double cell = f.grid.cell_volume();
    double acc = 0.0;
    for (const Complex& z : s) acc += std::pow(std::abs(z), p);
    return std::pow(acc * cell, 1.0 / p);
}

inline double linf_norm(const SpectralScalar& f) {
    CVec s = physical_samples(f);
    double m = 0.0;
    for (const Complex& z : s) m = std::max(m, std::abs(z));
    return m;
}

inline double mean(const SpectralScalar& f) { return f.c[0].real(); }

// Largest |c(k) - conj(c(-k))| over all modes, scaled by max|c|.
inline double hermitian_deviation(const SpectralScalar& f) {
    const GridSpec& g = f.grid;
    double dev = 0.0, scale = 0.0;
    const std::size_t total = g.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        scale = std::max(scale, std::abs(f.c[idx]));
        auto j = unflatten(g, idx);
        std::array<int, 3> jc{0, 0, 0};
        for (int a = 0; a < g.d; ++a) jc[a] = (g.n - j[a]) % g.n;
        std::size_t cidx = flatten(g, jc);
        dev = std::max(dev, std::abs(f.c[idx] - std::conj(f.c[cidx])));
    }
    return scale > 0.0 ? dev / scale : 0.0;
}

inline bool is_real_field(const SpectralScalar& f, double tol = 1e-12) {
    return hermitian_deviation(f) <= tol;
}

// Zero every mode with any axis index beyond jmax (in absolute signed value).
inline void band_limit(SpectralScalar& f, int jmax) {
    const GridSpec& g = f.grid;
    const std::size_t total = g.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        auto j = unflatten(g, idx);
        for (int a = 0; a < g.d; ++a)
            if (std::abs(g.signed_index(j[a])) > jmax) {
                f.c[idx] = Complex{0.0, 0.0};
                break;
            }
    }
}

// Small arithmetic helpers used by the model assembly.
inline void axpy(double a, const SpectralScalar& x, SpectralScalar& y) {
    for (std::size_t i = 0; i < y.c.size(); ++i) y.c[i] += a * x.c[i];
}

inline void scale(SpectralScalar& f, double a) {
    for (Complex& z : f.c) z *= a;
}

inline void scale(SpectralVector& v, double a) {
    for (auto& comp : v.comp) scale(comp, a);
}

} // namespace ttlab

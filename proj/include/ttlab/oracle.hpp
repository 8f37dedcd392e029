#pragma once

// Brute-force reference implementations used to cross-check the FFT-based
// production paths on small grids: dense Fourier-space convolution computed
// by direct summation on a twice-refined virtual mode lattice (exact through
// cubic products of band-limited fields), and commutators assembled from it.
// Deliberately independent of the padded-FFT machinery in field.hpp.

#include <array>
#include <cstddef>
#include <vector>

#include "ttlab/field.hpp"
#include "ttlab/multiindex.hpp"

namespace ttlab::oracle {

namespace detail {

// Virtual lattice: per-axis indices in [0, 2n) holding signed modes
// [-n, n). Convolution supports through degree 3 fit without wrap.
inline std::size_t ext_size(const GridSpec& g) {
    std::size_t t = 1;
    for (int a = 0; a < g.d; ++a) t *= static_cast<std::size_t>(2 * g.n);
    return t;
}

inline std::size_t ext_index(const GridSpec& g, const std::array<int, 3>& s) {
    const int M = 2 * g.n;
    std::size_t idx = 0;
    for (int a = 0; a < g.d; ++a) {
        int m = ((s[a] % M) + M) % M;
        idx = idx * static_cast<std::size_t>(M) + static_cast<std::size_t>(m);
    }
    return idx;
}

inline std::array<int, 3> signed_modes(const GridSpec& g, std::size_t idx) {
    auto j = unflatten(g, idx);
    std::array<int, 3> s{0, 0, 0};
    for (int a = 0; a < g.d; ++a) s[a] = g.signed_index(j[a]);
    return s;
}

inline std::array<int, 3> ext_signed(const GridSpec& g, std::size_t idx) {
    const int M = 2 * g.n;
    std::array<int, 3> s{0, 0, 0};
    for (int a = g.d - 1; a >= 0; --a) {
        int m = static_cast<int>(idx % M);
        s[a] = m < M / 2 ? m : m - M;
        idx /= static_cast<std::size_t>(M);
    }
    return s;
}

// Convolution of two base-grid coefficient sets onto the virtual lattice.
inline std::vector<Complex> conv_ext(const SpectralScalar& f, const SpectralScalar& h) {
    const GridSpec& g = f.grid;
    std::vector<Complex> ext(ext_size(g), Complex{0.0, 0.0});
    const std::size_t total = g.size();
    for (std::size_t i = 0; i < total; ++i) {
        if (f.c[i] == Complex{0.0, 0.0}) continue;
        auto si = signed_modes(g, i);
        for (std::size_t j = 0; j < total; ++j) {
            if (h.c[j] == Complex{0.0, 0.0}) continue;
            auto sj = signed_modes(g, j);
            std::array<int, 3> s{si[0] + sj[0], si[1] + sj[1], si[2] + sj[2]};
            ext[ext_index(g, s)] += f.c[i] * h.c[j];
        }
    }
    return ext;
}

// Truncate a virtual-lattice coefficient set onto the base grid.  Dealiasing
// policies zero everything beyond their band, matching the production gather;
// without dealiasing the exact values are kept, with the +-n/2 pair folded
// into the unpaired Nyquist slot exactly as sampling would fold it.
inline SpectralScalar ext_truncate(const GridSpec& g, const std::vector<Complex>& ext) {
    SpectralScalar out = SpectralScalar::zeros(g);
    const std::size_t total = g.size();
    const int bl = g.dealias == Dealias::none ? g.n / 2 : g.band_limit();
    for (std::size_t idx = 0; idx < total; ++idx) {
        auto s = signed_modes(g, idx);
        bool outside = false;
        int nyq_axes[3];
        int nnyq = 0;
        for (int a = 0; a < g.d; ++a) {
            if (std::abs(s[a]) > bl) outside = true;
            if (s[a] == -g.n / 2) nyq_axes[nnyq++] = a;
        }
        if (outside) continue;
        Complex v{0.0, 0.0};
        for (int combo = 0; combo < (1 << nnyq); ++combo) {
            auto sc = s;
            for (int b = 0; b < nnyq; ++b)
                if (combo & (1 << b)) sc[nyq_axes[b]] = g.n / 2;
            v += ext[ext_index(g, sc)];
        }
        out.c[idx] = v;
    }
    return out;
}

} // namespace detail

// Exact truncated product of two fields by direct convolution.
inline SpectralScalar product(const SpectralScalar& f, const SpectralScalar& h) {
    return detail::ext_truncate(f.grid, detail::conv_ext(f, h));
}

// Exact truncated product of three fields: convolve two without truncation,
// then fold in the third.
inline SpectralScalar product(const SpectralScalar& f, const SpectralScalar& h,
                              const SpectralScalar& w) {
    const GridSpec& g = f.grid;
    std::vector<Complex> fh = detail::conv_ext(f, h);
    std::vector<Complex> ext(detail::ext_size(g), Complex{0.0, 0.0});
    const std::size_t et = ext.size();
    const std::size_t total = g.size();
    for (std::size_t i = 0; i < et; ++i) {
        if (fh[i] == Complex{0.0, 0.0}) continue;
        auto si = detail::ext_signed(g, i);
        for (std::size_t j = 0; j < total; ++j) {
            if (w.c[j] == Complex{0.0, 0.0}) continue;
            auto sj = detail::signed_modes(g, j);
            std::array<int, 3> s{si[0] + sj[0], si[1] + sj[1], si[2] + sj[2]};
            ext[detail::ext_index(g, s)] += fh[i] * w.c[j];
        }
    }
    return detail::ext_truncate(g, ext);
}

// u . grad v assembled from oracle products.
inline SpectralScalar advect(const SpectralVector& u, const SpectralScalar& v) {
    SpectralScalar out = SpectralScalar::zeros(v.grid);
    for (int a = 0; a < v.grid.d; ++a) {
        SpectralScalar t = product(u[a], partial_derivative(v, a));
        for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] += t.c[i];
    }
    return out;
}

// Nonlinear content of the nested transport (u + e).grad((u + e).grad u)
// along the constant direction axis e, i.e. everything except the second
// pure e-derivative of u.  The inner advection keeps its full virtual-lattice
// support before the outer convolution, and the outer sum wraps mod 2n, which
// is exactly what evaluating both passes on a twice-padded collocation grid
// does.  The pure-u outer derivative of the truncated inner advection is
// added on the base grid afterwards, matching the production split.
inline SpectralVector nested_transport_nonlinear(const SpectralVector& u, int e) {
    const GridSpec& g = u.grid;
    SpectralVector out = SpectralVector::zeros(g);
    const std::size_t et = detail::ext_size(g);
    const std::size_t total = g.size();
    for (int i = 0; i < g.d; ++i) {
        std::vector<Complex> ext_adv(et, Complex{0.0, 0.0});
        for (int j = 0; j < g.d; ++j) {
            std::vector<Complex> t = detail::conv_ext(u[j], partial_derivative(u[i], j));
            for (std::size_t q = 0; q < et; ++q) ext_adv[q] += t[q];
        }
        // w = inner advection + d_e u_i, the latter supported on the base grid
        std::vector<Complex> ext_w = ext_adv;
        SpectralScalar de_ui = partial_derivative(u[i], e);
        for (std::size_t q = 0; q < total; ++q) {
            if (de_ui.c[q] == Complex{0.0, 0.0}) continue;
            ext_w[detail::ext_index(g, detail::signed_modes(g, q))] += de_ui.c[q];
        }
        std::vector<Complex> ext_outer(et, Complex{0.0, 0.0});
        for (std::size_t q = 0; q < et; ++q) {
            if (ext_w[q] == Complex{0.0, 0.0}) continue;
            auto sw = detail::ext_signed(g, q);
            const double dk = g.dk();
            for (int j = 0; j < g.d; ++j) {
                Complex dwj = Complex{0.0, dk * sw[j]} * ext_w[q];
                if (dwj == Complex{0.0, 0.0}) continue;
                for (std::size_t p = 0; p < total; ++p) {
                    if (u[j].c[p] == Complex{0.0, 0.0}) continue;
                    auto sp = detail::signed_modes(g, p);
                    std::array<int, 3> s{sw[0] + sp[0], sw[1] + sp[1], sw[2] + sp[2]};
                    ext_outer[detail::ext_index(g, s)] += u[j].c[p] * dwj;
                }
            }
        }
        SpectralScalar t_i = detail::ext_truncate(g, ext_outer);
        SpectralScalar adv_base = detail::ext_truncate(g, ext_adv);
        SpectralScalar de_adv = partial_derivative(adv_base, e);
        for (std::size_t q = 0; q < total; ++q) out[i].c[q] = t_i.c[q] + de_adv.c[q];
    }
    return out;
}

// Commutator [d^gamma, u.grad] v = d^gamma(u.grad v) - u.grad d^gamma v,
// assembled entirely from oracle products.
inline SpectralScalar commutator(const SpectralVector& u, const SpectralScalar& v,
                                 const std::array<int, 3>& gamma) {
    SpectralScalar lead = apply_multi_derivative(advect(u, v), gamma);
    SpectralScalar trail = advect(u, apply_multi_derivative(v, gamma));
    for (std::size_t i = 0; i < lead.c.size(); ++i) lead.c[i] -= trail.c[i];
    return lead;
}

inline double max_rel_err(const SpectralScalar& a, const SpectralScalar& b) {
    double scale = 0.0;
    for (const Complex& z : b.c) scale = std::max(scale, std::abs(z));
    if (scale == 0.0)
        for (const Complex& z : a.c) scale = std::max(scale, std::abs(z));
    if (scale == 0.0) return 0.0;
    double dev = 0.0;
    for (std::size_t i = 0; i < a.c.size(); ++i) dev = std::max(dev, std::abs(a.c[i] - b.c[i]));
    return dev / scale;
}

} // namespace ttlab::oracle

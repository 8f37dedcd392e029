#pragma once

#include <array>
#include <vector>

#include "ttlab/field.hpp"

namespace ttlab {

// All multi-indices gamma with |gamma| = k over d axes.
inline std::vector<std::array<int, 3>> multi_indices(int d, int k) {
    std::vector<std::array<int, 3>> out;
    if (d == 2) {
        for (int a = 0; a <= k; ++a) out.push_back({a, k - a, 0});
    } else {
        for (int a = 0; a <= k; ++a)
            for (int b = 0; b <= k - a; ++b) out.push_back({a, b, k - a - b});
    }
    return out;
}

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// k!/gamma! for |gamma| = k.
inline double multinomial_weight(const std::array<int, 3>& gamma) {
    int k = gamma[0] + gamma[1] + gamma[2];
    return factorial(k) / (factorial(gamma[0]) * factorial(gamma[1]) * factorial(gamma[2]));
}

inline SpectralScalar apply_multi_derivative(const SpectralScalar& f, const std::array<int, 3>& gamma) {
    SpectralScalar out = f;
    for (int a = 0; a < f.grid.d; ++a)
        for (int r = 0; r < gamma[static_cast<std::size_t>(a)]; ++r) out = partial_derivative(out, a);
    return out;
}

} // namespace ttlab

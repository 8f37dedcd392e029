#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <vector>

#include <fftw3.h>

namespace ttlab {

// Allocator backed by fftw_malloc so every coefficient buffer carries the
// alignment FFTW planned for; required for the new-array execute interface.
template <class T>
struct FftwAllocator {
    using value_type = T;
    FftwAllocator() = default;
    template <class U>
    FftwAllocator(const FftwAllocator<U>&) {}
    T* allocate(std::size_t nmemb) {
        return static_cast<T*>(fftw_malloc(nmemb * sizeof(T)));
    }
    void deallocate(T* p, std::size_t) { fftw_free(p); }
    friend bool operator==(const FftwAllocator&, const FftwAllocator&) { return true; }
};

using Complex = std::complex<double>;
using CVec = std::vector<Complex, FftwAllocator<Complex>>;

// Cache of measured c2c plans keyed by (dims, sign). Plans are created once
// on scratch buffers and reused through fftw_execute_dft for the life of the
// process. Not thread-safe; all transforms run on one thread.
class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    void execute(const std::vector<int>& dims, int sign, const Complex* in, Complex* out) {
        fftw_plan p = get(dims, sign);
        // FFTW's API is non-const; the transform does not write to `in`.
        fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

  private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(const std::vector<int>& dims, int sign) {
        auto key = std::make_pair(dims, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::size_t total = 1;
        for (int m : dims) total *= static_cast<std::size_t>(m);
        CVec a(total), b(total);
        fftw_plan p = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(),
                                    reinterpret_cast<fftw_complex*>(a.data()),
                                    reinterpret_cast<fftw_complex*>(b.data()), sign,
                                    FFTW_MEASURE | FFTW_PRESERVE_INPUT);
        plans_.emplace(std::move(key), p);
        return p;
    }

    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

// Spectral -> physical, unnormalized synthesis sum f(x) = sum_k c_k e^{ikx}.
inline void fft_synthesis(const std::vector<int>& dims, const Complex* coeffs, Complex* samples) {
    PlanCache::instance().execute(dims, FFTW_BACKWARD, coeffs, samples);
}

// Physical -> spectral with 1/N normalization so the zero mode is the mean.
inline void fft_analysis(const std::vector<int>& dims, const Complex* samples, Complex* coeffs) {
    PlanCache::instance().execute(dims, FFTW_FORWARD, samples, coeffs);
    std::size_t total = 1;
    for (int m : dims) total *= static_cast<std::size_t>(m);
    double inv = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < total; ++i) coeffs[i] *= inv;
}

} // namespace ttlab

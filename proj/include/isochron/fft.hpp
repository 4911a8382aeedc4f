// Real-to-complex FFT wrapper over FFTW with per-thread plan caching.

#ifndef ISOCHRON_FFT_HPP
#define ISOCHRON_FFT_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>

#include <fftw3.h>

namespace isochron::detail {

// The FFTW planner is not thread-safe; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

/// Unnormalized real FFT of a fixed length. Owns aligned work buffers so that
/// plans are always executed on the arrays they were created for, which keeps
/// results bit-reproducible.
class RealFft {
public:
    explicit RealFft(std::size_t n)
        : n_(n)
    {
        real_ = fftw_alloc_real(n);
        spec_ = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard lock(fftw_planner_mutex());
        r2c_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec_, FFTW_ESTIMATE);
        c2r_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_, real_, FFTW_ESTIMATE);
    }

    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    ~RealFft()
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(r2c_);
        fftw_destroy_plan(c2r_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    std::size_t size() const { return n_; }

    // out[k] = sum_j in[j] e^{-2 pi i jk/n}, k = 0..n/2
    void forward(std::span<const double> in, std::span<std::complex<double>> out)
    {
        for (std::size_t j = 0; j < n_; ++j) real_[j] = in[j];
        fftw_execute(r2c_);
        for (std::size_t k = 0; k <= n_ / 2; ++k) out[k] = {spec_[k][0], spec_[k][1]};
    }

    // out[j] = sum_k in[k] e^{2 pi i jk/n} over the full Hermitian spectrum
    void inverse(std::span<const std::complex<double>> in, std::span<double> out)
    {
        for (std::size_t k = 0; k <= n_ / 2; ++k) {
            spec_[k][0] = in[k].real();
            spec_[k][1] = in[k].imag();
        }
        fftw_execute(c2r_);
        for (std::size_t j = 0; j < n_; ++j) out[j] = real_[j];
    }

private:
    std::size_t n_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan r2c_ = nullptr;
    fftw_plan c2r_ = nullptr;
};

inline RealFft& fft_for(std::size_t n)
{
    thread_local std::unordered_map<std::size_t, std::unique_ptr<RealFft>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<RealFft>(n);
    return *slot;
}

} // namespace isochron::detail

#endif

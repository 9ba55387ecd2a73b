#pragma once

#include <complex>
#include <cstring>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "ckdsim/duffing.hpp"
#include "ckdsim/grid.hpp"

namespace ckd {

// Thin RAII wrapper over a pair of FFTW plans for one transform length.
// Forward is the unnormalised DFT sum_j f_j e^{-2 pi i q j / M}; inverse
// divides by M so inverse(forward(f)) == f to rounding. Plan creation in
// FFTW is not thread safe, so it is serialised; each instance owns its
// buffers and must not be shared across threads concurrently.
class Fft {
  public:
    explicit Fft(std::size_t m) : m_(m) {
        if (!is_power_of_two(m_)) throw ConfigError("Fft: length must be a power of two");
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m_));
        if (!buf_) throw std::bad_alloc();
        std::lock_guard<std::mutex> lock(plan_mutex());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(m_), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(static_cast<int>(m_), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~Fft() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const { return m_; }

    void forward(std::vector<std::complex<double>>& a) const {
        run(a, fwd_, false);
    }
    void inverse(std::vector<std::complex<double>>& a) const {
        run(a, bwd_, true);
    }

  private:
    static std::mutex& plan_mutex() {
        static std::mutex mu;
        return mu;
    }

    void run(std::vector<std::complex<double>>& a, fftw_plan plan, bool scale) const {
        if (a.size() != m_) throw NumericalError("Fft: length mismatch");
        std::memcpy(static_cast<void*>(buf_), static_cast<const void*>(a.data()),
                    sizeof(fftw_complex) * m_);
        fftw_execute(plan);
        std::memcpy(static_cast<void*>(a.data()), static_cast<const void*>(buf_),
                    sizeof(fftw_complex) * m_);
        if (scale) {
            const double inv = 1.0 / static_cast<double>(m_);
            for (auto& v : a) v *= inv;
        }
    }

    std::size_t m_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

}  // namespace ckd

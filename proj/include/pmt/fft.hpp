#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

namespace pmt {

using cplx = std::complex<double>;

namespace detail {
// fftw planner calls are not reentrant.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// In-place complex DFT on a row-major array of dimensions dims (2 or 3 axes).
/// forward() uses exp(-i2pi q.r); backward() is the unnormalized inverse.
class FftPlan {
public:
    explicit FftPlan(std::vector<int> dims) : dims_(std::move(dims)) {
        std::size_t n = 1;
        for (int d : dims_) n *= static_cast<std::size_t>(d);
        data_.assign(n, cplx{});
        auto* buf = reinterpret_cast<fftw_complex*>(data_.data());
        std::lock_guard lock(detail::fftw_planner_mutex());
        const int rank = static_cast<int>(dims_.size());
        forward_ = fftw_plan_dft(rank, dims_.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft(rank, dims_.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }

    std::span<cplx> data() { return data_; }
    std::span<const cplx> data() const { return data_; }
    std::size_t size() const { return data_.size(); }

    void forward() { fftw_execute(forward_); }
    void backward() { fftw_execute(backward_); }

private:
    std::vector<int> dims_;
    std::vector<cplx> data_;
    fftw_plan forward_{};
    fftw_plan backward_{};
};

/// Spatial frequencies (cycles per unit length) of an n-point DFT with step dx,
/// in standard wrap-around order.
inline std::vector<double> fft_frequencies(std::size_t n, double dx) {
    std::vector<double> q(n);
    const double dq = 1.0 / (static_cast<double>(n) * dx);
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = static_cast<long long>(i);
        const auto half = static_cast<long long>((n - 1) / 2);
        q[i] = static_cast<double>(s <= half ? s : s - static_cast<long long>(n)) * dq;
    }
    return q;
}

}  // namespace pmt

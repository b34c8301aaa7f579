#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace ratesculpt::detail {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex());
    time_ = fftw_alloc_real(n_);
    freq_ = fftw_alloc_complex(bins());
    forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), time_, freq_, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), freq_, time_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_plan_);
    fftw_destroy_plan(inverse_plan_);
    fftw_free(time_);
    fftw_free(freq_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
    std::copy(in.begin(), in.end(), time_);
    fftw_execute(forward_plan_);
    for (std::size_t k = 0; k < bins(); ++k) out[k] = {freq_[k][0], freq_[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    for (std::size_t k = 0; k < bins(); ++k) {
        freq_[k][0] = in[k].real();
        freq_[k][1] = in[k].imag();
    }
    fftw_execute(inverse_plan_);
    std::copy(time_, time_ + n_, out.begin());
}

std::vector<double> magnitude_spectrum(std::span<const double> x) {
    std::size_t n = 1;
    while (n < x.size()) n <<= 1;
    std::vector<double> padded(n, 0.0);
    std::copy(x.begin(), x.end(), padded.begin());
    RealFft fft(n);
    std::vector<std::complex<double>> spec(fft.bins());
    fft.forward(padded, spec);
    std::vector<double> mag(spec.size());
    std::transform(spec.begin(), spec.end(), mag.begin(), [](auto c) { return std::abs(c); });
    return mag;
}

}  // namespace ratesculpt::detail

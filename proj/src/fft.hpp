#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <fftw3.h>

namespace ratesculpt::detail {

// Real-to-complex FFT of a fixed power-of-two size. Inverse is unnormalized
// (scale by 1/n yourself). Plan creation is serialized; execution is not.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const noexcept { return n_; }
    std::size_t bins() const noexcept { return n_ / 2 + 1; }

    void forward(std::span<const double> in, std::span<std::complex<double>> out);
    void inverse(std::span<const std::complex<double>> in, std::span<double> out);

private:
    std::size_t n_;
    double* time_ = nullptr;
    fftw_complex* freq_ = nullptr;
    fftw_plan forward_plan_ = nullptr;
    fftw_plan inverse_plan_ = nullptr;
};

std::vector<double> magnitude_spectrum(std::span<const double> x);

}  // namespace ratesculpt::detail

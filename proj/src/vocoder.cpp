#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"
#include "ratesculpt/error.hpp"
#include "time_map.hpp"

namespace ratesculpt::detail {

TimeMap::TimeMap(std::vector<double> from, std::vector<double> to)
    : from_(std::move(from)), to_(std::move(to)) {
    require(from_.size() == to_.size() && from_.size() >= 2, "time map needs at least two knots");
    for (std::size_t i = 1; i < from_.size(); ++i)
        require(from_[i] > from_[i - 1] && to_[i] > to_[i - 1], "time map must be strictly increasing");
}

TimeMap TimeMap::from_slopes(std::span<const std::size_t> boundaries, std::span<const double> slopes) {
    require(boundaries.size() == slopes.size() + 1, "one slope per segment required");
    std::vector<double> from(boundaries.begin(), boundaries.end());
    std::vector<double> to(boundaries.size(), 0.0);
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        require(slopes[i] > 0.0 && std::isfinite(slopes[i]), "stretch factors must be positive");
        to[i + 1] = to[i] + (from[i + 1] - from[i]) * slopes[i];
    }
    return {std::move(from), std::move(to)};
}

namespace {
double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front() + (x - xs.front());
    if (x >= xs.back()) return ys.back() + (x - xs.back());
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
}

double princarg(double phase) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return phase - two_pi * std::round(phase / two_pi);
}

std::size_t fft_size_for(int sample_rate) {
    std::size_t n = 256;
    while (n < 0.04 * sample_rate) n <<= 1;
    return n;
}
}  // namespace

double TimeMap::forward(double from_pos) const { return interp(from_, to_, from_pos); }
double TimeMap::inverse(double to_pos) const { return interp(to_, from_, to_pos); }

double TimeMap::slope_at(double from_pos) const {
    if (from_pos < from_.front() || from_pos >= from_.back()) return 1.0;
    const auto it = std::upper_bound(from_.begin(), from_.end(), from_pos);
    const std::size_t i = static_cast<std::size_t>(it - from_.begin()) - 1;
    return (to_[i + 1] - to_[i]) / (from_[i + 1] - from_[i]);
}

std::vector<double> vocoder(std::span<const double> x, int sample_rate, const TimeMap& map,
                            std::size_t out_length) {
    const std::size_t n = fft_size_for(sample_rate);
    const std::size_t half = n / 2;
    const std::size_t synthesis_hop = n / 8;
    RealFft fft(n);
    const std::size_t bins = fft.bins();

    std::vector<double> window(n);
    for (std::size_t i = 0; i < n; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);

    std::vector<double> acc(out_length + n, 0.0);
    std::vector<double> norm(out_length + n, 0.0);

    std::vector<double> frame(n);
    std::vector<std::complex<double>> spectrum(bins);
    std::vector<double> magnitude(bins), phase(bins), prev_phase(bins, 0.0);
    std::vector<double> synth_phase(bins, 0.0), prev_synth(bins, 0.0);
    std::vector<std::size_t> peaks;
    std::vector<double> out_frame(n);

    const auto len = static_cast<long long>(x.size());
    long long prev_centre = 0;
    bool first = true;

    for (std::size_t m = 0;; ++m) {
        const long long out_centre = static_cast<long long>(m * synthesis_hop);
        if (out_centre - static_cast<long long>(half) >= static_cast<long long>(out_length)) break;

        const long long in_centre = std::llround(map.inverse(static_cast<double>(out_centre)));
        for (std::size_t i = 0; i < n; ++i) {
            const long long idx = in_centre - static_cast<long long>(half) + static_cast<long long>(i);
            frame[i] = (idx >= 0 && idx < len) ? x[static_cast<std::size_t>(idx)] * window[i] : 0.0;
        }
        fft.forward(frame, spectrum);
        double max_mag = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            magnitude[k] = std::abs(spectrum[k]);
            phase[k] = std::arg(spectrum[k]);
            max_mag = std::max(max_mag, magnitude[k]);
        }

        if (first) {
            synth_phase = phase;
        } else {
            const double analysis_hop = static_cast<double>(in_centre - prev_centre);
            peaks.clear();
            for (std::size_t k = 0; k < bins; ++k) {
                const double v = magnitude[k];
                if (v <= max_mag * 1e-7) continue;
                bool is_peak = true;
                for (std::size_t d = 1; d <= 2 && is_peak; ++d) {
                    if (k >= d && magnitude[k - d] >= v) is_peak = false;
                    if (k + d < bins && magnitude[k + d] > v) is_peak = false;
                }
                if (is_peak) peaks.push_back(k);
            }

            auto advance = [&](std::size_t k) {
                const double omega = 2.0 * std::numbers::pi * k / n;
                double inst = omega;
                if (analysis_hop > 0.0)
                    inst = omega + princarg(phase[k] - prev_phase[k] - omega * analysis_hop) / analysis_hop;
                return princarg(prev_synth[k] + inst * synthesis_hop);
            };

            if (peaks.empty()) {
                for (std::size_t k = 0; k < bins; ++k) synth_phase[k] = advance(k);
            } else {
                for (std::size_t p : peaks) synth_phase[p] = advance(p);
                // Each bin follows the peak whose region of influence contains it;
                // regions split at the magnitude minimum between neighbouring peaks.
                std::size_t region_start = 0;
                for (std::size_t j = 0; j < peaks.size(); ++j) {
                    std::size_t region_end = bins;
                    if (j + 1 < peaks.size()) {
                        const auto lo = magnitude.begin() + static_cast<long>(peaks[j]);
                        const auto hi = magnitude.begin() + static_cast<long>(peaks[j + 1]);
                        region_end = static_cast<std::size_t>(std::min_element(lo, hi) - magnitude.begin());
                    }
                    const std::size_t p = peaks[j];
                    const double rotation = synth_phase[p] - phase[p];
                    for (std::size_t k = region_start; k < region_end; ++k)
                        if (k != p) synth_phase[k] = princarg(phase[k] + rotation);
                    region_start = region_end;
                }
            }
        }

        for (std::size_t k = 0; k < bins; ++k) spectrum[k] = std::polar(magnitude[k], synth_phase[k]);
        fft.inverse(spectrum, out_frame);

        for (std::size_t i = 0; i < n; ++i) {
            const long long idx = out_centre - static_cast<long long>(half) + static_cast<long long>(i);
            if (idx < 0 || idx >= static_cast<long long>(out_length)) continue;
            acc[static_cast<std::size_t>(idx)] += out_frame[i] / n * window[i];
            norm[static_cast<std::size_t>(idx)] += window[i] * window[i];
        }

        prev_phase = phase;
        prev_synth = synth_phase;
        prev_centre = in_centre;
        first = false;
    }

    std::vector<double> out(out_length);
    for (std::size_t i = 0; i < out_length; ++i) out[i] = norm[i] > 1e-9 ? acc[i] / norm[i] : 0.0;
    return out;
}

std::vector<double> sinc_read(std::span<const double> src, std::span<const double> positions,
                              std::span<const double> steps) {
    constexpr int kZeroCrossings = 16;
    constexpr double kKaiserBeta = 8.0;
    // Kaiser window sampled over u^2 in [0, 1]; interpolated per tap.
    constexpr std::size_t kTable = 8192;
    static const std::vector<double> kWindow = [] {
        std::vector<double> w(kTable + 2);
        const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
        for (std::size_t i = 0; i <= kTable; ++i) {
            const double u2 = static_cast<double>(i) / kTable;
            w[i] = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - u2)) / norm;
        }
        w[kTable + 1] = w[kTable];
        return w;
    }();

    std::vector<double> out(positions.size(), 0.0);
    const auto len = static_cast<long long>(src.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const double pos = positions[i];
        const double cutoff = std::min(1.0, 1.0 / std::max(steps[i], 1e-9));
        const double radius = kZeroCrossings / cutoff;

        const double nearest = std::round(pos);
        if (cutoff >= 1.0 && std::abs(pos - nearest) < 1e-12) {
            const auto idx = static_cast<long long>(nearest);
            out[i] = (idx >= 0 && idx < len) ? src[static_cast<std::size_t>(idx)] : 0.0;
            continue;
        }

        const auto lo = static_cast<long long>(std::ceil(pos - radius));
        const auto hi = static_cast<long long>(std::floor(pos + radius));
        double acc = 0.0;
        for (long long k = std::max(lo, 0LL); k <= std::min(hi, len - 1); ++k) {
            const double t = pos - static_cast<double>(k);
            const double u = t / radius;
            const double x = std::min(1.0, u * u) * kTable;
            const auto j = static_cast<std::size_t>(x);
            const double w = kWindow[j] + (x - static_cast<double>(j)) * (kWindow[j + 1] - kWindow[j]);
            const double arg = std::numbers::pi * cutoff * t;
            const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
            acc += src[static_cast<std::size_t>(k)] * cutoff * sinc * w;
        }
        out[i] = acc;
    }
    return out;
}

}  // namespace ratesculpt::detail

#include "ratesculpt/pitch.hpp"

#include <algorithm>
#include <cmath>

#include "ratesculpt/error.hpp"

namespace ratesculpt {

std::vector<PitchFrame> track_pitch(const AudioBuffer& buffer, const PitchTrackerOptions& options) {
    buffer.validate();
    require(options.min_hz > 0 && options.max_hz > options.min_hz, "invalid pitch range");

    const double sr = buffer.sample_rate;
    const auto window = static_cast<std::size_t>(std::lround(options.frame_ms * sr / 1000.0));
    const auto hop = std::max<std::size_t>(1, std::lround(options.hop_ms * sr / 1000.0));
    const auto tau_min = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(sr / options.max_hz)));
    const auto tau_max = static_cast<std::size_t>(std::ceil(sr / options.min_hz));
    const auto& x = buffer.samples;

    std::vector<PitchFrame> frames;
    if (x.size() < window + tau_max) return frames;

    std::vector<double> diff(tau_max + 2, 0.0);
    std::vector<double> cmnd(tau_max + 2, 1.0);
    for (std::size_t start = 0; start + window + tau_max <= x.size(); start += hop) {
        PitchFrame frame;
        frame.time_s = (start + window / 2.0) / sr;

        const std::span<const double> seg(x.data() + start, window);
        if (rms(seg) < options.silence_rms) {
            frames.push_back(frame);
            continue;
        }

        for (std::size_t tau = 1; tau <= tau_max + 1 && start + window + tau <= x.size(); ++tau) {
            double acc = 0.0;
            for (std::size_t i = 0; i < window; ++i) {
                const double d = x[start + i] - x[start + i + tau];
                acc += d * d;
            }
            diff[tau] = acc;
        }
        double running = 0.0;
        for (std::size_t tau = 1; tau <= tau_max; ++tau) {
            running += diff[tau];
            cmnd[tau] = running > 0 ? diff[tau] * tau / running : 1.0;
        }

        std::size_t best = 0;
        for (std::size_t tau = tau_min; tau <= tau_max; ++tau) {
            if (cmnd[tau] < options.threshold) {
                while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
                best = tau;
                break;
            }
        }
        if (best == 0) {
            frame.aperiodicity = *std::min_element(cmnd.begin() + tau_min, cmnd.begin() + tau_max + 1);
            frames.push_back(frame);
            continue;
        }

        double refined = static_cast<double>(best);
        if (best > 1 && best < tau_max) {
            const double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
            const double denom = a - 2 * b + c;
            if (std::abs(denom) > 1e-12) refined += 0.5 * (a - c) / denom;
        }
        frame.voiced = true;
        frame.f0_hz = sr / refined;
        frame.aperiodicity = cmnd[best];
        frames.push_back(frame);
    }
    return frames;
}

double median_f0(const std::vector<PitchFrame>& frames, double start_s, double end_s) {
    std::vector<double> values;
    for (const auto& f : frames)
        if (f.voiced && f.time_s >= start_s && f.time_s < end_s) values.push_back(f.f0_hz);
    if (values.empty()) return 0.0;
    const auto mid = values.begin() + values.size() / 2;
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

}  // namespace ratesculpt

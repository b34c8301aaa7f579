#include "ratesculpt/dsp.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "ratesculpt/error.hpp"
#include "ratesculpt/pitch.hpp"
#include "time_map.hpp"

namespace ratesculpt {

using detail::TimeMap;

void TransformSpec::validate(std::size_t n_windows) const {
    require(stretch.size() == n_windows && pitch_cents.size() == n_windows,
            "transform spec length does not match the window grid");
    for (double s : stretch) require(s > 0.0 && std::isfinite(s), "stretch factors must be positive");
    for (double c : pitch_cents) require(std::isfinite(c), "pitch shifts must be finite");
}

namespace {

void check_grid(const AudioBuffer& buffer, const WindowGrid& grid, std::size_t values) {
    buffer.validate();
    require(!buffer.empty(), "empty buffer");
    require(grid.n_windows() > 0 && grid.boundaries.front() == 0 && grid.boundaries.back() == buffer.size(),
            "window grid does not cover the buffer");
    require(values == grid.n_windows(), "per-window values do not match the grid");
}

// Reads `stretched` (produced through `map` from the original timeline) back at
// the original rate, so each segment's local pitch is scaled by its slope.
std::vector<double> read_back(std::span<const double> stretched, const TimeMap& map, std::size_t length) {
    std::vector<double> positions(length), steps(length);
    for (std::size_t i = 0; i < length; ++i) {
        positions[i] = map.forward(static_cast<double>(i));
        steps[i] = map.slope_at(static_cast<double>(i));
    }
    return detail::sinc_read(stretched, positions, steps);
}

AudioBuffer shift_by_ratios(const AudioBuffer& buffer, std::span<const std::size_t> boundaries,
                            std::span<const double> ratios) {
    const auto map = TimeMap::from_slopes(boundaries, ratios);
    const auto stretched_len = static_cast<std::size_t>(std::llround(map.span_to()));
    const auto stretched = detail::vocoder(buffer.samples, buffer.sample_rate, map, stretched_len);
    return {read_back(stretched, map, buffer.size()), buffer.sample_rate};
}

}  // namespace

double stretched_duration(const WindowGrid& grid, std::span<const double> stretch, int sample_rate) {
    double total = 0.0;
    for (std::size_t i = 0; i < grid.n_windows(); ++i) total += grid.window_length(i) * stretch[i];
    return total / sample_rate;
}

AudioBuffer time_stretch(const AudioBuffer& buffer, const WindowGrid& grid, std::span<const double> stretch) {
    check_grid(buffer, grid, stretch.size());
    const auto map = TimeMap::from_slopes(grid.boundaries, stretch);
    const auto out_len = static_cast<std::size_t>(std::llround(map.span_to()));
    return {detail::vocoder(buffer.samples, buffer.sample_rate, map, out_len), buffer.sample_rate};
}

AudioBuffer pitch_shift(const AudioBuffer& buffer, const WindowGrid& grid, std::span<const double> pitch_cents) {
    check_grid(buffer, grid, pitch_cents.size());
    std::vector<double> ratios(pitch_cents.size());
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        require(std::isfinite(pitch_cents[i]), "pitch shifts must be finite");
        ratios[i] = std::exp2(pitch_cents[i] / 1200.0);
    }
    return shift_by_ratios(buffer, grid.boundaries, ratios);
}

AudioBuffer apply_transform(const AudioBuffer& buffer, const WindowGrid& grid, const TransformSpec& spec) {
    spec.validate(grid.n_windows());
    return time_stretch(pitch_shift(buffer, grid, spec.pitch_cents), grid, spec.stretch);
}

AudioBuffer flatten_pitch(const AudioBuffer& buffer, double target_hz) {
    require(target_hz > 0.0, "target frequency must be positive");
    require(!buffer.empty(), "empty buffer");
    const PitchTrackerOptions options;
    const auto frames = track_pitch(buffer, options);
    if (std::none_of(frames.begin(), frames.end(), [](const PitchFrame& f) { return f.voiced; }))
        fail(ErrorCode::NoPitchDetected, "no voiced frames detected");

    // One segment per analysis frame, centred on the frame; the edges inherit
    // the first/last frame.
    const double sr = buffer.sample_rate;
    const double hop = options.hop_ms * sr / 1000.0;
    std::vector<std::size_t> boundaries{0};
    std::vector<double> ratios;
    for (std::size_t j = 0; j < frames.size(); ++j) {
        const double ratio = frames[j].voiced ? target_hz / frames[j].f0_hz : 1.0;
        const auto end = j + 1 == frames.size()
                             ? buffer.size()
                             : static_cast<std::size_t>(std::llround(frames[j].time_s * sr + hop / 2.0));
        if (end <= boundaries.back() || end > buffer.size()) continue;
        if (!ratios.empty() && ratios.back() == ratio) {
            boundaries.back() = end;
        } else {
            boundaries.push_back(end);
            ratios.push_back(ratio);
        }
    }
    if (boundaries.back() != buffer.size()) {
        boundaries.push_back(buffer.size());
        ratios.push_back(ratios.empty() ? 1.0 : ratios.back());
    }
    return shift_by_ratios(buffer, boundaries, ratios);
}

AudioBuffer resample(const AudioBuffer& buffer, int target_rate) {
    buffer.validate();
    require(target_rate > 0, "target sample rate must be positive");
    if (target_rate == buffer.sample_rate) return buffer;
    const double step = static_cast<double>(buffer.sample_rate) / target_rate;
    const auto out_len = static_cast<std::size_t>(std::llround(buffer.size() / step));
    std::vector<double> positions(out_len), steps(out_len, step);
    for (std::size_t i = 0; i < out_len; ++i) positions[i] = i * step;
    return {detail::sinc_read(buffer.samples, positions, steps), target_rate};
}

std::vector<double> magnitude_spectrum(std::span<const double> x) { return detail::magnitude_spectrum(x); }

double spectral_centroid(std::span<const double> x, int sample_rate) {
    const auto mag = magnitude_spectrum(x);
    if (mag.size() < 2) return 0.0;
    const double bin_hz = sample_rate / (2.0 * (mag.size() - 1));
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        num += k * bin_hz * mag[k];
        den += mag[k];
    }
    return den > 0 ? num / den : 0.0;
}

}  // namespace ratesculpt

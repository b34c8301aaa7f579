#pragma once

#include <span>
#include <vector>

#include "ratesculpt/audio.hpp"

namespace ratesculpt {

// Per-window stretch multipliers and pitch shifts (cents). The stimulus
// coordinate system for reverse correlation.
struct TransformSpec {
    std::vector<double> stretch;
    std::vector<double> pitch_cents;

    static TransformSpec identity(std::size_t n_windows) {
        return {std::vector<double>(n_windows, 1.0), std::vector<double>(n_windows, 0.0)};
    }
    std::size_t size() const noexcept { return stretch.size(); }
    void validate(std::size_t n_windows) const;

    bool operator==(const TransformSpec&) const = default;
};

// Phase-vocoder time-scale modification; window i lasts stretch[i] times as long.
AudioBuffer time_stretch(const AudioBuffer& buffer, const WindowGrid& grid,
                         std::span<const double> stretch);

// Per-window pitch shift at constant duration.
AudioBuffer pitch_shift(const AudioBuffer& buffer, const WindowGrid& grid,
                        std::span<const double> pitch_cents);

// Pitch shift first, then time stretch.
AudioBuffer apply_transform(const AudioBuffer& buffer, const WindowGrid& grid,
                            const TransformSpec& spec);

// Shifts every voiced frame to target_hz. Throws NoPitchDetected if nothing is voiced.
AudioBuffer flatten_pitch(const AudioBuffer& buffer, double target_hz = 120.0);

// Windowed-sinc sample-rate conversion.
AudioBuffer resample(const AudioBuffer& buffer, int target_rate);

// Expected output duration in seconds of time_stretch for this grid.
double stretched_duration(const WindowGrid& grid, std::span<const double> stretch, int sample_rate);

std::vector<double> magnitude_spectrum(std::span<const double> x);
double spectral_centroid(std::span<const double> x, int sample_rate);

}  // namespace ratesculpt

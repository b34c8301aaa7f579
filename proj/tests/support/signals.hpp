#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ratesculpt/audio.hpp"

namespace ratesculpt::testing {

inline AudioBuffer tone(double hz, double seconds, int rate = 44100, double amp = 0.5) {
    const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * std::numbers::pi * hz * i / rate);
    return {std::move(x), rate};
}

// Harmonic tone with 1/k amplitudes, a stand-in for a voiced vowel.
inline AudioBuffer voiced(double hz, double seconds, int rate = 44100, int harmonics = 6) {
    const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
    std::vector<double> x(n, 0.0);
    for (int k = 1; k <= harmonics; ++k)
        for (std::size_t i = 0; i < n; ++i)
            x[i] += 0.3 / k * std::sin(2 * std::numbers::pi * k * hz * i / rate);
    return {std::move(x), rate};
}

// Linear glide in frequency with continuous phase.
inline AudioBuffer glide(double from_hz, double to_hz, double seconds, int rate = 44100) {
    const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
    std::vector<double> x(n);
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = from_hz + (to_hz - from_hz) * i / static_cast<double>(n);
        x[i] = 0.5 * std::sin(phase);
        phase += 2 * std::numbers::pi * f / rate;
    }
    return {std::move(x), rate};
}

// Per-segment tone, phase continuous across segments.
inline AudioBuffer stepped_tone(const std::vector<double>& hz, double seg_seconds, int rate = 44100) {
    std::vector<double> x;
    double phase = 0.0;
    const auto per = static_cast<std::size_t>(std::lround(seg_seconds * rate));
    for (double f : hz)
        for (std::size_t i = 0; i < per; ++i) {
            x.push_back(0.5 * std::sin(phase));
            phase += 2 * std::numbers::pi * f / rate;
        }
    return {std::move(x), rate};
}

inline AudioBuffer white_noise(double seconds, int rate, unsigned seed, double amp = 0.3) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-amp, amp);
    const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
    std::vector<double> x(n);
    for (auto& v : x) v = u(gen);
    return {std::move(x), rate};
}

// Smoothed |x| envelope peak position, in seconds.
inline double envelope_peak_time(const AudioBuffer& b, double smooth_ms = 2.0) {
    const auto w = std::max<std::size_t>(1, std::lround(smooth_ms * b.sample_rate / 1000.0));
    double best = -1, acc = 0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        acc += std::abs(b.samples[i]);
        if (i >= w) acc -= std::abs(b.samples[i - w]);
        if (acc > best) {
            best = acc;
            best_i = i;
        }
    }
    return (best_i - w / 2.0) / b.sample_rate;
}

}  // namespace ratesculpt::testing

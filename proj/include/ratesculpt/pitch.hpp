#pragma once

#include <cmath>
#include <vector>

#include "ratesculpt/audio.hpp"

namespace ratesculpt {

struct PitchTrackerOptions {
    double frame_ms = 25.0;
    double hop_ms = 10.0;
    double min_hz = 60.0;
    double max_hz = 800.0;
    double threshold = 0.15;        // cumulative-mean-normalized difference dip
    double silence_rms = 1e-4;
};

struct PitchFrame {
    double time_s = 0.0;  // frame centre
    double f0_hz = 0.0;   // 0 when unvoiced
    bool voiced = false;
    double aperiodicity = 1.0;
};

// YIN-style autocorrelation tracker.
std::vector<PitchFrame> track_pitch(const AudioBuffer& buffer, const PitchTrackerOptions& options = {});

// Median F0 over voiced frames whose centre lies in [start_s, end_s); 0 when none.
double median_f0(const std::vector<PitchFrame>& frames, double start_s, double end_s);

inline double cents_between(double from_hz, double to_hz) {
    return 1200.0 * std::log2(to_hz / from_hz);
}

}  // namespace ratesculpt

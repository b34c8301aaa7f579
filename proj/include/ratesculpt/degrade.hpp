#pragma once

#include <limits>

#include "ratesculpt/audio.hpp"

namespace ratesculpt {

// Schroeder/Freeverb-style reverberator settings, expressed with the knobs of a
// typical editor reverb. Gains of -inf dB switch a path off.
struct ReverbParams {
    double room_size = 0.22;     // fraction
    double pre_delay_ms = 10.0;
    double reverberance = 0.5;   // fraction
    double damping = 0.5;        // fraction
    double wet_gain_db = -1.0;
    double dry_gain_db = -1.0;

    // Decay time implied by room_size and reverberance; 22 % / 50 % gives about 0.4 s.
    double rt60_seconds() const;
};

struct DegradeParams {
    double distortion_mix = 0.45;  // full-wave rectifier wet fraction
    ReverbParams reverb;
    double noise_gain = 0.0;

    void validate() const;

    static DegradeParams identity() {
        DegradeParams p;
        p.distortion_mix = 0.0;
        p.reverb.wet_gain_db = -std::numeric_limits<double>::infinity();
        p.reverb.dry_gain_db = 0.0;
        p.noise_gain = 0.0;
        return p;
    }
    // Distortion 45 %, room 22 %, pre-delay 10 ms, reverberance/damping 50 %, wet/dry -1 dB.
    static DegradeParams loudspeaker_preset(double noise_gain = 0.3) {
        DegradeParams p;
        p.noise_gain = noise_gain;
        return p;
    }
};

// Rectifier distortion, then reverb, then additive noise (tiled to length and
// resampled if needed). Peak-normalized to at most 1.0; the output carries the reverb tail.
AudioBuffer degrade(const AudioBuffer& buffer, const DegradeParams& params, const AudioBuffer& noise);

// Wet-only impulse response of the reverberator (for calibration checks).
AudioBuffer reverb_impulse_response(const ReverbParams& params, int sample_rate, double seconds);

}  // namespace ratesculpt

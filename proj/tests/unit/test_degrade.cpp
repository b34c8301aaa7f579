#include <cmath>
#include <limits>

#include "doctest.h"
#include "ratesculpt/degrade.hpp"
#include "ratesculpt/dsp.hpp"
#include "ratesculpt/error.hpp"
#include "support/signals.hpp"

using namespace ratesculpt;

TEST_CASE("identity degradation returns the input") {
    const auto in = testing::voiced(150, 0.3);
    const auto out = degrade(in, DegradeParams::identity(), AudioBuffer{});
    REQUIRE(out.size() >= in.size());
    for (std::size_t i = 0; i < in.size(); ++i) CHECK(out.samples[i] == doctest::Approx(in.samples[i]));
}

TEST_CASE("full rectification of a sine leaves only even harmonics") {
    // 2^16 samples at a bin-centred frequency so every harmonic lands on an FFT bin.
    const int rate = 65536;
    const double f = 512.0;
    const auto in = testing::tone(f, 1.0, rate, 0.9);
    auto params = DegradeParams::identity();
    params.distortion_mix = 1.0;
    const auto out = degrade(in, params, AudioBuffer{});
    const auto mag = magnitude_spectrum(out.samples);
    const double bin_hz = static_cast<double>(rate) / (2.0 * (mag.size() - 1));
    const auto at = [&](double hz) { return mag[static_cast<std::size_t>(std::lround(hz / bin_hz))]; };
    const double second = at(2 * f);
    CHECK(second > 1000.0);
    for (int k : {1, 3, 5, 7}) CHECK(at(k * f) < 1e-6 * second);
    for (int k : {4, 6}) CHECK(at(k * f) > 1e-3 * second);
}

TEST_CASE("reverb decay is calibrated to about 0.4 s for the loudspeaker preset") {
    const auto params = DegradeParams::loudspeaker_preset();
    CHECK(params.reverb.rt60_seconds() == doctest::Approx(0.4).epsilon(0.01));
    const auto ir = reverb_impulse_response(params.reverb, 44100, 1.5);
    // Schroeder backward integration, T20 fit extrapolated to 60 dB.
    std::vector<double> energy(ir.size());
    double acc = 0.0;
    for (std::size_t i = ir.size(); i-- > 0;) {
        acc += ir.samples[i] * ir.samples[i];
        energy[i] = acc;
    }
    auto time_at = [&](double db) {
        for (std::size_t i = 0; i < energy.size(); ++i)
            if (10 * std::log10(energy[i] / energy[0]) <= db) return static_cast<double>(i) / ir.sample_rate;
        return 0.0;
    };
    const double rt60 = 3.0 * (time_at(-25.0) - time_at(-5.0));
    CHECK(rt60 > 0.3);
    CHECK(rt60 < 0.5);
}

TEST_CASE("degrade adds a tail, mixes noise and keeps peaks in range") {
    const auto in = testing::voiced(150, 0.5, 22050);
    const auto noise = testing::white_noise(0.2, 44100, 7, 1.0);  // resampled to 22.05 kHz
    const auto out = degrade(in, DegradeParams::loudspeaker_preset(2.0), noise);
    CHECK(out.sample_rate == 22050);
    CHECK(out.duration_seconds() >= in.duration_seconds());
    CHECK(peak(out.samples) <= 1.0 + 1e-12);
    CHECK(peak(out.samples) == doctest::Approx(1.0));
}

TEST_CASE("degrade validates parameters") {
    const auto in = testing::tone(200, 0.1);
    auto bad = DegradeParams::identity();
    bad.distortion_mix = 1.5;
    CHECK_THROWS_AS(degrade(in, bad, AudioBuffer{}), Error);
    bad = DegradeParams::identity();
    bad.reverb.pre_delay_ms = -1;
    CHECK_THROWS_AS(degrade(in, bad, AudioBuffer{}), Error);
    bad = DegradeParams::identity();
    bad.noise_gain = 0.5;
    CHECK_THROWS_AS(degrade(in, bad, AudioBuffer{}), Error);  // empty noise
}

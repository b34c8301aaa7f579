#include "ratesculpt/degrade.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ratesculpt/dsp.hpp"
#include "ratesculpt/error.hpp"

namespace ratesculpt {

double ReverbParams::rt60_seconds() const {
    return std::max(0.05, (0.2 + 0.9 * room_size) * (2.0 * reverberance));
}

void DegradeParams::validate() const {
    auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
    require(fraction(distortion_mix), "distortion_mix must be in [0,1]");
    require(fraction(reverb.room_size) && fraction(reverb.reverberance) && fraction(reverb.damping),
            "reverb fractions must be in [0,1]");
    require(reverb.pre_delay_ms >= 0.0, "pre_delay must be non-negative");
    require(!std::isnan(reverb.wet_gain_db) && !std::isnan(reverb.dry_gain_db), "reverb gains must be numbers");
    require(noise_gain >= 0.0 && std::isfinite(noise_gain), "noise_gain must be non-negative");
}

namespace {

double db_to_gain(double db) { return std::isinf(db) && db < 0 ? 0.0 : std::pow(10.0, db / 20.0); }

class Reverberator {
public:
    Reverberator(const ReverbParams& p, int sample_rate) {
        static constexpr std::array<int, 8> kComb{1116, 1188, 1277, 1356, 1422, 1491, 1557, 1617};
        static constexpr std::array<int, 4> kAllpass{556, 441, 341, 225};
        const double scale = sample_rate / 44100.0;
        const double rt60 = p.rt60_seconds();
        for (std::size_t i = 0; i < kComb.size(); ++i) {
            const auto len = std::max<std::size_t>(1, std::lround(kComb[i] * scale));
            combs_[i].buffer.assign(len, 0.0);
            combs_[i].feedback = std::pow(10.0, -3.0 * len / (rt60 * sample_rate));
        }
        for (std::size_t i = 0; i < kAllpass.size(); ++i)
            allpasses_[i].buffer.assign(std::max<std::size_t>(1, std::lround(kAllpass[i] * scale)), 0.0);
        damp_ = p.damping * 0.4;
    }

    double process(double in) {
        double out = 0.0;
        for (auto& c : combs_) {
            const double y = c.buffer[c.pos];
            c.filter = y * (1.0 - damp_) + c.filter * damp_;
            c.buffer[c.pos] = in * kInputGain + c.filter * c.feedback;
            c.pos = (c.pos + 1) % c.buffer.size();
            out += y;
        }
        for (auto& a : allpasses_) {
            const double buffered = a.buffer[a.pos];
            const double y = buffered - out;
            a.buffer[a.pos] = out + buffered * 0.5;
            a.pos = (a.pos + 1) % a.buffer.size();
            out = y;
        }
        return out * kWetScale;
    }

private:
    static constexpr double kInputGain = 0.015;
    static constexpr double kWetScale = 3.0;

    struct Comb {
        std::vector<double> buffer;
        std::size_t pos = 0;
        double feedback = 0.0;
        double filter = 0.0;
    };
    struct Allpass {
        std::vector<double> buffer;
        std::size_t pos = 0;
    };
    std::array<Comb, 8> combs_;
    std::array<Allpass, 4> allpasses_;
    double damp_ = 0.0;
};

std::vector<double> reverb_wet(std::span<const double> x, const ReverbParams& p, int sample_rate,
                               std::size_t out_len) {
    Reverberator rev(p, sample_rate);
    const auto delay = static_cast<std::size_t>(std::lround(p.pre_delay_ms * sample_rate / 1000.0));
    std::vector<double> wet(out_len, 0.0);
    for (std::size_t i = 0; i < out_len; ++i) {
        const double in = i < delay ? 0.0 : (i - delay < x.size() ? x[i - delay] : 0.0);
        wet[i] = rev.process(in);
    }
    return wet;
}

}  // namespace

AudioBuffer reverb_impulse_response(const ReverbParams& params, int sample_rate, double seconds) {
    const auto len = static_cast<std::size_t>(std::lround(seconds * sample_rate));
    const std::vector<double> impulse{1.0};
    return {reverb_wet(impulse, params, sample_rate, len), sample_rate};
}

AudioBuffer degrade(const AudioBuffer& buffer, const DegradeParams& params, const AudioBuffer& noise) {
    buffer.validate();
    params.validate();
    const int sr = buffer.sample_rate;

    std::vector<double> x(buffer.samples);
    for (double& v : x) v = (1.0 - params.distortion_mix) * v + params.distortion_mix * std::abs(v);

    const double wet_gain = db_to_gain(params.reverb.wet_gain_db);
    const double dry_gain = db_to_gain(params.reverb.dry_gain_db);
    std::vector<double> y;
    if (wet_gain > 0.0) {
        const double tail_s = params.reverb.pre_delay_ms / 1000.0 + params.reverb.rt60_seconds();
        const auto out_len = x.size() + static_cast<std::size_t>(std::lround(tail_s * sr));
        const auto wet = reverb_wet(x, params.reverb, sr, out_len);
        y.assign(out_len, 0.0);
        for (std::size_t i = 0; i < out_len; ++i)
            y[i] = wet_gain * wet[i] + (i < x.size() ? dry_gain * x[i] : 0.0);
    } else {
        y = std::move(x);
        for (double& v : y) v *= dry_gain;
    }

    if (params.noise_gain > 0.0) {
        require(!noise.empty(), "noise buffer is empty");
        const AudioBuffer matched = noise.sample_rate == sr ? noise : resample(noise, sr);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += params.noise_gain * matched.samples[i % matched.size()];
    }

    const double p = peak(y);
    if (p > 1.0)
        for (double& v : y) v /= p;
    return {std::move(y), sr};
}

}  // namespace ratesculpt

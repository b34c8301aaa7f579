#include "ratesculpt/scissor.hpp"

#include <cmath>
#include <cstdlib>

#include "ratesculpt/dsp.hpp"
#include "ratesculpt/error.hpp"

namespace ratesculpt {

ScissorLevel scissor_level(int k) {
    require(k >= -kScissorMaxLevel && k <= kScissorMaxLevel, "scissor level must be in [-5, 5]");
    if (k == 0) return {};
    // Negative levels are exact reciprocals of the positive ones.
    const double u = static_cast<double>(std::abs(k)) / kScissorMaxLevel;
    const double speed = std::pow(1.5, u), duration = 1.0 / std::pow(2.0, u);
    if (k > 0) return {k, speed, duration};
    return {k, 1.0 / speed, 1.0 / duration};
}

std::vector<ScissorLevel> scissor_grid() {
    std::vector<ScissorLevel> out;
    for (int k = -kScissorMaxLevel; k <= kScissorMaxLevel; ++k) out.push_back(scissor_level(k));
    return out;
}

double scissor_duration(double duration_s, double word_start_s, double word_end_s, const ScissorLevel& level) {
    return word_start_s / level.context_speed + (word_end_s - word_start_s) * level.word_duration +
           (duration_s - word_end_s);
}

AudioBuffer apply_scissor(const AudioBuffer& buffer, double word_start_s, double word_end_s,
                          const ScissorLevel& level) {
    buffer.validate();
    require(!buffer.empty(), "empty buffer");
    require(word_start_s >= 0.0 && word_start_s < word_end_s && word_end_s <= buffer.duration_seconds() + 1e-9,
            "word boundaries must satisfy 0 <= start < end <= duration");
    require(level.context_speed > 0 && level.word_duration > 0, "scissor factors must be positive");

    const auto sr = buffer.sample_rate;
    const auto start = static_cast<std::size_t>(std::llround(word_start_s * sr));
    const auto end = std::min(buffer.size(), static_cast<std::size_t>(std::llround(word_end_s * sr)));
    require(end > start, "target word is shorter than one sample");

    std::vector<std::size_t> boundaries{0};
    std::vector<double> stretch;
    if (start > 0) {
        boundaries.push_back(start);
        stretch.push_back(1.0 / level.context_speed);
    }
    boundaries.push_back(end);
    stretch.push_back(level.word_duration);
    if (end < buffer.size()) {
        boundaries.push_back(buffer.size());
        stretch.push_back(1.0);
    }
    return time_stretch(buffer, make_segment_grid(buffer.size(), std::move(boundaries)), stretch);
}

}  // namespace ratesculpt

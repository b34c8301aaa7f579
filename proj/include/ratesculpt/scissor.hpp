#pragma once

#include <vector>

#include "ratesculpt/audio.hpp"

namespace ratesculpt {

// One step of the two-region "scissor" rate manipulation: the context before
// the target word is sped up while the word is lengthened, or the reverse.
struct ScissorLevel {
    int level_index = 0;         // -5 .. +5
    double context_speed = 1.0;  // speed multiplier; context duration scales by 1/speed
    double word_duration = 1.0;  // duration multiplier on the target word
};

inline constexpr int kScissorMaxLevel = 5;

// Log-symmetric interpolation: context_speed = 1.5^(k/5), word_duration = 2^(-k/5).
ScissorLevel scissor_level(int level_index);
std::vector<ScissorLevel> scissor_grid();

// Region after word_end is untouched.
AudioBuffer apply_scissor(const AudioBuffer& buffer, double word_start_s, double word_end_s,
                          const ScissorLevel& level);

double scissor_duration(double duration_s, double word_start_s, double word_end_s, const ScissorLevel& level);

}  // namespace ratesculpt

#include <cmath>

#include "doctest.h"
#include "ratesculpt/dsp.hpp"
#include "ratesculpt/error.hpp"
#include "ratesculpt/scissor.hpp"
#include "support/signals.hpp"

using namespace ratesculpt;

TEST_CASE("scissor grid endpoints, identity and symmetry") {
    const auto grid = scissor_grid();
    REQUIRE(grid.size() == 11);
    CHECK(grid.front().level_index == -5);
    CHECK(grid.front().context_speed == doctest::Approx(0.667).epsilon(0.001));
    CHECK(grid.front().context_speed == doctest::Approx(1.0 / 1.5));
    CHECK(grid.front().word_duration == doctest::Approx(2.0));
    CHECK(grid.back().context_speed == doctest::Approx(1.5));
    CHECK(grid.back().word_duration == doctest::Approx(0.5));
    CHECK(grid[5].context_speed == 1.0);
    CHECK(grid[5].word_duration == 1.0);

    for (int k = 1; k <= 5; ++k) {
        const auto pos = scissor_level(k), neg = scissor_level(-k);
        CHECK(neg.context_speed == 1.0 / pos.context_speed);
        CHECK(neg.word_duration == 1.0 / pos.word_duration);
        CHECK(std::log(pos.context_speed) == doctest::Approx(-std::log(neg.context_speed)).epsilon(1e-14));
        CHECK(std::signbit(std::log(pos.context_speed)) != std::signbit(std::log(pos.word_duration)));
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        CHECK(grid[i].context_speed > grid[i - 1].context_speed);
        CHECK(grid[i].word_duration < grid[i - 1].word_duration);
    }
    CHECK_THROWS_AS(scissor_level(6), Error);
}

TEST_CASE("apply_scissor durations") {
    const auto in = testing::voiced(140, 1.3);  // 1.0 s context + 0.3 s word
    const auto check = [&](int k, double expected) {
        const auto out = apply_scissor(in, 1.0, 1.3, scissor_level(k));
        CHECK(std::abs(out.duration_seconds() - expected) / expected <= 0.02);
    };
    check(0, 1.3);
    check(-5, 1.0 / (1.0 / 1.5) + 0.3 * 2.0);  // 2.1 s
    check(5, 1.0 / 1.5 + 0.3 * 0.5);           // 0.817 s
    CHECK(scissor_duration(1.3, 1.0, 1.3, scissor_level(-5)) == doctest::Approx(2.1));
}

TEST_CASE("apply_scissor leaves the tail after the word untouched in length") {
    const auto in = testing::voiced(140, 1.5);
    const auto out = apply_scissor(in, 0.8, 1.1, scissor_level(3));
    const double expected = scissor_duration(1.5, 0.8, 1.1, scissor_level(3));
    CHECK(std::abs(out.duration_seconds() - expected) / expected <= 0.02);
}

TEST_CASE("level 0 matches the identity stretch contract") {
    const auto in = testing::voiced(140, 0.6);
    const auto out = apply_scissor(in, 0.3, 0.5, scissor_level(0));
    REQUIRE(out.size() == in.size());
    for (std::size_t i = 0; i < in.size(); ++i) CHECK(std::abs(out.samples[i] - in.samples[i]) < 1e-6);
}

TEST_CASE("word at the very start or end of the buffer") {
    const auto in = testing::voiced(140, 0.5);
    CHECK_NOTHROW(apply_scissor(in, 0.0, 0.2, scissor_level(2)));
    CHECK_NOTHROW(apply_scissor(in, 0.3, 0.5, scissor_level(-2)));
}

TEST_CASE("invalid boundaries") {
    const auto in = testing::voiced(140, 0.5);
    CHECK_THROWS_AS(apply_scissor(in, 0.3, 0.2, scissor_level(1)), Error);
    CHECK_THROWS_AS(apply_scissor(in, -0.1, 0.2, scissor_level(1)), Error);
    CHECK_THROWS_AS(apply_scissor(in, 0.1, 0.9, scissor_level(1)), Error);
}

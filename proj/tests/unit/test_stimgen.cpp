#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "ratesculpt/error.hpp"
#include "ratesculpt/json_io.hpp"
#include "ratesculpt/rng.hpp"
#include "ratesculpt/stimgen.hpp"
#include "support/signals.hpp"

using namespace ratesculpt;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("ratesculpt_" + name);
    fs::remove_all(p);
    return p;
}
}  // namespace

TEST_CASE("draw mapping: identity, clipping and the log2 stretch scale") {
    const SamplingParams params;
    const std::vector<double> zero{0.0};
    auto spec = transform_from_draws(zero, zero, params);
    CHECK(spec.pitch_cents[0] == 0.0);
    CHECK(spec.stretch[0] == 1.0);

    const std::vector<double> big{3.1};
    spec = transform_from_draws(zero, big, params);
    CHECK(spec.stretch[0] == doctest::Approx(4.0));

    const std::vector<double> low{-2.5};  // -250 cents at sigma 100
    spec = transform_from_draws(low, zero, params);
    CHECK(spec.pitch_cents[0] == doctest::Approx(-200.0));

    const std::vector<double> one{1.0}, minus_one{-1.0};
    CHECK(transform_from_draws(zero, one, params).stretch[0] == doctest::Approx(2.0));
    CHECK(transform_from_draws(zero, minus_one, params).stretch[0] == doctest::Approx(0.5));
}

TEST_CASE("sampling parameters must be positive") {
    SamplingParams p;
    p.sigma_stretch = 0;
    CHECK_THROWS_AS(sample_transform(4, p, 1), Error);
}

TEST_CASE("sample_transform is reproducible from the seed") {
    const SamplingParams params;
    CHECK(sample_transform(13, params, 99) == sample_transform(13, params, 99));
    CHECK_FALSE(sample_transform(13, params, 99) == sample_transform(13, params, 100));
}

TEST_CASE("sampled distributions match the clipped normal") {
    const SamplingParams params;
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto spec = sample_transform(10, params, derive_seed(5, s));
        for (std::size_t i = 0; i < 10; ++i) {
            const double c = spec.pitch_cents[i];
            CHECK(std::abs(c) <= 200.0);
            CHECK(spec.stretch[i] >= 0.25);
            CHECK(spec.stretch[i] <= 4.0);
            sum += c;
            sq += c * c;
            ++n;
        }
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(sd - 100.0) / 100.0 < 0.05);
    CHECK(std::abs(mean) < 3.0);
}

TEST_CASE("ambiguous candidate selection") {
    const std::vector<std::pair<double, double>> single{{0.0, 0.0}};
    CHECK(select_ambiguous_candidate(single) == 0);

    const std::vector<std::pair<double, double>> two{{std::log(0.9), std::log(0.1)},
                                                     {std::log(0.55), std::log(0.45)}};
    CHECK(select_ambiguous_candidate(two) == 1);

    const std::vector<std::pair<double, double>> tie{{std::log(0.45), std::log(0.55)},
                                                     {std::log(0.55), std::log(0.45)}};
    CHECK(select_ambiguous_candidate(tie) == 0);

    CHECK_THROWS_AS(select_ambiguous_candidate(std::vector<std::pair<double, double>>{}), Error);
    const std::vector<std::pair<double, double>> inf{{-INFINITY, 0.0}};
    CHECK_THROWS_AS(select_ambiguous_candidate(inf), Error);
}

TEST_CASE("batch of 500 specs over a 1.3 s phrase") {
    const auto base = testing::voiced(120, 1.3);
    const auto dir = scratch("batch500");
    BatchOptions opts;
    opts.render = false;
    const auto m = generate_batch(base, "phrase.wav", 500, {}, 42, dir, opts);
    CHECK(m.stimuli.size() == 500);
    for (const auto& e : m.stimuli) {
        CHECK(e.spec.size() == 13);
        CHECK(e.spec.pitch_cents.size() == 13);
    }
    CHECK(fs::exists(dir / "manifest.json"));
    const auto parsed = read_manifest(dir / "manifest.json");
    CHECK(parsed == m);
    // Specs can be regenerated from (seed, index).
    const auto again = sample_transform(13, {}, stimulus_seed(42, 123));
    for (std::size_t i = 0; i < 13; ++i) {
        CHECK(m.stimuli[123].spec.stretch[i] == doctest::Approx(again.stretch[i]).epsilon(1e-6));
        CHECK(m.stimuli[123].spec.pitch_cents[i] == doctest::Approx(again.pitch_cents[i]).epsilon(1e-6));
    }
    fs::remove_all(dir);
}

TEST_CASE("log2 stretch means are centred at zero over 250 stimuli") {
    const auto base = testing::voiced(120, 1.3);
    const auto dir = scratch("batch250");
    BatchOptions opts;
    opts.render = false;
    const auto m = generate_batch(base, "phrase.wav", 250, {}, 7, dir, opts);
    for (std::size_t w = 0; w < 13; ++w) {
        double mean = 0;
        for (const auto& e : m.stimuli) mean += std::log2(e.spec.stretch[w]);
        mean /= 250.0;
        CHECK(std::abs(mean) < 0.15);
    }
    fs::remove_all(dir);
}

TEST_CASE("rendered batches are byte-identical across runs") {
    const auto base = testing::voiced(120, 0.4);
    const auto a = scratch("det_a"), b = scratch("det_b");
    generate_batch(base, "w.wav", 2, {}, 1234, a, {.batch_id = "w"});
    generate_batch(base, "w.wav", 2, {}, 1234, b, {.batch_id = "w", .workers = 1});
    CHECK(read_text_file(a / "manifest.json") == read_text_file(b / "manifest.json"));
    CHECK(read_text_file(a / "w_0001.wav") == read_text_file(b / "w_0001.wav"));

    const auto m = read_manifest(a / "manifest.json");
    const auto wav = read_wav(a / m.stimuli[1].wav_path);
    const auto grid = make_grid(base, 100);
    const double expected = stretched_duration(grid, m.stimuli[1].spec.stretch, base.sample_rate);
    CHECK(std::abs(wav.duration_seconds() - expected) / expected <= 0.02);
    const auto s = m.stimulus(1);
    CHECK(s.batch_id == "w");
    CHECK(s.seed == stimulus_seed(1234, 1));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("unwritable output directory is an IoError") {
    const auto base = testing::voiced(120, 0.2);
    try {
        generate_batch(base, "w.wav", 1, {}, 1, "/proc/ratesculpt-nope/x", {});
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
    }
}

TEST_CASE("manifest round-trip property") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        BatchManifest m;
        m.batch_id = "b" + std::to_string(trial);
        m.base_audio = "audio/base " + std::to_string(trial) + ".wav";
        m.window_ms = quantize(50 + 100 * rng.uniform());
        m.params.sigma_pitch_cents = quantize(1 + 200 * rng.uniform());
        m.seed = rng.next();
        const std::size_t count = rng.below(5);
        for (std::size_t i = 0; i < count; ++i) {
            auto spec = sample_transform(1 + rng.below(15), m.params, rng.next());
            for (double& v : spec.stretch) v = quantize(v);
            for (double& v : spec.pitch_cents) v = quantize(v);
            m.stimuli.push_back({m.batch_id + "_" + std::to_string(i), i, spec, "x.wav"});
        }
        const auto text = serialize_manifest(m);
        const auto parsed = parse_manifest(text);
        CHECK(parsed == m);
        CHECK(serialize_manifest(parsed) == text);
    }
}

TEST_CASE("malformed manifests are rejected") {
    CHECK_THROWS_AS(parse_manifest("{\"batch_id\": 3}"), Error);
    CHECK_THROWS_AS(parse_manifest("not json"), Error);
}

TEST_CASE("canonical dump formats floats with six decimals") {
    Json j;
    j["b"] = 1.0;
    j["a"] = -0.0000001;
    j["n"] = 3;
    j["v"] = std::vector<double>{0.5, 2.0};
    CHECK(dump_canonical(j, -1) == R"({"b":1.000000,"a":0.000000,"n":3,"v":[0.500000,2.000000]})");
}

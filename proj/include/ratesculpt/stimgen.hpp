#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ratesculpt/audio.hpp"
#include "ratesculpt/dsp.hpp"

namespace ratesculpt {

struct SamplingParams {
    double sigma_pitch_cents = 100.0;
    double sigma_stretch = 1.0;  // std of log2(stretch): one sigma doubles or halves a window
    double clip_sigmas = 2.0;

    void validate() const;
};

// Maps standard-normal draws to a spec: pitch = clip(z*sigma), stretch = 2^clip(z*sigma).
TransformSpec transform_from_draws(std::span<const double> pitch_z, std::span<const double> stretch_z,
                                   const SamplingParams& params);

TransformSpec sample_transform(const WindowGrid& grid, const SamplingParams& params, std::uint64_t seed);
TransformSpec sample_transform(std::size_t n_windows, const SamplingParams& params, std::uint64_t seed);

struct StimulusEntry {
    std::string stimulus_id;
    std::size_t index = 0;
    TransformSpec spec;
    std::string wav_path;  // relative to the manifest directory

    bool operator==(const StimulusEntry&) const = default;
};

// Everything needed to reproduce one stimulus.
struct StimulusManifest {
    std::string stimulus_id;
    std::string base_audio;
    double window_ms = 100.0;
    TransformSpec spec;
    std::uint64_t seed = 0;
    std::string batch_id;
};

struct BatchManifest {
    std::string batch_id;
    std::string base_audio;
    double window_ms = 100.0;
    SamplingParams params;
    std::uint64_t seed = 0;
    std::vector<StimulusEntry> stimuli;

    StimulusManifest stimulus(std::size_t i) const;
    const StimulusEntry* find(const std::string& stimulus_id) const;

    bool operator==(const BatchManifest& o) const;
};

std::string serialize_manifest(const BatchManifest& manifest);
BatchManifest parse_manifest(const std::string& text);
BatchManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const BatchManifest& manifest);

std::uint64_t stimulus_seed(std::uint64_t batch_seed, std::size_t index);

struct BatchOptions {
    std::string batch_id;     // defaults to "<base stem>-<seed>"
    double window_ms = 100.0;
    bool render = true;       // false writes only the manifest
    unsigned workers = 0;     // 0 = hardware concurrency
};

// Samples n specs, renders each onto `base` (pitch then stretch) and writes
// <out_dir>/<stimulus_id>.wav plus <out_dir>/manifest.json.
BatchManifest generate_batch(const AudioBuffer& base, const std::string& base_path, std::size_t n,
                             const SamplingParams& params, std::uint64_t seed,
                             const std::filesystem::path& out_dir, const BatchOptions& options = {});

// Index of the candidate whose two-way recognition probability is closest to 0.5.
std::size_t select_ambiguous_candidate(std::span<const std::pair<double, double>> log_prob_pairs);

}  // namespace ratesculpt

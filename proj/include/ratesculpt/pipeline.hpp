#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ratesculpt/audio.hpp"
#include "ratesculpt/eval.hpp"
#include "ratesculpt/planner.hpp"
#include "ratesculpt/revcor.hpp"
#include "ratesculpt/service.hpp"
#include "ratesculpt/stimgen.hpp"

namespace ratesculpt {

struct Study1Options {
    std::size_t n_stimuli = 250;
    double window_ms = 100.0;
    SamplingParams params;
    std::uint64_t seed = 1;
    bool render = true;
    bool simulate = true;
    std::size_t participants = 25;
    double internal_noise_sd = 1.0;
    revcor::Dimension dimension = revcor::Dimension::Stretch;
    std::pair<std::string, std::string> labels{"peel", "pill"};
    bool holm = true;
    unsigned workers = 0;
};

struct Study1Result {
    BatchManifest manifest;
    std::vector<TrialRecord> trials;
    std::vector<std::string> participants;
    std::vector<revcor::Kernel> kernels;
    std::optional<revcor::KernelStats> stats;
    std::vector<double> template_weights;
    Json report;
};

// Writes <out>/manifest.json (+ WAVs), and when simulating <out>/trials.log.jsonl,
// <out>/kernels/<participant>.json and <out>/report.json.
Study1Result pipeline_study1(const AudioBuffer& base, const std::string& base_path,
                             const std::filesystem::path& out_dir, const Study1Options& opts = {});

Json kernel_stats_report(const std::vector<std::string>& participants, const std::vector<revcor::Kernel>& kernels,
                         const revcor::GroupTestOptions& opts, const std::vector<double>& template_weights = {});

struct Study2Options {
    double word_start_s = 0.0;
    double word_end_s = 0.0;
    std::string target = "peel";
    std::string other = "pill";
    std::uint64_t seed = 1;
    bool simulate = true;
    std::size_t participants = 25;
    std::size_t trials_per_level = 20;
    double listener_intercept = 1.196;  // logit of 0.768 correct at level 0
    double listener_slope = -0.585;     // reaches 0.984 at level -5
};

struct Study2Result {
    StimulusTable table;
    ExperimentConfig config;
    std::vector<TrialRecord> trials;
    std::optional<AccuracyCurve> curve;
};

// Renders the 11 scissor levels to <out>/audio/scissor_<k>.wav and writes
// stimuli.json, experiment.json and, when simulating, trials.log.jsonl and curve.json.
Study2Result pipeline_study2(const AudioBuffer& base, const std::filesystem::path& out_dir,
                             const Study2Options& opts);

struct Study3Options {
    PlanOptions plan;
    bool distractors = true;
    std::string experiment_id = "study3";
    std::uint64_t seed = 1;
    Phonemizer phonemizer;
};

struct Study3Result {
    std::vector<std::pair<std::string, DurationPlan>> plans;  // file stem, plan
    StimulusTable table;
    std::optional<ExperimentConfig> config;  // only with distractors
};

// Plans every sentence under the four strategies (and its distractor under
// baseline). Writes <out>/plans/<stem>.json, <out>/stimuli.json and
// <out>/experiment.json.
Study3Result pipeline_study3(const std::vector<Sentence>& sentences, const WordList& words,
                             const std::filesystem::path& out_dir, const Study3Options& opts = {});

// "in his talk he kept using X, but I'm pretty sure he meant Y"
std::string masked_prompt(const std::string& flagged_text);

Json mos_ui_strings();

}  // namespace ratesculpt

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ratesculpt/corpus.hpp"
#include "ratesculpt/json_io.hpp"
#include "ratesculpt/stats.hpp"
#include "ratesculpt/trial_log.hpp"

namespace ratesculpt {

enum class Outcome { Correct, InPairError, OutOfPairError };

std::string_view to_string(Outcome o);

struct ScoredResponse {
    Outcome outcome = Outcome::Correct;
    std::string truth;
    std::string selected;
};

// Comparison is case-insensitive and ignores edge punctuation.
ScoredResponse score_response(std::string_view truth, std::string_view selected, const WordPair& pair);

// What the experiment knows about each rendered stimulus.
struct StimulusInfo {
    std::string stimulus_id;
    std::vector<std::string> targets;  // spoken target words, in order
    std::string condition;             // strategy name, "distractor", or a scissor level
    std::optional<int> level;
    bool distractor = false;
    std::string sentence_type;  // "single" or "double"
    std::string wav_path;       // relative to the table's directory
    std::string text;           // flagged sentence

    bool operator==(const StimulusInfo&) const = default;
};

struct StimulusTable {
    std::vector<StimulusInfo> stimuli;

    const StimulusInfo& at(std::string_view id) const;  // NotFound
    const StimulusInfo* find(std::string_view id) const;
};

Json stimulus_table_to_json(const StimulusTable& table);
StimulusTable stimulus_table_from_json(const Json& j);
StimulusTable load_stimulus_table(const std::filesystem::path& path);

struct ScoredTarget {
    std::string response_key;  // groups the targets of one sentence presentation
    std::string strategy;
    std::string vowel_class;    // "tense" or "lax" for the spoken word
    std::string sentence_type;  // "single" or "double"
    bool distractor = false;
    ScoredResponse response;
};

std::vector<ScoredTarget> score_trials(std::span<const TrialRecord> trials, const StimulusTable& table,
                                       const WordList& words);

enum class WerUnit { Target, Sentence };
enum class GroupBy { Strategy, StrategyVowelClass, StrategySentenceType };

struct WerRow {
    std::vector<std::string> group;
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t in_pair = 0;
    std::size_t out_of_pair = 0;

    std::size_t errors() const noexcept { return total - correct; }
    double wer() const;  // percent; only rows with total > 0 exist
};

// Rows sorted by group key. Distractor presentations are excluded unless
// `distractors` is set, in which case only they are counted.
std::vector<WerRow> wer_table(std::span<const ScoredTarget> scored, WerUnit unit, GroupBy by,
                              bool distractors = false);

std::optional<double> wer_percent(std::size_t correct, std::size_t total);

struct WerComparison {
    std::string a, b;
    stats::TestResult test;  // chi-square on errors vs correct
};

std::vector<WerComparison> pairwise_chi_square(std::span<const WerRow> rows, bool yates = false);

struct WerReport {
    std::vector<WerRow> target_by_strategy;
    std::vector<WerRow> sentence_by_strategy;
    std::vector<WerRow> target_by_vowel_class;
    std::vector<WerRow> target_by_sentence_type;
    std::vector<WerRow> distractor_target;
    std::vector<WerRow> distractor_sentence;
    std::vector<WerComparison> strategy_comparisons;  // target-level chi-square
};

WerReport wer_report(std::span<const ScoredTarget> scored);
Json wer_report_to_json(const WerReport& report);
std::string wer_rows_to_tsv(std::span<const WerRow> rows, const std::string& table_name);
std::string wer_report_to_tsv(const WerReport& report);

// participant -> level -> accuracy. Returns the group mean of (accuracy - baseline)
// per level. A participant without the baseline level is InvalidInput.
std::map<double, double> normalize_accuracy(const std::map<std::string, std::map<double, double>>& accuracy,
                                            double baseline_level = 0.0);

struct LevelTrial {
    std::string participant;
    double level = 0.0;
    bool correct = false;
};

struct CurvePoint {
    double level = 0.0;
    double mean_normalized = 0.0;
    std::size_t participants = 0;
    std::optional<stats::TestResult> test;  // one-sample t against 0
    std::string skipped;                    // reason when test is absent
    double adjusted_p = 1.0;
    bool significant = false;
};

struct AccuracyCurve {
    double baseline_level = 0.0;
    std::vector<CurvePoint> points;  // baseline included with value 0
    std::optional<stats::LogisticFit> fit;
    std::string fit_skipped;
};

struct CurveOptions {
    double baseline_level = 0.0;
    double alpha = 0.05;
    stats::LogisticOptions logistic;
};

AccuracyCurve accuracy_curve(std::span<const LevelTrial> trials, const CurveOptions& opts = {});
std::vector<LevelTrial> level_trials(std::span<const TrialRecord> trials, const StimulusTable& table);
Json curve_to_json(const AccuracyCurve& curve);

struct MosObservation {
    std::string participant;
    std::string strategy;
    MosRecord mos;
};

struct MosSummary {
    std::string strategy;
    std::string scale;
    std::size_t n = 0;
    double median = 0.0;
    double mean = 0.0;
};

struct MosComparison {
    std::string scale;
    std::string a, b;
    std::size_t n_pairs = 0;
    std::optional<stats::TestResult> test;  // Wilcoxon on per-participant means
    std::string skipped;                    // "InsufficientData" or "NoVariation"
    double adjusted_p = 1.0;
    bool significant = false;
};

struct MosReport {
    std::vector<MosSummary> summaries;
    std::vector<MosComparison> comparisons;
};

// Holm is applied within each scale over the strategy pairs that could be tested.
MosReport mos_aggregate(std::span<const MosObservation> observations, double alpha = 0.05);
std::vector<MosObservation> mos_observations(std::span<const TrialRecord> trials, const StimulusTable& table);
Json mos_report_to_json(const MosReport& report);

class TranscriptionClient {
public:
    virtual ~TranscriptionClient() = default;
    // Throws Error(ExternalService) on failure.
    virtual std::string transcribe(const std::filesystem::path& wav) = 0;
};

// POSTs the WAV as multipart field "file" to the endpoint. Accepts a JSON body
// with a "text" member or a plain-text body.
class HttpTranscriptionClient : public TranscriptionClient {
public:
    explicit HttpTranscriptionClient(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(30));
    std::string transcribe(const std::filesystem::path& wav) override;

    // RATESCULPT_ASR_URL, or nullptr when unset.
    static std::unique_ptr<HttpTranscriptionClient> from_environment(
        std::chrono::milliseconds timeout = std::chrono::seconds(30));

private:
    std::string host_;
    std::string path_;
    std::chrono::milliseconds timeout_;
};

struct AsrRecord {
    std::string stimulus_id;
    std::string strategy;
    bool ok = false;
    std::string transcript;
    std::string error;
    std::vector<ScoredResponse> targets;
    double transcript_wer = 0.0;  // word-level edit distance over the whole sentence, percent
};

struct AsrReport {
    std::vector<AsrRecord> records;  // table order
    WerReport wer;
};

// Word-level alignment of a transcript against the expected sentence. Returns
// the transcript word aligned to each target ("" when the target was deleted)
// and the edit distance.
struct Alignment {
    std::vector<std::string> aligned_targets;
    std::size_t edits = 0;
};

Alignment align_targets(const std::string& flagged_text, const std::string& transcript, const WordList& words);

AsrReport transcribe_eval(const StimulusTable& table, const std::filesystem::path& base_dir,
                          TranscriptionClient& client, const WordList& words, unsigned concurrency = 4);
Json asr_report_to_json(const AsrReport& report);

}  // namespace ratesculpt

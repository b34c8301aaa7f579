#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ratesculpt/json_io.hpp"

namespace ratesculpt {

struct Token {
    std::string text;      // the word itself, markup and edge punctuation removed
    bool flagged = false;
    std::string leading;   // punctuation glued to the front
    std::string trailing;  // punctuation glued to the back, e.g. the comma in "!cooed!,"

    bool operator==(const Token&) const = default;
};

struct FlaggedText {
    std::string raw;
    std::vector<Token> tokens;

    std::vector<std::size_t> flagged_indices() const;
    std::string plain() const;  // raw with the flag marks removed
};

// `!word!` marks a target. A '!' without a partner is a ParseErrorAt.
FlaggedText parse_flagged(std::string_view raw);

// Rebuilds markup for the given token indices on top of plain text.
std::string flag_words(const FlaggedText& text, const std::vector<std::size_t>& indices);

enum class Stress { None, Primary, Secondary };

struct Phoneme {
    std::string symbol;  // IPA, including length marks (e.g. "iː")
    Stress stress = Stress::None;

    bool operator==(const Phoneme&) const = default;
};

struct PhonemeSeq {
    std::vector<Phoneme> items;
    std::vector<std::pair<std::size_t, std::size_t>> word_spans;  // [begin, end) per token

    void validate() const;
};

// Splits an IPA string into items. Diphthongs and affricates are one item,
// length and diacritic marks stick to the previous item, stress marks to the next.
std::vector<Phoneme> split_ipa(std::string_view ipa);

bool is_vowel(std::string_view symbol);

// Returns an IPA string or nullopt. Only consulted for words missing from the lexicon.
using Phonemizer = std::function<std::optional<std::string>(const std::string& word)>;

// Runs `<command> <word>` and reads the IPA from stdout (e.g. "espeak-ng -q --ipa -v en-us").
Phonemizer command_phonemizer(std::string command);

std::optional<std::string> lexicon_lookup(std::string_view word);
std::vector<std::string> lexicon_words();

PhonemeSeq phonemize(const FlaggedText& text, const Phonemizer& fallback = {});

enum class VowelClass { Tense, Lax, MixedTenseDominant, MixedLaxDominant, Neither };

std::string_view to_string(VowelClass c);

VowelClass classify_word(const PhonemeSeq& seq, std::size_t word_index);

enum class Strategy { Proposed, Baseline, StretchEverywhere, StretchEveryTarget };

inline constexpr Strategy kAllStrategies[] = {Strategy::Proposed, Strategy::Baseline, Strategy::StretchEverywhere,
                                              Strategy::StretchEveryTarget};

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

struct PlanOptions {
    double base_rate = 0.75;
    double target_stretch = 1.6;  // relative to base_rate; 0.75 * 1.6 = 1.2
    std::size_t ramp_items = 6;
};

struct PlanItem {
    std::string phoneme;
    Stress stress = Stress::None;
    std::size_t word_index = 0;
    double multiplier = 1.0;

    bool operator==(const PlanItem&) const = default;
};

struct DurationPlan {
    std::string text;
    Strategy strategy = Strategy::Proposed;
    double base_rate = 0.75;
    double target_stretch = 1.6;
    std::size_t ramp_items = 6;
    std::vector<PlanItem> items;
    std::vector<std::string> notes;

    std::vector<double> multipliers() const;
    double total() const;

    bool operator==(const DurationPlan&) const = default;
};

DurationPlan plan(const PhonemeSeq& seq, const FlaggedText& text, Strategy strategy, const PlanOptions& opts = {});
DurationPlan plan_text(std::string_view raw, Strategy strategy, const PlanOptions& opts = {},
                       const Phonemizer& fallback = {});

Json plan_to_json(const DurationPlan& plan);
DurationPlan plan_from_json(const Json& j);
std::string emit_plan(const DurationPlan& plan);
DurationPlan parse_plan(const std::string& text);

}  // namespace ratesculpt

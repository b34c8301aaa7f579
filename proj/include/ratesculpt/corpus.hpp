#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ratesculpt/json_io.hpp"

namespace ratesculpt {

struct WordPair {
    std::string vowel_pair;  // "i-ɪ", "u-ʊ" or "ɑ-ʌ"
    std::string tense_word;
    std::string lax_word;
    std::array<std::string, 2> distractors;  // same frame with another vowel, then an unrelated word

    void validate() const;
};

struct WordList {
    std::vector<WordPair> pairs;
    std::map<std::string, std::string> homophones;  // spelling variant -> canonical word

    void validate() const;
    const WordPair* find(std::string_view word) const;
    std::string opposite(std::string_view word) const;  // InvalidInput if not a pair word
    bool is_tense(std::string_view word) const;

    // Lower-cased, edge punctuation stripped, homophones mapped.
    std::string normalize(std::string_view word) const;

    // Correct word, its pair partner, then the two distractors.
    std::array<std::string, 4> options(std::string_view word) const;
};

struct Sentence {
    std::string sentence_id;
    std::string type;  // "single" or "double-..."
    std::string text;  // with !target! markup

    bool is_double() const { return type != "single"; }
};

WordList word_list_from_json(const Json& j);
WordList load_word_list(const std::filesystem::path& path);
std::vector<Sentence> sentences_from_json(const Json& j);
std::vector<Sentence> load_sentences(const std::filesystem::path& path);

std::vector<std::string> target_words(const std::string& flagged_text);

// Replaces every flagged target with the opposite word of its pair.
std::string swap_targets(const std::string& flagged_text, const WordList& words);

std::string strip_punctuation_lower(std::string_view word);

}  // namespace ratesculpt

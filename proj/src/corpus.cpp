#include "ratesculpt/corpus.hpp"

#include <algorithm>
#include <cctype>

#include "ratesculpt/error.hpp"
#include "ratesculpt/planner.hpp"

namespace ratesculpt {

void WordPair::validate() const {
    require(!tense_word.empty() && !lax_word.empty(), "word pair needs both words");
    require(tense_word != lax_word, "pair words must differ: " + tense_word);
    for (const auto& d : distractors)
        require(!d.empty() && d != tense_word && d != lax_word, "distractor must differ from the pair: " + d);
    require(distractors[0] != distractors[1], "distractors must differ");
}

void WordList::validate() const {
    for (const auto& p : pairs) p.validate();
    std::vector<std::string> all;
    for (const auto& p : pairs) {
        all.push_back(p.tense_word);
        all.push_back(p.lax_word);
    }
    std::sort(all.begin(), all.end());
    require(std::adjacent_find(all.begin(), all.end()) == all.end(), "a word appears in two pairs");
}

std::string strip_punctuation_lower(std::string_view word) {
    std::string out;
    for (char c : word) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x80 && (std::ispunct(u) || std::isspace(u)) && c != '\'') continue;
        out += static_cast<char>(std::tolower(u));
    }
    while (!out.empty() && out.back() == '\'') out.pop_back();
    while (!out.empty() && out.front() == '\'') out.erase(out.begin());
    return out;
}

std::string WordList::normalize(std::string_view word) const {
    auto w = strip_punctuation_lower(word);
    const auto it = homophones.find(w);
    return it == homophones.end() ? w : it->second;
}

const WordPair* WordList::find(std::string_view word) const {
    for (const auto& p : pairs)
        if (p.tense_word == word || p.lax_word == word) return &p;
    return nullptr;
}

std::string WordList::opposite(std::string_view word) const {
    const auto* p = find(word);
    require(p != nullptr, "not a pair word: " + std::string(word));
    return p->tense_word == word ? p->lax_word : p->tense_word;
}

bool WordList::is_tense(std::string_view word) const {
    const auto* p = find(word);
    require(p != nullptr, "not a pair word: " + std::string(word));
    return p->tense_word == word;
}

std::array<std::string, 4> WordList::options(std::string_view word) const {
    const auto* p = find(word);
    require(p != nullptr, "not a pair word: " + std::string(word));
    return {std::string(word), opposite(word), p->distractors[0], p->distractors[1]};
}

WordList word_list_from_json(const Json& j) {
    try {
        WordList w;
        for (const auto& e : j.at("pairs")) {
            WordPair p;
            p.vowel_pair = e.at("vowel_pair").get<std::string>();
            p.tense_word = e.at("tense_word").get<std::string>();
            p.lax_word = e.at("lax_word").get<std::string>();
            const auto d = e.at("distractors").get<std::vector<std::string>>();
            require(d.size() == 2, "each pair needs exactly two distractors");
            p.distractors = {d[0], d[1]};
            w.pairs.push_back(std::move(p));
        }
        if (j.contains("homophones")) w.homophones = j.at("homophones").get<std::map<std::string, std::string>>();
        w.validate();
        return w;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed word list: ") + e.what());
    }
}

WordList load_word_list(const std::filesystem::path& path) { return word_list_from_json(read_json_file(path)); }

std::vector<Sentence> sentences_from_json(const Json& j) {
    try {
        std::vector<Sentence> out;
        for (const auto& e : j.at("sentences")) {
            Sentence s{e.at("sentence_id").get<std::string>(), e.at("type").get<std::string>(),
                       e.at("text").get<std::string>()};
            const auto n = parse_flagged(s.text).flagged_indices().size();
            require(n == (s.is_double() ? 2u : 1u), "sentence " + s.sentence_id + " has the wrong number of targets");
            out.push_back(std::move(s));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed sentence list: ") + e.what());
    }
}

std::vector<Sentence> load_sentences(const std::filesystem::path& path) {
    return sentences_from_json(read_json_file(path));
}

std::vector<std::string> target_words(const std::string& flagged_text) {
    const auto text = parse_flagged(flagged_text);
    std::vector<std::string> out;
    for (auto i : text.flagged_indices()) out.push_back(strip_punctuation_lower(text.tokens[i].text));
    return out;
}

std::string swap_targets(const std::string& flagged_text, const WordList& words) {
    auto text = parse_flagged(flagged_text);
    for (auto i : text.flagged_indices()) text.tokens[i].text = words.opposite(strip_punctuation_lower(text.tokens[i].text));
    return flag_words(text, text.flagged_indices());
}

}  // namespace ratesculpt

#include "ratesculpt/planner.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <memory>
#include <sys/wait.h>

#include "ratesculpt/error.hpp"

namespace ratesculpt {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Anything that is not whitespace, a letter/digit, an apostrophe or a UTF-8 byte.
bool is_punct(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u) && c != '\'' && c != '!';
}

std::size_t utf8_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 1;
}

std::vector<std::string> codepoints(std::string_view s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size();) {
        const auto n = std::min(utf8_length(static_cast<unsigned char>(s[i])), s.size() - i);
        out.emplace_back(s.substr(i, n));
        i += n;
    }
    return out;
}

constexpr std::string_view kPrimary = "ˈ";
constexpr std::string_view kSecondary = "ˌ";
constexpr std::string_view kTieBar = "͡";
constexpr std::string_view kJoiner = "‍";

constexpr std::array<std::string_view, 11> kUnits{"aɪ", "aʊ", "eɪ", "oʊ", "ɔɪ", "əʊ", "eə", "ɪə", "ʊə", "tʃ", "dʒ"};

constexpr std::array<std::string_view, 31> kVowels{"i", "y", "ɨ", "ʉ", "ɯ", "u", "ɪ", "ʏ", "ʊ", "e", "ø",
                                                   "ɘ", "ɵ", "ɤ", "o", "ə", "ɛ", "œ", "ɜ", "ɞ", "ʌ", "ɔ",
                                                   "æ", "ɐ", "a", "ɶ", "ɑ", "ɒ", "ɚ", "ɝ", "ᵻ"};

constexpr std::array<std::string_view, 3> kTense{"i", "u", "ɑ"};
constexpr std::array<std::string_view, 3> kLax{"ɪ", "ʊ", "ʌ"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view s) {
    return std::find(set.begin(), set.end(), s) != set.end();
}

// Length marks, modifier letters and combining diacritics.
bool attaches_to_previous(const std::string& cp) {
    if (cp == "ː" || cp == "ˑ") return true;
    if (cp.size() == 2) {
        const auto b0 = static_cast<unsigned char>(cp[0]), b1 = static_cast<unsigned char>(cp[1]);
        const unsigned v = ((b0 & 0x1Fu) << 6) | (b1 & 0x3Fu);
        if (v >= 0x300 && v <= 0x36F) return true;  // combining diacritics
        if (v >= 0x2B0 && v <= 0x2B8) return true;  // superscript modifiers (ʰ, ʲ, ʷ...)
    }
    return false;
}

std::string base_vowel(const std::string& symbol) {
    std::string out;
    for (const auto& cp : codepoints(symbol))
        if (!attaches_to_previous(cp)) out += cp;
    return out;
}

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string normalize_apostrophes(std::string s) {
    const std::string curly = "’";
    for (std::size_t p; (p = s.find(curly)) != std::string::npos;) s.replace(p, curly.size(), "'");
    return s;
}

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (is_space(c)) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace

std::vector<std::size_t> FlaggedText::flagged_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i].flagged) out.push_back(i);
    return out;
}

std::string FlaggedText::plain() const {
    std::string out;
    for (char c : raw)
        if (c != '!') out += c;
    return out;
}

FlaggedText parse_flagged(std::string_view raw) {
    FlaggedText out;
    out.raw = std::string(raw);
    std::size_t i = 0;
    const auto n = raw.size();
    while (i < n) {
        while (i < n && is_space(raw[i])) ++i;
        if (i >= n) break;

        Token tok;
        while (i < n && is_punct(raw[i])) tok.leading += raw[i++];
        if (i < n && raw[i] == '!') {
            const auto open = i;
            const auto close = raw.find('!', open + 1);
            if (close == std::string_view::npos) throw ParseErrorAt(open, "unbalanced '!'");
            std::string inner(raw.substr(open + 1, close - open - 1));
            const auto words = split_words(inner);
            if (words.empty()) throw ParseErrorAt(open, "empty flagged span");
            tok.text = words.front();
            for (std::size_t w = 1; w < words.size(); ++w) tok.text += " " + words[w];
            tok.flagged = true;
            i = close + 1;
            while (i < n && !is_space(raw[i])) {
                if (!is_punct(raw[i])) throw ParseErrorAt(i, "flagged word must end at a word boundary");
                tok.trailing += raw[i++];
            }
        } else {
            std::string core;
            while (i < n && !is_space(raw[i]) && raw[i] != '!') core += raw[i++];
            std::size_t cut = core.size();
            while (cut > 0 && is_punct(core[cut - 1])) --cut;
            tok.trailing = core.substr(cut);
            tok.text = core.substr(0, cut);
            if (tok.text.empty()) {
                // A bare punctuation token ("-") belongs to the previous word.
                if (!out.tokens.empty()) out.tokens.back().trailing += " " + tok.leading + tok.trailing;
                continue;
            }
        }
        out.tokens.push_back(std::move(tok));
    }
    return out;
}

std::string flag_words(const FlaggedText& text, const std::vector<std::size_t>& indices) {
    std::string out;
    for (std::size_t i = 0; i < text.tokens.size(); ++i) {
        const auto& t = text.tokens[i];
        if (i) out += ' ';
        const bool flag = std::find(indices.begin(), indices.end(), i) != indices.end();
        out += t.leading;
        out += flag ? "!" + t.text + "!" : t.text;
        out += t.trailing;
    }
    return out;
}

bool is_vowel(std::string_view symbol) {
    const auto cps = codepoints(symbol);
    return !cps.empty() && contains(kVowels, cps.front());
}

std::vector<Phoneme> split_ipa(std::string_view ipa) {
    std::vector<Phoneme> out;
    Stress pending = Stress::None;
    bool join_next = false;
    for (const auto& cp : codepoints(ipa)) {
        if (cp == kPrimary) {
            pending = Stress::Primary;
        } else if (cp == kSecondary) {
            if (pending == Stress::None) pending = Stress::Secondary;
        } else if (cp == kTieBar || cp == kJoiner) {
            join_next = !out.empty();
        } else if (cp.size() == 1 && !std::isalpha(static_cast<unsigned char>(cp[0]))) {
            join_next = false;  // spaces, hyphens and other separators
        } else if (attaches_to_previous(cp) && !out.empty()) {
            out.back().symbol += cp;
        } else if (join_next || (pending == Stress::None && !out.empty() && contains(kUnits, out.back().symbol + cp))) {
            out.back().symbol += cp;
            join_next = false;
        } else {
            out.push_back({cp, pending});
            pending = Stress::None;
        }
    }
    return out;
}

void PhonemeSeq::validate() const {
    std::size_t expect = 0;
    for (const auto& [b, e] : word_spans) {
        require(b == expect && e > b, "word spans must be contiguous and non-empty");
        const auto primaries = std::count_if(items.begin() + static_cast<std::ptrdiff_t>(b),
                                             items.begin() + static_cast<std::ptrdiff_t>(e),
                                             [](const Phoneme& p) { return p.stress == Stress::Primary; });
        require(primaries <= 1, "at most one primary stress per word");
        expect = e;
    }
    require(expect == items.size(), "word spans must cover every phoneme");
}

Phonemizer command_phonemizer(std::string command) {
    return [command = std::move(command)](const std::string& word) -> std::optional<std::string> {
        for (char c : word)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-'))
                return std::nullopt;
        std::string quoted = "'";
        for (char c : word) quoted += c == '\'' ? std::string("'\\''") : std::string(1, c);
        quoted += "'";
        const std::string cmd = command + " " + quoted + " 2>/dev/null";
        FILE* pipe = ::popen(cmd.c_str(), "r");
        if (!pipe) fail(ErrorCode::ExternalService, "could not start phonemizer: " + command);
        std::string output;
        std::array<char, 256> buf{};
        while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) output += buf.data();
        const int status = ::pclose(pipe);
        if (status != 0) fail(ErrorCode::ExternalService, "phonemizer failed on '" + word + "': " + command);
        while (!output.empty() && is_space(output.back())) output.pop_back();
        std::size_t start = 0;
        while (start < output.size() && is_space(output[start])) ++start;
        output.erase(0, start);
        if (output.empty()) return std::nullopt;
        return output;
    };
}

PhonemeSeq phonemize(const FlaggedText& text, const Phonemizer& fallback) {
    PhonemeSeq seq;
    for (const auto& tok : text.tokens) {
        const auto begin = seq.items.size();
        for (const auto& w : split_words(tok.text)) {
            auto key = lower_ascii(normalize_apostrophes(w));
            while (!key.empty() && is_punct(key.back())) key.pop_back();
            auto ipa = lexicon_lookup(key);
            if (!ipa && fallback) ipa = fallback(key);
            if (!ipa) fail(ErrorCode::UnknownWord, "no pronunciation for '" + key + "'");
            auto items = split_ipa(*ipa);
            if (items.empty()) fail(ErrorCode::UnknownWord, "empty pronunciation for '" + key + "'");
            seq.items.insert(seq.items.end(), items.begin(), items.end());
        }
        // Phonemizers can mark several primaries in a compound; keep the first.
        bool seen = false;
        for (auto i = begin; i < seq.items.size(); ++i) {
            if (seq.items[i].stress != Stress::Primary) continue;
            if (seen) seq.items[i].stress = Stress::Secondary;
            seen = true;
        }
        seq.word_spans.emplace_back(begin, seq.items.size());
    }
    return seq;
}

std::string_view to_string(VowelClass c) {
    switch (c) {
        case VowelClass::Tense: return "tense";
        case VowelClass::Lax: return "lax";
        case VowelClass::MixedTenseDominant: return "mixed-tense-dominant";
        case VowelClass::MixedLaxDominant: return "mixed-lax-dominant";
        case VowelClass::Neither: return "neither";
    }
    return "neither";
}

VowelClass classify_word(const PhonemeSeq& seq, std::size_t word_index) {
    require(word_index < seq.word_spans.size(), "word index out of range");
    const auto [b, e] = seq.word_spans[word_index];
    bool tense = false, lax = false;
    std::optional<std::size_t> stress_at;
    for (auto i = b; i < e; ++i) {
        const auto base = base_vowel(seq.items[i].symbol);
        tense |= contains(kTense, base);
        lax |= contains(kLax, base);
        if (seq.items[i].stress == Stress::Primary && !stress_at) stress_at = i;
    }
    if (tense && !lax) return VowelClass::Tense;
    if (lax && !tense) return VowelClass::Lax;
    if (!tense) return VowelClass::Neither;

    // The stressed vowel is the first vowel at or after the primary mark.
    if (stress_at) {
        for (auto i = *stress_at; i < e; ++i) {
            if (!is_vowel(seq.items[i].symbol)) continue;
            if (contains(kTense, base_vowel(seq.items[i].symbol))) return VowelClass::MixedTenseDominant;
            break;
        }
    }
    return VowelClass::MixedLaxDominant;
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Proposed: return "proposed";
        case Strategy::Baseline: return "baseline";
        case Strategy::StretchEverywhere: return "stretch-everywhere";
        case Strategy::StretchEveryTarget: return "stretch-every-target";
    }
    return "proposed";
}

Strategy parse_strategy(std::string_view s) {
    for (auto st : kAllStrategies)
        if (to_string(st) == s) return st;
    fail(ErrorCode::InvalidInput, "unknown strategy '" + std::string(s) + "'");
}

std::vector<double> DurationPlan::multipliers() const {
    std::vector<double> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.multiplier);
    return out;
}

double DurationPlan::total() const {
    double s = 0.0;
    for (const auto& it : items) s += it.multiplier;
    return s;
}

DurationPlan plan(const PhonemeSeq& seq, const FlaggedText& text, Strategy strategy, const PlanOptions& opts) {
    seq.validate();
    require(seq.word_spans.size() == text.tokens.size(), "phoneme spans do not match the token count");
    require(opts.base_rate > 0.0 && opts.target_stretch > 0.0, "rates must be positive");

    DurationPlan p;
    p.text = text.raw;
    p.strategy = strategy;
    p.base_rate = quantize(opts.base_rate);
    p.target_stretch = quantize(opts.target_stretch);
    p.ramp_items = opts.ramp_items;
    const double base = p.base_rate;
    const double peak = base * p.target_stretch;

    std::vector<double> m(seq.items.size(), base);
    if (strategy == Strategy::StretchEverywhere) std::fill(m.begin(), m.end(), peak);

    if (strategy == Strategy::Proposed || strategy == Strategy::StretchEveryTarget) {
        const auto flagged = text.flagged_indices();
        std::vector<bool> stretched(flagged.size());
        for (std::size_t k = 0; k < flagged.size(); ++k) {
            const auto cls = classify_word(seq, flagged[k]);
            stretched[k] = strategy == Strategy::StretchEveryTarget || cls == VowelClass::Tense ||
                           cls == VowelClass::MixedTenseDominant;
            if (strategy == Strategy::Proposed && cls == VowelClass::MixedLaxDominant)
                p.notes.push_back("target '" + text.tokens[flagged[k]].text +
                                  "' is mixed-lax-dominant; left unstretched");
        }

        // Ramps stop at neighbouring targets. When both neighbours ramp into the
        // same gap, each gets half of it so ramps never overlap.
        const auto ramp_length = [&](std::size_t gap, bool shared) {
            return std::min(opts.ramp_items, shared ? gap / 2 : gap);
        };
        const auto ramp_value = [&](std::size_t i, std::size_t r) {
            return base + static_cast<double>(r + 1 - i) / static_cast<double>(r + 1) * (peak - base);
        };

        for (std::size_t k = 0; k < flagged.size(); ++k) {
            if (!stretched[k]) continue;
            const auto [s, e] = seq.word_spans[flagged[k]];
            for (auto i = s; i < e; ++i) m[i] = peak;

            const std::size_t prev_end = k > 0 ? seq.word_spans[flagged[k - 1]].second : 0;
            const auto r_pre = ramp_length(s - prev_end, k > 0 && stretched[k - 1]);
            for (std::size_t i = 1; i <= r_pre; ++i) m[s - i] = ramp_value(i, r_pre);

            const std::size_t next_begin =
                k + 1 < flagged.size() ? seq.word_spans[flagged[k + 1]].first : seq.items.size();
            const auto r_post = ramp_length(next_begin - e, k + 1 < flagged.size() && stretched[k + 1]);
            for (std::size_t i = 1; i <= r_post; ++i) m[e + i - 1] = ramp_value(i, r_post);
        }
    }

    std::size_t word = 0;
    for (std::size_t i = 0; i < seq.items.size(); ++i) {
        while (i >= seq.word_spans[word].second) ++word;
        p.items.push_back({seq.items[i].symbol, seq.items[i].stress, word, quantize(m[i])});
    }
    return p;
}

DurationPlan plan_text(std::string_view raw, Strategy strategy, const PlanOptions& opts, const Phonemizer& fallback) {
    const auto text = parse_flagged(raw);
    return plan(phonemize(text, fallback), text, strategy, opts);
}

namespace {

std::string_view stress_name(Stress s) {
    switch (s) {
        case Stress::Primary: return "primary";
        case Stress::Secondary: return "secondary";
        case Stress::None: return "none";
    }
    return "none";
}

Stress parse_stress(const std::string& s) {
    if (s == "primary") return Stress::Primary;
    if (s == "secondary") return Stress::Secondary;
    if (s == "none") return Stress::None;
    fail(ErrorCode::ParseError, "unknown stress '" + s + "'");
}

}  // namespace

Json plan_to_json(const DurationPlan& p) {
    Json j;
    j["text"] = p.text;
    j["strategy"] = std::string(to_string(p.strategy));
    j["base_rate"] = p.base_rate;
    j["target_stretch"] = p.target_stretch;
    j["ramp_items"] = p.ramp_items;
    Json items = Json::array();
    for (const auto& it : p.items) {
        Json e;
        e["phoneme"] = it.phoneme;
        e["stress"] = std::string(stress_name(it.stress));
        e["word_index"] = it.word_index;
        e["multiplier"] = it.multiplier;
        items.push_back(std::move(e));
    }
    j["items"] = std::move(items);
    if (!p.notes.empty()) j["notes"] = p.notes;
    return j;
}

DurationPlan plan_from_json(const Json& j) {
    try {
        DurationPlan p;
        p.text = j.at("text").get<std::string>();
        p.strategy = parse_strategy(j.at("strategy").get<std::string>());
        p.base_rate = j.at("base_rate").get<double>();
        p.target_stretch = j.at("target_stretch").get<double>();
        p.ramp_items = j.at("ramp_items").get<std::size_t>();
        for (const auto& e : j.at("items")) {
            p.items.push_back({e.at("phoneme").get<std::string>(), parse_stress(e.at("stress").get<std::string>()),
                               e.at("word_index").get<std::size_t>(), e.at("multiplier").get<double>()});
            require(p.items.back().multiplier > 0.0, "multipliers must be positive");
        }
        if (j.contains("notes")) p.notes = j.at("notes").get<std::vector<std::string>>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed plan: ") + e.what());
    }
}

std::string emit_plan(const DurationPlan& p) { return dump_canonical(plan_to_json(p)) + "\n"; }

DurationPlan parse_plan(const std::string& text) {
    try {
        return plan_from_json(Json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::ParseError, std::string("malformed plan: ") + e.what());
    }
}

}  // namespace ratesculpt

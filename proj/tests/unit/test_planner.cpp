#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "ratesculpt/corpus.hpp"
#include "ratesculpt/error.hpp"
#include "ratesculpt/planner.hpp"
#include "ratesculpt/rng.hpp"

using namespace ratesculpt;

namespace {

const std::filesystem::path kSource = RATESCULPT_SOURCE_DIR;

std::vector<double> word_multipliers(const DurationPlan& p, std::size_t word) {
    std::vector<double> out;
    for (const auto& it : p.items)
        if (it.word_index == word) out.push_back(it.multiplier);
    return out;
}

// Items strictly before / after a word, nearest first.
std::vector<double> before(const DurationPlan& p, std::size_t word, std::size_t n) {
    std::size_t first = 0;
    while (p.items[first].word_index != word) ++first;
    std::vector<double> out;
    for (std::size_t k = 1; k <= n && k <= first; ++k) out.push_back(p.items[first - k].multiplier);
    return out;
}

void check_golden(const std::string& name, const DurationPlan& p) {
    const auto path = kSource / "tests" / "golden" / name;
    const auto text = emit_plan(p);
    if (std::getenv("RATESCULPT_UPDATE_GOLDEN")) write_text_file(path, text);
    REQUIRE(std::filesystem::exists(path));
    CHECK(read_text_file(path) == text);
    CHECK(parse_plan(text) == p);
}

}  // namespace

TEST_CASE("parse_flagged") {
    const auto a = parse_flagged("I heard them say !peel!");
    REQUIRE(a.tokens.size() == 5);
    CHECK(a.flagged_indices() == std::vector<std::size_t>{4});
    CHECK(a.tokens[4].text == "peel");

    const auto b = parse_flagged("no flags here");
    CHECK(b.tokens.size() == 3);
    CHECK(b.flagged_indices().empty());

    const auto c = parse_flagged("he meant !cooed!, I think");
    REQUIRE(c.tokens.size() == 5);
    CHECK(c.flagged_indices() == std::vector<std::size_t>{2});
    CHECK(c.tokens[2].text == "cooed");
    CHECK(c.tokens[2].trailing == ",");
    CHECK(c.plain() == "he meant cooed, I think");

    const auto d = parse_flagged("\"quoted\" words.");
    CHECK(d.tokens[0].leading == "\"");
    CHECK(d.tokens[0].trailing == "\"");
    CHECK(d.tokens[1].trailing == ".");
}

TEST_CASE("unbalanced flags report the position") {
    try {
        parse_flagged("say !peel now");
        FAIL("expected a parse error");
    } catch (const ParseErrorAt& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(e.position() == 4);
    }
    CHECK_THROWS_AS(parse_flagged("!peel!! x"), ParseErrorAt);
    CHECK_THROWS_AS(parse_flagged("!!"), ParseErrorAt);
    CHECK_THROWS_AS(parse_flagged("!peel!s"), ParseErrorAt);
}

TEST_CASE("stripping and re-flagging is lossless") {
    for (const auto& raw : {"he meant !cooed!, I think", "I heard them say !peel!", "!kid! and !dull! to me"}) {
        const auto t = parse_flagged(raw);
        CHECK(flag_words(parse_flagged(t.plain()), t.flagged_indices()) == raw);
    }
}

TEST_CASE("split_ipa") {
    const auto m = split_ipa("mjˈuːzɪk");
    REQUIRE(m.size() == 6);
    CHECK(m[2].symbol == "uː");
    CHECK(m[2].stress == Stress::Primary);
    CHECK(m[0].stress == Stress::None);

    const auto say = split_ipa("sˈeɪ");
    REQUIRE(say.size() == 2);
    CHECK(say[1].symbol == "eɪ");

    const auto ch = split_ipa("tˈiːtʃɚ");
    REQUIRE(ch.size() == 4);
    CHECK(ch[2].symbol == "tʃ");

    const auto tie = split_ipa("t͡ʃ");
    REQUIRE(tie.size() == 1);
    CHECK(tie[0].symbol == "tʃ");  // tie bars are dropped so phonemizer output matches the lexicon

    // a stress mark before a syllable onset sticks to the consonant
    const auto pre = split_ipa("ˈmjuzɪk");
    CHECK(pre[0].stress == Stress::Primary);
    CHECK(split_ipa("kˌɑːnvɚsˈeɪʃən")[1].stress == Stress::Secondary);
}

TEST_CASE("classify_word") {
    const auto cls = [](const char* raw) {
        const auto t = parse_flagged(raw);
        return classify_word(phonemize(t), 0);
    };
    CHECK(cls("peel") == VowelClass::Tense);
    CHECK(cls("pill") == VowelClass::Lax);
    CHECK(cls("music") == VowelClass::MixedTenseDominant);
    CHECK(cls("say") == VowelClass::Neither);

    PhonemeSeq seq;
    seq.items = split_ipa("ˈmjuzɪk");
    seq.word_spans = {{0, seq.items.size()}};
    CHECK(classify_word(seq, 0) == VowelClass::MixedTenseDominant);
    seq.items = split_ipa("mjuzˈɪk");
    CHECK(classify_word(seq, 0) == VowelClass::MixedLaxDominant);
    seq.items = split_ipa("mjuzɪk");
    CHECK(classify_word(seq, 0) == VowelClass::MixedLaxDominant);
}

TEST_CASE("lexicon covers every pair word and every shipped sentence") {
    const auto words = load_word_list(kSource / "data" / "word_pairs.json");
    REQUIRE(words.pairs.size() == 18);
    for (const auto& p : words.pairs) {
        REQUIRE(lexicon_lookup(p.tense_word));
        REQUIRE(lexicon_lookup(p.lax_word));
        const auto tense = parse_flagged(p.tense_word), lax = parse_flagged(p.lax_word);
        CHECK(classify_word(phonemize(tense), 0) == VowelClass::Tense);
        CHECK(classify_word(phonemize(lax), 0) == VowelClass::Lax);
    }
    for (const auto& s : load_sentences(kSource / "data" / "sentences.json")) {
        CHECK_NOTHROW(phonemize(parse_flagged(s.text)));
        CHECK_NOTHROW(phonemize(parse_flagged(swap_targets(s.text, words))));
    }
}

TEST_CASE("unknown words") {
    const auto t = parse_flagged("the !zyzzyva!");
    try {
        phonemize(t);
        FAIL("expected UnknownWord");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownWord);
        CHECK(std::string(e.what()).find("zyzzyva") != std::string::npos);
    }
    int calls = 0;
    const Phonemizer fake = [&](const std::string& w) -> std::optional<std::string> {
        ++calls;
        if (w == "zyzzyva") return "zˈɪzɪvə";
        return std::nullopt;
    };
    const auto seq = phonemize(t, fake);
    CHECK(calls == 1);  // "the" comes from the lexicon
    CHECK(classify_word(seq, 1) == VowelClass::Lax);
}

TEST_CASE("command phonemizer") {
    const auto echo = command_phonemizer("printf 'pˈiːl\\n' ; true");
    CHECK(echo("anything") == std::optional<std::string>("pˈiːl"));
    CHECK_FALSE(command_phonemizer("printf ''")("x").has_value());
    CHECK_THROWS_AS(command_phonemizer("false")("x"), Error);
    CHECK_FALSE(echo("rm -rf").has_value());  // refuses non-word input
}

TEST_CASE("proposed plan on a tense target") {
    const auto p = plan_text("I heard them say !peel!", Strategy::Proposed);
    for (double m : word_multipliers(p, 4)) CHECK(m == doctest::Approx(1.2));
    // item i (counted away from the word) of 6: 0.75 + ((7 - i) / 7) * 0.45
    const std::vector<double> expect{1.135714, 1.071429, 1.007143, 0.942857, 0.878571, 0.814286};
    const auto ramp = before(p, 4, 6);
    REQUIRE(ramp.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(ramp[i] == doctest::Approx(expect[i]).epsilon(1e-9));
    for (std::size_t i = 0; i + 6 + 3 < p.items.size(); ++i) CHECK(p.items[i].multiplier == 0.75);
    check_golden("peel_proposed.json", p);
}

TEST_CASE("lax targets") {
    const auto p = plan_text("I heard them say !pill!", Strategy::Proposed);
    for (const auto& it : p.items) CHECK(it.multiplier == 0.75);
    check_golden("pill_proposed.json", p);

    const auto q = plan_text("I heard them say !pill!", Strategy::StretchEveryTarget);
    for (double m : word_multipliers(q, 4)) CHECK(m == doctest::Approx(1.2));
    check_golden("pill_stretch_every_target.json", q);
}

TEST_CASE("music is stretched through the stress rule") {
    const auto p = plan_text("I heard them say !music! twice", Strategy::Proposed);
    for (double m : word_multipliers(p, 4)) CHECK(m == doctest::Approx(1.2));
    check_golden("music_proposed.json", p);
}

TEST_CASE("baseline and stretch-everywhere") {
    const auto b = plan_text("I heard them say !peel!", Strategy::Baseline);
    CHECK(b.items.size() == 12);
    for (const auto& it : b.items) CHECK(it.multiplier == 0.75);
    check_golden("peel_baseline.json", b);
    const auto e = plan_text("I heard them say !peel!", Strategy::StretchEverywhere);
    for (const auto& it : e.items) CHECK(it.multiplier == doctest::Approx(1.2));
    check_golden("peel_stretch_everywhere.json", e);
    CHECK_THROWS_AS(parse_strategy("faster"), Error);
}

TEST_CASE("ramps stop at a neighbouring target") {
    // "to the" gives 4 items between the targets
    const auto p = plan_text("!peel! to the !pill!", Strategy::Proposed);
    const auto between = before(p, 3, 4);
    REQUIRE(between.size() == 4);
    // post ramp of peel truncated to 4 items: 0.75 + ((5 - i) / 5) * 0.45, read back toward peel
    const std::vector<double> post{1.11, 1.02, 0.93, 0.84};
    for (std::size_t i = 0; i < 4; ++i) CHECK(between[3 - i] == doctest::Approx(post[i]).epsilon(1e-9));
    for (double m : word_multipliers(p, 3)) CHECK(m == 0.75);
    check_golden("two_targets_gap4_proposed.json", p);

    // both targets ramp into the same gap: it is split between them
    const auto q = plan_text("!peel! to the !pill!", Strategy::StretchEveryTarget);
    const auto split = before(q, 3, 4);
    const double third = 0.45 / 3.0;
    CHECK(split[0] == doctest::Approx(0.75 + 2 * third));
    CHECK(split[1] == doctest::Approx(0.75 + third));
    CHECK(split[2] == doctest::Approx(0.75 + third));
    CHECK(split[3] == doctest::Approx(0.75 + 2 * third));
    check_golden("two_targets_gap4_stretch_every_target.json", q);
}

TEST_CASE("mixed-lax-dominant targets are noted and left alone") {
    const Phonemizer fake = [](const std::string&) -> std::optional<std::string> { return "mjuzˈɪk"; };
    const auto p = plan_text("say !mjuzik!", Strategy::Proposed, {}, fake);
    for (const auto& it : p.items) CHECK(it.multiplier == 0.75);
    REQUIRE(p.notes.size() == 1);
    CHECK(parse_plan(emit_plan(p)) == p);
}

namespace {

void check_invariants(const DurationPlan& p, const PhonemeSeq& seq) {
    REQUIRE(p.items.size() == seq.items.size());
    for (const auto& it : p.items) REQUIRE(it.multiplier > 0.0);
    const double peak = p.base_rate * p.target_stretch;
    // A run of values strictly between base and peak is a falling ramp leaving
    // the word on its left, then a rising ramp into the word on its right.
    const auto inside = [&](std::size_t k) {
        return p.items[k].multiplier > p.base_rate + 1e-9 && p.items[k].multiplier < peak - 1e-9;
    };
    const auto at_peak = [&](std::size_t k) { return std::abs(p.items[k].multiplier - peak) < 1e-9; };
    for (std::size_t i = 0; i < p.items.size();) {
        if (!inside(i)) {
            ++i;
            continue;
        }
        auto j = i;
        while (j < p.items.size() && inside(j)) ++j;
        const bool left_word = i > 0 && at_peak(i - 1);
        const bool right_word = j < p.items.size() && at_peak(j);
        REQUIRE((left_word || right_word));
        auto turn = i + 1;
        if (left_word)
            while (turn < j && p.items[turn].multiplier < p.items[turn - 1].multiplier) ++turn;
        else
            turn = i;
        if (!right_word) CHECK(turn == j);
        for (auto k = std::max(turn, i) + 1; k < j; ++k) CHECK(p.items[k].multiplier > p.items[k - 1].multiplier);
        i = j;
    }
}

}  // namespace

TEST_CASE("planner properties over random flaggings") {
    const auto sentences = load_sentences(kSource / "data" / "sentences.json");
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto& s = sentences[rng.below(sentences.size())];
        const auto plain = parse_flagged(parse_flagged(s.text).plain());
        std::vector<std::size_t> flags;
        for (std::size_t i = 0; i < plain.tokens.size(); ++i)
            if (rng.uniform() < 0.25) flags.push_back(i);
        const auto text = parse_flagged(flag_words(plain, flags));
        const auto seq = phonemize(text);
        PlanOptions opts;
        opts.ramp_items = 1 + rng.below(8);

        const auto proposed = plan(seq, text, Strategy::Proposed, opts);
        const auto baseline = plan(seq, text, Strategy::Baseline, opts);
        const auto everywhere = plan(seq, text, Strategy::StretchEverywhere, opts);
        const auto every_target = plan(seq, text, Strategy::StretchEveryTarget, opts);
        for (const auto* p : {&proposed, &baseline, &everywhere, &every_target}) check_invariants(*p, seq);

        bool any_tense = false, any_lax = false;
        for (auto i : flags) {
            const auto c = classify_word(seq, i);
            any_tense |= c == VowelClass::Tense || c == VowelClass::MixedTenseDominant;
            any_lax |= c == VowelClass::Lax;
        }
        if (any_tense && !any_lax) {
            CHECK(everywhere.total() >= proposed.total());
            CHECK(proposed.total() >= baseline.total());
        }
        CHECK(every_target.total() >= proposed.total());

        // stripping and re-flagging the same words gives the identical plan
        const auto again = parse_flagged(flag_words(parse_flagged(text.plain()), text.flagged_indices()));
        CHECK(plan(phonemize(again), again, Strategy::Proposed, opts) == proposed);
        CHECK(parse_plan(emit_plan(proposed)) == proposed);
    }
}

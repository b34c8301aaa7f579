// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "ratesculpt/audio.hpp"
#include "ratesculpt/corpus.hpp"
#include "ratesculpt/dsp.hpp"
#include "ratesculpt/error.hpp"
#include "ratesculpt/eval.hpp"
#include "ratesculpt/json_io.hpp"
#include "ratesculpt/pipeline.hpp"
#include "ratesculpt/pitch.hpp"
#include "ratesculpt/planner.hpp"
#include "ratesculpt/revcor.hpp"
#include "ratesculpt/rng.hpp"
#include "ratesculpt/scissor.hpp"
#include "ratesculpt/service.hpp"
#include "ratesculpt/stats.hpp"
#include "ratesculpt/stimgen.hpp"
#include "support/experiment.hpp"
#include "support/signals.hpp"
#include "support/wer_fixture.hpp"

using namespace ratesculpt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kSource = RATESCULPT_SOURCE_DIR;

constexpr double kDurationTolerance = 0.02;
constexpr double kDurationBudgetS = 60.0;
constexpr double kFlatCentsStd = 20.0;
constexpr double kSamplingStdTolerance = 0.05;
constexpr double kKernelCosine = 0.9;
constexpr double kSignPatternRate = 0.95;
constexpr double kKernelBudgetS = 300.0;
constexpr double kChiSquareTolerance = 1e-9;
constexpr double kSlopeTolerance = 0.15;
constexpr double kMidpointTolerance = 0.3;

// Collects the reasons a criterion failed; empty means pass.
struct Check {
    std::vector<std::string> failures;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

int failed = 0;

void criterion(const std::string& name, const std::function<void(Check&)>& body) {
    Check c;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = c.failures.empty();
    failed += !ok;
    std::cout << (ok ? "PASS " : "FAIL ") << name;
    const auto d = c.detail.str();
    if (!d.empty()) std::cout << " [" << d << "]";
    for (const auto& f : c.failures) std::cout << "\n     - " << f;
    std::cout << std::endl;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("ratesculpt_accept_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string fmt(double v, int decimals = 4) { return format_fixed(v, decimals); }

void duration_contract(Check& c) {
    const auto base = testing::voiced(130.0, 1.3);
    const auto grid = make_grid(base, 100.0);
    const SamplingParams params;
    double worst = 0.0;
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < 100; ++i) {
        const auto spec = sample_transform(grid, params, derive_seed(20240601, i));
        const auto out = apply_transform(base, grid, spec);
        const double expected = stretched_duration(grid, spec.stretch, base.sample_rate);
        worst = std::max(worst, std::abs(out.duration_seconds() - expected) / expected);
    }
    const double elapsed = seconds_since(t0);
    c.detail << "worst rel. error " << fmt(worst) << ", " << fmt(elapsed, 1) << " s";
    c.expect(worst <= kDurationTolerance, "duration error " + fmt(worst) + " > 2%");
    c.expect(elapsed < kDurationBudgetS, "runtime " + fmt(elapsed, 1) + " s >= 60 s");
}

void pitch_flattening(Check& c) {
    const auto out = flatten_pitch(testing::glide(100.0, 180.0, 1.0), 120.0);
    std::vector<double> cents;
    for (const auto& f : track_pitch(out))
        if (f.voiced) cents.push_back(cents_between(120.0, f.f0_hz));
    c.expect(cents.size() > 50, "too few voiced frames: " + std::to_string(cents.size()));
    const double m = stats::mean(cents);
    double sq = 0.0;
    for (double v : cents) sq += (v - m) * (v - m);
    const double sd = std::sqrt(sq / cents.size());
    c.detail << cents.size() << " voiced frames, std " << fmt(sd, 2) << " cents, mean offset " << fmt(m, 2);
    c.expect(sd < kFlatCentsStd, "F0 std " + fmt(sd, 2) + " cents");
}

void sampling_fidelity(Check& c) {
    const SamplingParams params;  // sigma 100 cents, clip 2 sigma
    const auto spec = sample_transform(10000, params, 777);
    const auto& x = spec.pitch_cents;
    const double sd = stats::sample_sd(x);
    const auto beyond = std::count_if(x.begin(), x.end(), [](double v) { return std::abs(v) > 200.0; });
    c.detail << "std " << fmt(sd, 2) << " cents, " << beyond << " beyond 200";
    c.expect(std::abs(sd - 100.0) / 100.0 <= kSamplingStdTolerance, "std " + fmt(sd, 2) + " not within 5% of 100");
    c.expect(beyond == 0, std::to_string(beyond) + " samples beyond +-200 cents");
}

void kernel_recovery(Check& c) {
    constexpr std::size_t kWindows = 13, kParticipants = 25, kTrials = 250, kReps = 20;
    const revcor::SyntheticObserver observer{revcor::scissor_template(kWindows), 1.0};
    const auto& tmpl = observer.template_weights;
    const double tmax = *std::max_element(tmpl.begin(), tmpl.end(),
                                          [](double a, double b) { return std::abs(a) < std::abs(b); });
    const std::array<std::string, 2> labels{"peel", "pill"};

    const auto t0 = Clock::now();
    std::size_t pattern_hits = 0;
    double min_cos = 1.0;
    for (std::size_t rep = 0; rep < kReps; ++rep) {
        std::vector<std::vector<double>> a, b;
        std::vector<double> mean(kWindows, 0.0);
        for (std::size_t p = 0; p < kParticipants; ++p) {
            const auto s = revcor::simulate_session(observer, kWindows, kTrials, {}, derive_seed(rep, p));
            const auto k = revcor::kernel_from_features(s.features, s.classes, revcor::Dimension::Stretch, labels);
            a.push_back(k.class_kernels[0]);
            b.push_back(k.class_kernels[1]);
            for (std::size_t i = 0; i < kWindows; ++i) mean[i] += k.weights[i] / kParticipants;
        }
        min_cos = std::min(min_cos, revcor::cosine_similarity(mean, tmpl));
        const auto st = revcor::group_ttest(a, b, {false, 0.05});
        // Lobe cores must be significant with the template's sign; nothing may be
        // significant with the opposite sign.
        bool ok = true;
        for (std::size_t i = 0; i < kWindows; ++i) {
            const bool core = std::abs(tmpl[i]) >= 0.5 * std::abs(tmax);
            const bool same_sign = (st.t[i] > 0) == (tmpl[i] > 0);
            if (core && !(st.significant[i] && same_sign)) ok = false;
            if (st.significant[i] && tmpl[i] != 0.0 && !same_sign) ok = false;
        }
        pattern_hits += ok;
    }
    const double elapsed = seconds_since(t0);
    const double rate = static_cast<double>(pattern_hits) / kReps;
    c.detail << "min cosine " << fmt(min_cos, 3) << ", sign pattern " << pattern_hits << "/" << kReps << ", "
             << fmt(elapsed, 1) << " s";
    c.expect(min_cos >= kKernelCosine, "group-mean cosine " + fmt(min_cos, 3) + " < 0.9");
    c.expect(rate >= kSignPatternRate, "sign pattern in " + fmt(rate, 2) + " of repetitions");
    c.expect(elapsed < kKernelBudgetS, "runtime " + fmt(elapsed, 1) + " s >= 300 s");
}

void scissor_grid_check(Check& c) {
    const auto grid = scissor_grid();
    c.expect(grid.size() == 11, "grid has " + std::to_string(grid.size()) + " levels");
    c.expect(grid.front().context_speed == 1.0 / 1.5 && grid.front().word_duration == 2.0,
             "level -5 is not (0.67, 2.0)");
    c.expect(grid.back().context_speed == 1.5 && grid.back().word_duration == 0.5, "level 5 is not (1.5, 0.5)");
    c.expect(std::abs(grid.front().context_speed - 0.67) < 0.005, "slow endpoint does not round to 0.67");
    for (int k = 1; k <= kScissorMaxLevel; ++k) {
        const auto pos = scissor_level(k), neg = scissor_level(-k);
        c.expect(neg.context_speed == 1.0 / pos.context_speed && neg.word_duration == 1.0 / pos.word_duration,
                 "level " + std::to_string(k) + " is not the exact reciprocal of level -" + std::to_string(k));
        c.expect(pos.context_speed > 1.0 && pos.word_duration < 1.0, "level " + std::to_string(k) + " direction");
    }
    const auto zero = scissor_level(0);
    c.expect(zero.context_speed == 1.0 && zero.word_duration == 1.0, "level 0 factors are not 1");
    const auto in = testing::voiced(140.0, 1.3);
    const auto out = apply_scissor(in, 1.0, 1.3, zero);
    double diff = out.size() == in.size() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < std::min(in.size(), out.size()); ++i)
        diff = std::max(diff, std::abs(in.samples[i] - out.samples[i]));
    c.detail << "level-0 max sample deviation " << diff;
    c.expect(diff <= 1e-6, "level 0 is not an identity");
}

void planner_fixtures(Check& c) {
    const auto peel = plan_text("I heard them say !peel!", Strategy::Proposed);
    const auto m = peel.multipliers();
    std::size_t stretched = 0;
    for (const auto& it : peel.items)
        if (it.word_index == 4) {
            ++stretched;
            c.expect(format_fixed(it.multiplier, 6) == "1.200000", "peel item at " + format_fixed(it.multiplier));
        }
    c.expect(stretched == 3, "peel has " + std::to_string(stretched) + " items");
    // Six-item ramp before the word, strictly rising, flat base rate before it.
    const std::size_t first = m.size() - stretched;
    c.expect(first >= 6, "not enough context for a 6-item ramp");
    for (std::size_t i = first - 6; i < first; ++i) {
        c.expect(m[i] > 0.75 && m[i] < 1.2, "ramp item outside (0.75, 1.2)");
        if (i > first - 6) c.expect(m[i] > m[i - 1], "ramp not monotone");
    }
    for (std::size_t i = 0; i + 6 < first; ++i) c.expect(m[i] == 0.75, "context before ramp not at 0.75");

    const auto pill = plan_text("I heard them say !pill!", Strategy::Proposed);
    for (double v : pill.multipliers()) c.expect(v == 0.75, "pill plan is not uniform 0.75");

    const auto music = plan_text("I heard them say !music! twice", Strategy::Proposed);
    c.expect(classify_word(phonemize(parse_flagged("!music!")), 0) == VowelClass::MixedTenseDominant,
             "music is not classified tense-dominant");
    bool music_stretched = false;
    for (const auto& it : music.items) music_stretched |= it.word_index == 4 && it.multiplier > 1.19;
    c.expect(music_stretched, "music is not stretched as tense");

    std::size_t goldens = 0;
    const std::vector<std::tuple<std::string, std::string, Strategy>> cases{
        {"peel_proposed.json", "I heard them say !peel!", Strategy::Proposed},
        {"peel_baseline.json", "I heard them say !peel!", Strategy::Baseline},
        {"peel_stretch_everywhere.json", "I heard them say !peel!", Strategy::StretchEverywhere},
        {"pill_proposed.json", "I heard them say !pill!", Strategy::Proposed},
        {"pill_stretch_every_target.json", "I heard them say !pill!", Strategy::StretchEveryTarget},
        {"music_proposed.json", "I heard them say !music! twice", Strategy::Proposed},
        {"two_targets_gap4_proposed.json", "!peel! to the !pill!", Strategy::Proposed},
        {"two_targets_gap4_stretch_every_target.json", "!peel! to the !pill!", Strategy::StretchEveryTarget},
    };
    for (const auto& [file, text, strategy] : cases) {
        const bool same = emit_plan(plan_text(text, strategy)) == read_text_file(kSource / "tests" / "golden" / file);
        c.expect(same, file + " differs from the committed golden");
        goldens += same;
    }
    c.detail << goldens << "/" << cases.size() << " goldens byte-exact";
}

void study3_count(Check& c) {
    const auto words = load_word_list(kSource / "data" / "word_pairs.json");
    const auto sentences = load_sentences(kSource / "data" / "sentences.json");
    const auto out = scratch("study3");
    const auto r = pipeline_study3(sentences, words, out);
    std::size_t strategy_plans = 0, distractor_plans = 0, files = 0;
    for (const auto& [stem, p] : r.plans) (stem.ends_with("_distractor") ? distractor_plans : strategy_plans)++;
    for (const auto& e : fs::directory_iterator(out / "plans")) files += e.path().extension() == ".json";
    const auto trials = r.config ? r.config->total_trials() : 0;
    c.detail << sentences.size() << " sentences -> " << strategy_plans << " + " << distractor_plans << " plans, "
             << trials << " trials";
    c.expect(sentences.size() == 16, "shipped list has " + std::to_string(sentences.size()) + " sentences");
    c.expect(strategy_plans == 64, "strategy plans: " + std::to_string(strategy_plans));
    c.expect(distractor_plans == 16, "distractor plans: " + std::to_string(distractor_plans));
    c.expect(files == 80, "plan files on disk: " + std::to_string(files));
    c.expect(trials == 80, "config trials: " + std::to_string(trials));
    fs::remove_all(out);
}

double brute_force_wilcoxon(const std::vector<double>& d) {
    std::vector<double> a;
    for (double v : d)
        if (v != 0) a.push_back(std::abs(v));
    const std::size_t n = a.size();
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        double below = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            below += a[j] < a[i];
            equal += a[j] == a[i];
        }
        rank[i] = below + (equal + 1) / 2.0;
    }
    double observed = 0, total = 0;
    for (std::size_t i = 0, k = 0; i < d.size(); ++i)
        if (d[i] != 0) {
            total += rank[k];
            if (d[i] > 0) observed += rank[k];
            ++k;
        }
    const double dev = std::abs(observed - total / 2);
    std::size_t hits = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double w = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) w += rank[i];
        hits += std::abs(w - total / 2) >= dev - 1e-9;
    }
    return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

void statistics_oracles(Check& c) {
    Rng rng(99);
    std::size_t wilcoxon_ok = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> d(1 + rng.below(10));
        for (auto& v : d) v = static_cast<double>(static_cast<long>(rng.below(9)) - 3);
        if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0; })) d[0] = 2;
        wilcoxon_ok += std::abs(stats::wilcoxon_signed_rank(d).p - brute_force_wilcoxon(d)) < 1e-12;
    }
    c.expect(wilcoxon_ok == 100, "Wilcoxon matched brute force on " + std::to_string(wilcoxon_ok) + "/100");

    const std::vector<double> p{0.01, 0.03, 0.04};
    const auto h = stats::holm_correct(p);
    const std::vector<double> expected{0.03, 0.06, 0.06};
    for (std::size_t i = 0; i < 3; ++i)
        c.expect(std::abs(h.adjusted[i] - expected[i]) < 1e-12, "Holm adjusted[" + std::to_string(i) + "] = " +
                                                                    fmt(h.adjusted[i], 6));

    double worst_chi = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const double a = 1 + rng.below(60), b = 1 + rng.below(60), cc = 1 + rng.below(60), d = 1 + rng.below(60);
        const double n = a + b + cc + d;
        const double closed = n * std::pow(a * d - b * cc, 2) / ((a + b) * (cc + d) * (a + cc) * (b + d));
        const double got = stats::chi_square_2x2({{{a, b}, {cc, d}}}).statistic;
        worst_chi = std::max(worst_chi, std::abs(got - closed));
    }
    c.expect(worst_chi <= kChiSquareTolerance, "chi-square deviates by " + std::to_string(worst_chi));

    // Logistic data drawn from slope -1.2, midpoint 1.5.
    std::vector<stats::BinomialPoint> pts;
    for (int level = -5; level <= 5; ++level) {
        const double pr = 1.0 / (1.0 + std::exp(1.2 * (level - 1.5)));
        double k = 0;
        for (int t = 0; t < 400; ++t) k += rng.uniform() < pr;
        pts.push_back({static_cast<double>(level), k, 400});
    }
    const auto fit = stats::fit_logistic(pts);
    const double slope_err = std::abs(fit.slope - -1.2) / 1.2;
    const double mid_err = std::abs(fit.midpoint - 1.5);
    c.expect(slope_err <= kSlopeTolerance, "slope " + fmt(fit.slope, 3));
    c.expect(mid_err <= kMidpointTolerance, "midpoint " + fmt(fit.midpoint, 3));
    c.detail << "wilcoxon " << wilcoxon_ok << "/100, max chi2 error " << worst_chi << ", logistic slope "
             << fmt(fit.slope, 3) << " midpoint " << fmt(fit.midpoint, 3);
}

// Returns the sentence with every tense target replaced by its lax partner.
struct InPairOnTense : TranscriptionClient {
    const StimulusTable* table;
    const WordList* words;

    std::string transcribe(const fs::path& wav) override {
        const auto& info = table->at(wav.stem().string());
        auto text = parse_flagged(info.text);
        for (auto i : text.flagged_indices()) {
            const auto w = strip_punctuation_lower(text.tokens[i].text);
            if (words->is_tense(w)) text.tokens[i].text = words->opposite(w);
        }
        return flag_words(text, {});
    }
};

void wer_taxonomy(Check& c) {
    const auto words = load_word_list(kSource / "data" / "word_pairs.json");
    const auto sentences = load_sentences(kSource / "data" / "sentences.json");
    const auto dir = scratch("wer");
    StimulusTable table;
    for (const auto& s : sentences) {
        StimulusInfo info;
        info.stimulus_id = s.sentence_id;
        info.targets = target_words(s.text);
        info.condition = "proposed";
        info.sentence_type = s.is_double() ? "double" : "single";
        info.wav_path = s.sentence_id + ".wav";
        info.text = s.text;
        write_wav(dir / info.wav_path, testing::tone(200.0, 0.05, 8000));
        table.stimuli.push_back(info);
    }
    InPairOnTense client;
    client.table = &table;
    client.words = &words;
    const auto report = transcribe_eval(table, dir, client, words, 4);
    std::map<std::string, WerRow> by_class;
    for (const auto& r : report.wer.target_by_vowel_class) by_class[r.group.at(1)] = r;
    const auto& tense = by_class["tense"];
    const auto& lax = by_class["lax"];
    c.expect(tense.total > 0 && tense.wer() == 100.0, "tense WER " + fmt(tense.wer(), 2));
    c.expect(tense.in_pair == tense.total && tense.out_of_pair == 0, "tense errors are not all in-pair");
    c.expect(lax.total > 0 && lax.correct == lax.total, "lax targets were not all correct");
    c.detail << "tense " << tense.total << " targets WER " << fmt(tense.wer(), 1) << "% ("
             << tense.out_of_pair << " out-of-pair), lax WER " << fmt(lax.wer(), 1) << "%";

    // Mixed fixture against the hand tally.
    const auto mixed = wer_report(score_trials(testing::fixture_trials(), testing::fixture_table(), words));
    std::map<std::string, WerRow> rows;
    for (const auto& r : mixed.target_by_strategy) rows[r.group.at(0)] = r;
    const auto tally = [&](const std::string& s, std::size_t total, std::size_t correct, std::size_t in,
                           std::size_t out) {
        const auto& r = rows[s];
        c.expect(r.total == total && r.correct == correct && r.in_pair == in && r.out_of_pair == out,
                 s + " row differs from the hand tally");
    };
    tally("proposed", 6, 4, 1, 1);
    tally("baseline", 6, 3, 2, 1);
    c.expect(mixed.distractor_target.size() == 1 && mixed.distractor_target[0].total == 2,
             "distractor trials not reported separately");
    fs::remove_all(dir);
}

void service_round_trip(Check& c) {
    const auto dir = scratch("service");
    const auto config = testing::make_config("accept", 40, 40);
    std::string sid;

    // A child runs the first 37 trials and is killed without warning.
    int ready[2];
    c.expect(::pipe(ready) == 0, "pipe");
    const pid_t child = ::fork();
    if (child == 0) {
        ::close(ready[0]);
        try {
            ExperimentService svc(dir);
            svc.add_experiment(config);
            const auto s = svc.create_session("accept", "listener-1").session_id;
            for (int i = 0; i < 37; ++i) svc.submit_response(s, testing::answer(svc.next_trial(s)));
            (void)!::write(ready[1], "x", 1);
            ::pause();
        } catch (...) {
        }
        ::_exit(1);
    }
    ::close(ready[1]);
    char buf = 0;
    c.expect(::read(ready[0], &buf, 1) == 1, "child did not reach trial 37");
    ::kill(child, SIGKILL);
    ::waitpid(child, nullptr, 0);

    ExperimentService svc(dir);
    svc.add_experiment(config);
    const auto resumed = svc.create_session("accept", "listener-1");
    sid = resumed.session_id;
    c.expect(resumed.resumed && resumed.cursor == 37, "recovered cursor " + std::to_string(resumed.cursor));
    std::size_t conflicts = 0;
    while (!svc.session(sid).completed) {
        const auto t = svc.next_trial(sid);
        const auto sub = testing::answer(t);
        svc.submit_response(sid, sub);
        try {
            svc.submit_response(sid, sub);  // duplicate delivery
        } catch (const Error& e) {
            conflicts += e.code() == ErrorCode::Conflict || e.code() == ErrorCode::Completed;
        }
    }
    const auto exported = svc.export_log("accept");
    const auto records = parse_trial_log(exported);
    std::map<std::string, int> seen;
    for (const auto& r : records) seen[r.stimulus_id]++;
    const bool once = seen.size() == 80 && std::all_of(seen.begin(), seen.end(), [](const auto& kv) {
                          return kv.second == 1;
                      });
    c.expect(testing::count_lines(exported) == 80, "export has " + std::to_string(testing::count_lines(exported)) +
                                                       " lines");
    c.expect(once, "a stimulus was logged more than once or not at all");
    c.expect(conflicts == 43, "duplicate submissions rejected: " + std::to_string(conflicts));
    try {
        (void)svc.next_trial(sid);
        c.expect(false, "completed session still serves trials");
    } catch (const Error& e) {
        c.expect(e.code() == ErrorCode::Completed, "completed session error code");
    }
    c.detail << "killed at 37, resumed at " << resumed.cursor << ", " << records.size() << " lines, " << conflicts
             << " duplicates rejected";
    fs::remove_all(dir);
}

}  // namespace

int main() {
    criterion("duration contract: 100 specs on 1.3 s within 2%, < 60 s", duration_contract);
    criterion("pitch flattening: 100->180 Hz glide to 120 Hz, F0 std < 20 cents", pitch_flattening);
    criterion("sampling fidelity: 10000 draws, std within 5% of 100 cents, none beyond 200", sampling_fidelity);
    criterion("kernel recovery: 25 x 250 trials, cosine >= 0.9, sign pattern >= 95% of 20, < 5 min",
              kernel_recovery);
    criterion("scissor grid: 11 levels, endpoints, identity, exact log-symmetry", scissor_grid_check);
    criterion("planner fixtures: peel 1.2 with 6-item ramp, pill 0.75, music tense, goldens byte-exact",
              planner_fixtures);
    criterion("study-3 pipeline: 16 x 4 strategy plans + 16 distractor plans = 80 trials", study3_count);
    criterion("statistics oracles: Wilcoxon brute force, Holm example, chi-square closed form, logistic fit",
              statistics_oracles);
    criterion("WER taxonomy: in-pair-only tense errors, mixed hand tally", wer_taxonomy);
    criterion("service round trip: 80 trials, exactly-once, crash-restart recovery", service_round_trip);
    std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << std::endl;
    return failed == 0 ? 0 : 1;
}

#include "ratesculpt/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "httplib.h"
#include "ratesculpt/error.hpp"
#include "ratesculpt/planner.hpp"

namespace ratesculpt {

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Correct: return "correct";
        case Outcome::InPairError: return "in-pair-error";
        case Outcome::OutOfPairError: return "out-of-pair-error";
    }
    return "correct";
}

ScoredResponse score_response(std::string_view truth, std::string_view selected, const WordPair& pair) {
    ScoredResponse r{Outcome::Correct, strip_punctuation_lower(truth), strip_punctuation_lower(selected)};
    require(r.truth == pair.tense_word || r.truth == pair.lax_word, "truth '" + r.truth + "' is not in its pair");
    const auto& opposite = r.truth == pair.tense_word ? pair.lax_word : pair.tense_word;
    if (r.selected == r.truth)
        r.outcome = Outcome::Correct;
    else if (r.selected == opposite)
        r.outcome = Outcome::InPairError;
    else
        r.outcome = Outcome::OutOfPairError;
    return r;
}

const StimulusInfo* StimulusTable::find(std::string_view id) const {
    for (const auto& s : stimuli)
        if (s.stimulus_id == id) return &s;
    return nullptr;
}

const StimulusInfo& StimulusTable::at(std::string_view id) const {
    const auto* s = find(id);
    if (!s) fail(ErrorCode::NotFound, "unknown stimulus '" + std::string(id) + "'");
    return *s;
}

Json stimulus_table_to_json(const StimulusTable& table) {
    Json arr = Json::array();
    for (const auto& s : table.stimuli) {
        Json j;
        j["stimulus_id"] = s.stimulus_id;
        j["targets"] = s.targets;
        j["condition"] = s.condition;
        j["level"] = s.level ? Json(*s.level) : Json(nullptr);
        j["distractor"] = s.distractor;
        j["sentence_type"] = s.sentence_type;
        j["wav_path"] = s.wav_path;
        j["text"] = s.text;
        arr.push_back(std::move(j));
    }
    Json out;
    out["stimuli"] = std::move(arr);
    return out;
}

StimulusTable stimulus_table_from_json(const Json& j) {
    try {
        StimulusTable t;
        for (const auto& e : j.at("stimuli")) {
            StimulusInfo s;
            s.stimulus_id = e.at("stimulus_id").get<std::string>();
            s.targets = e.at("targets").get<std::vector<std::string>>();
            s.condition = e.at("condition").get<std::string>();
            if (e.contains("level") && !e.at("level").is_null()) s.level = e.at("level").get<int>();
            s.distractor = e.value("distractor", false);
            s.sentence_type = e.value("sentence_type", s.targets.size() > 1 ? "double" : "single");
            s.wav_path = e.value("wav_path", "");
            s.text = e.value("text", "");
            require(!s.targets.empty(), "stimulus " + s.stimulus_id + " has no targets");
            require(t.find(s.stimulus_id) == nullptr, "duplicate stimulus id " + s.stimulus_id);
            t.stimuli.push_back(std::move(s));
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed stimulus table: ") + e.what());
    }
}

StimulusTable load_stimulus_table(const std::filesystem::path& path) {
    return stimulus_table_from_json(read_json_file(path));
}

std::vector<ScoredTarget> score_trials(std::span<const TrialRecord> trials, const StimulusTable& table,
                                       const WordList& words) {
    std::vector<ScoredTarget> out;
    for (const auto& t : trials) {
        const auto& info = table.at(t.stimulus_id);
        require(t.targets() == info.targets.size(),
                "trial for " + t.stimulus_id + " has " + std::to_string(t.targets()) + " responses, expected " +
                    std::to_string(info.targets.size()));
        for (std::size_t slot = 0; slot < info.targets.size(); ++slot) {
            const auto truth = strip_punctuation_lower(info.targets[slot]);
            const auto* pair = words.find(truth);
            require(pair != nullptr, "target '" + truth + "' is not in the word list");
            ScoredTarget s;
            s.response_key = t.participant_id + "/" + t.session_id + "/" + t.stimulus_id;
            s.strategy = info.distractor ? "distractor" : info.condition;
            s.vowel_class = pair->tense_word == truth ? "tense" : "lax";
            s.sentence_type = info.targets.size() > 1 ? "double" : "single";
            s.distractor = info.distractor;
            s.response = score_response(truth, t.chosen(slot), *pair);
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::optional<double> wer_percent(std::size_t correct, std::size_t total) {
    if (total == 0) return std::nullopt;
    return 100.0 * (1.0 - static_cast<double>(correct) / static_cast<double>(total));
}

double WerRow::wer() const { return wer_percent(correct, total).value_or(std::nan("")); }

namespace {

std::vector<std::string> group_of(const ScoredTarget& s, GroupBy by) {
    switch (by) {
        case GroupBy::Strategy: return {s.strategy};
        case GroupBy::StrategyVowelClass: return {s.strategy, s.vowel_class};
        case GroupBy::StrategySentenceType: return {s.strategy, s.sentence_type};
    }
    return {s.strategy};
}

void tally(WerRow& row, Outcome o) {
    ++row.total;
    if (o == Outcome::Correct) ++row.correct;
    if (o == Outcome::InPairError) ++row.in_pair;
    if (o == Outcome::OutOfPairError) ++row.out_of_pair;
}

}  // namespace

std::vector<WerRow> wer_table(std::span<const ScoredTarget> scored, WerUnit unit, GroupBy by, bool distractors) {
    std::map<std::vector<std::string>, WerRow> rows;
    if (unit == WerUnit::Target) {
        for (const auto& s : scored) {
            if (s.distractor != distractors) continue;
            auto g = group_of(s, by);
            auto& row = rows[g];
            row.group = g;
            tally(row, s.response.outcome);
        }
    } else {
        // a sentence is wrong if any target is; out-of-pair dominates in-pair
        std::map<std::string, std::pair<std::vector<std::string>, Outcome>> sentences;
        for (const auto& s : scored) {
            if (s.distractor != distractors) continue;
            auto [it, fresh] = sentences.try_emplace(s.response_key, group_of(s, by), s.response.outcome);
            if (!fresh) it->second.second = std::max(it->second.second, s.response.outcome);
        }
        for (const auto& [key, v] : sentences) {
            auto& row = rows[v.first];
            row.group = v.first;
            tally(row, v.second);
        }
    }
    std::vector<WerRow> out;
    for (auto& [k, row] : rows) out.push_back(std::move(row));
    return out;
}

std::vector<WerComparison> pairwise_chi_square(std::span<const WerRow> rows, bool yates) {
    std::vector<WerComparison> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            const auto& a = rows[i];
            const auto& b = rows[j];
            WerComparison c;
            c.a = a.group.front();
            c.b = b.group.front();
            const std::array<std::array<double, 2>, 2> counts{
                {{static_cast<double>(a.errors()), static_cast<double>(a.correct)},
                 {static_cast<double>(b.errors()), static_cast<double>(b.correct)}}};
            try {
                c.test = stats::chi_square_2x2(counts, yates);
            } catch (const Error&) {
                c.test = {0.0, 1.0, 1.0};  // a zero margin: no evidence of a difference
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

WerReport wer_report(std::span<const ScoredTarget> scored) {
    WerReport r;
    r.target_by_strategy = wer_table(scored, WerUnit::Target, GroupBy::Strategy);
    r.sentence_by_strategy = wer_table(scored, WerUnit::Sentence, GroupBy::Strategy);
    r.target_by_vowel_class = wer_table(scored, WerUnit::Target, GroupBy::StrategyVowelClass);
    r.target_by_sentence_type = wer_table(scored, WerUnit::Target, GroupBy::StrategySentenceType);
    r.distractor_target = wer_table(scored, WerUnit::Target, GroupBy::Strategy, true);
    r.distractor_sentence = wer_table(scored, WerUnit::Sentence, GroupBy::Strategy, true);
    r.strategy_comparisons = pairwise_chi_square(r.target_by_strategy);
    return r;
}

namespace {

Json rows_to_json(std::span<const WerRow> rows) {
    Json arr = Json::array();
    for (const auto& r : rows) {
        Json j;
        j["group"] = r.group;
        j["total"] = r.total;
        j["correct"] = r.correct;
        j["in_pair"] = r.in_pair;
        j["out_of_pair"] = r.out_of_pair;
        j["wer"] = r.wer();
        arr.push_back(std::move(j));
    }
    return arr;
}

Json test_to_json(const std::optional<stats::TestResult>& t) {
    if (!t) return nullptr;
    Json j;
    j["statistic"] = std::isfinite(t->statistic) ? Json(t->statistic) : Json(t->statistic > 0 ? "inf" : "-inf");
    j["p"] = t->p;
    if (!std::isnan(t->df)) j["df"] = t->df;
    return j;
}

}  // namespace

Json wer_report_to_json(const WerReport& r) {
    Json j;
    j["target_by_strategy"] = rows_to_json(r.target_by_strategy);
    j["sentence_by_strategy"] = rows_to_json(r.sentence_by_strategy);
    j["target_by_vowel_class"] = rows_to_json(r.target_by_vowel_class);
    j["target_by_sentence_type"] = rows_to_json(r.target_by_sentence_type);
    j["distractor_target"] = rows_to_json(r.distractor_target);
    j["distractor_sentence"] = rows_to_json(r.distractor_sentence);
    Json cmp = Json::array();
    for (const auto& c : r.strategy_comparisons) {
        Json e;
        e["a"] = c.a;
        e["b"] = c.b;
        e["chi_square"] = c.test.statistic;
        e["p"] = c.test.p;
        cmp.push_back(std::move(e));
    }
    j["strategy_comparisons"] = std::move(cmp);
    return j;
}

std::string wer_rows_to_tsv(std::span<const WerRow> rows, const std::string& table_name) {
    std::ostringstream os;
    for (const auto& r : rows) {
        std::string g;
        for (const auto& part : r.group) g += (g.empty() ? "" : "/") + part;
        os << table_name << '\t' << g << '\t' << r.total << '\t' << r.correct << '\t' << r.in_pair << '\t'
           << r.out_of_pair << '\t' << format_fixed(r.wer(), 2) << '\n';
    }
    return os.str();
}

std::string wer_report_to_tsv(const WerReport& r) {
    std::string out = "table\tgroup\ttotal\tcorrect\tin_pair\tout_of_pair\twer\n";
    out += wer_rows_to_tsv(r.target_by_strategy, "target");
    out += wer_rows_to_tsv(r.sentence_by_strategy, "sentence");
    out += wer_rows_to_tsv(r.target_by_vowel_class, "target_vowel_class");
    out += wer_rows_to_tsv(r.target_by_sentence_type, "target_sentence_type");
    out += wer_rows_to_tsv(r.distractor_target, "distractor_target");
    out += wer_rows_to_tsv(r.distractor_sentence, "distractor_sentence");
    return out;
}

std::map<double, double> normalize_accuracy(const std::map<std::string, std::map<double, double>>& accuracy,
                                            double baseline_level) {
    require(!accuracy.empty(), "no accuracy data");
    std::map<double, std::pair<double, std::size_t>> sums;
    for (const auto& [participant, levels] : accuracy) {
        const auto base = levels.find(baseline_level);
        require(base != levels.end(), "participant " + participant + " has no baseline level");
        for (const auto& [level, acc] : levels) {
            auto& s = sums[level];
            s.first += acc - base->second;
            ++s.second;
        }
    }
    std::map<double, double> out;
    for (const auto& [level, s] : sums) out[level] = s.first / static_cast<double>(s.second);
    return out;
}

AccuracyCurve accuracy_curve(std::span<const LevelTrial> trials, const CurveOptions& opts) {
    require(!trials.empty(), "no trials");
    std::map<std::string, std::map<double, std::pair<double, double>>> counts;  // participant -> level -> (ok, n)
    std::map<double, stats::BinomialPoint> pooled;
    for (const auto& t : trials) {
        auto& c = counts[t.participant][t.level];
        c.first += t.correct ? 1.0 : 0.0;
        c.second += 1.0;
        auto& p = pooled[t.level];
        p.level = t.level;
        p.successes += t.correct ? 1.0 : 0.0;
        p.trials += 1.0;
    }

    std::map<std::string, std::map<double, double>> accuracy;
    for (const auto& [pid, levels] : counts)
        for (const auto& [level, c] : levels) accuracy[pid][level] = c.first / c.second;
    const auto means = normalize_accuracy(accuracy, opts.baseline_level);

    AccuracyCurve curve;
    curve.baseline_level = opts.baseline_level;
    std::vector<double> tested_p;
    std::vector<std::size_t> tested_idx;
    for (const auto& [level, mean] : means) {
        CurvePoint pt;
        pt.level = level;
        pt.mean_normalized = mean;
        std::vector<double> values;
        for (const auto& [pid, levels] : accuracy) {
            const auto it = levels.find(level);
            if (it != levels.end()) values.push_back(it->second - levels.at(opts.baseline_level));
        }
        pt.participants = values.size();
        if (level == opts.baseline_level) {
            pt.skipped = "baseline";
        } else {
            try {
                pt.test = stats::one_sample_t(values);
                tested_p.push_back(pt.test->p);
                tested_idx.push_back(curve.points.size());
            } catch (const Error& e) {
                pt.skipped = std::string(to_string(e.code()));
            }
        }
        curve.points.push_back(std::move(pt));
    }
    if (!tested_p.empty()) {
        const auto holm = stats::holm_correct(tested_p, opts.alpha);
        for (std::size_t k = 0; k < tested_idx.size(); ++k) {
            curve.points[tested_idx[k]].adjusted_p = holm.adjusted[k];
            curve.points[tested_idx[k]].significant = holm.reject[k];
        }
    }

    std::vector<stats::BinomialPoint> points;
    for (const auto& [level, p] : pooled) points.push_back(p);
    try {
        curve.fit = stats::fit_logistic(points, opts.logistic);
    } catch (const Error& e) {
        curve.fit_skipped = std::string(to_string(e.code())) + ": " + e.what();
    }
    return curve;
}

std::vector<LevelTrial> level_trials(std::span<const TrialRecord> trials, const StimulusTable& table) {
    std::vector<LevelTrial> out;
    for (const auto& t : trials) {
        const auto& info = table.at(t.stimulus_id);
        require(info.level.has_value(), "stimulus " + info.stimulus_id + " has no level");
        require(t.targets() >= 1, "trial without a response");
        out.push_back({t.participant_id, static_cast<double>(*info.level),
                       strip_punctuation_lower(t.chosen(0)) == strip_punctuation_lower(info.targets.at(0))});
    }
    return out;
}

Json curve_to_json(const AccuracyCurve& c) {
    Json j;
    j["baseline_level"] = c.baseline_level;
    Json pts = Json::array();
    for (const auto& p : c.points) {
        Json e;
        e["level"] = p.level;
        e["mean_normalized"] = p.mean_normalized;
        e["participants"] = p.participants;
        e["test"] = test_to_json(p.test);
        if (!p.skipped.empty()) e["skipped"] = p.skipped;
        e["adjusted_p"] = p.adjusted_p;
        e["significant"] = p.significant;
        pts.push_back(std::move(e));
    }
    j["points"] = std::move(pts);
    if (c.fit) {
        Json f;
        f["slope"] = c.fit->slope;
        f["midpoint"] = c.fit->midpoint;
        f["guess"] = c.fit->guess;
        f["lapse"] = c.fit->lapse;
        f["log_likelihood"] = c.fit->log_likelihood;
        f["separated"] = c.fit->separated;
        f["converged"] = c.fit->converged;
        j["fit"] = std::move(f);
    } else {
        j["fit"] = nullptr;
        j["fit_skipped"] = c.fit_skipped;
    }
    return j;
}

MosReport mos_aggregate(std::span<const MosObservation> observations, double alpha) {
    MosReport report;
    std::set<std::string> strategies;
    for (const auto& o : observations) {
        o.mos.validate();
        strategies.insert(o.strategy);
    }

    for (std::size_t s = 0; s < MosRecord::kScales.size(); ++s) {
        const std::string scale(MosRecord::kScales[s]);
        std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> per_participant;
        for (const auto& strategy : strategies) {
            std::vector<double> values;
            for (const auto& o : observations) {
                if (o.strategy != strategy) continue;
                values.push_back(o.mos.values[s]);
                auto& acc = per_participant[strategy][o.participant];
                acc.first += o.mos.values[s];
                ++acc.second;
            }
            report.summaries.push_back({strategy, scale, values.size(), stats::median(values), stats::mean(values)});
        }

        std::vector<double> tested_p;
        std::vector<std::size_t> tested_idx;
        for (auto a = strategies.begin(); a != strategies.end(); ++a) {
            for (auto b = std::next(a); b != strategies.end(); ++b) {
                MosComparison c;
                c.scale = scale;
                c.a = *a;
                c.b = *b;
                std::vector<double> xa, xb;
                for (const auto& [pid, acc] : per_participant[*a]) {
                    const auto other = per_participant[*b].find(pid);
                    if (other == per_participant[*b].end()) continue;
                    xa.push_back(acc.first / static_cast<double>(acc.second));
                    xb.push_back(other->second.first / static_cast<double>(other->second.second));
                }
                c.n_pairs = xa.size();
                if (c.n_pairs < 2) {
                    c.skipped = std::string(to_string(ErrorCode::InsufficientData));
                } else {
                    try {
                        c.test = stats::wilcoxon_signed_rank(xa, xb);
                        tested_p.push_back(c.test->p);
                        tested_idx.push_back(report.comparisons.size());
                    } catch (const Error& e) {
                        c.skipped = std::string(to_string(e.code()));
                    }
                }
                report.comparisons.push_back(std::move(c));
            }
        }
        if (!tested_p.empty()) {
            const auto holm = stats::holm_correct(tested_p, alpha);
            for (std::size_t k = 0; k < tested_idx.size(); ++k) {
                report.comparisons[tested_idx[k]].adjusted_p = holm.adjusted[k];
                report.comparisons[tested_idx[k]].significant = holm.reject[k];
            }
        }
    }
    return report;
}

std::vector<MosObservation> mos_observations(std::span<const TrialRecord> trials, const StimulusTable& table) {
    std::vector<MosObservation> out;
    for (const auto& t : trials) {
        if (!t.mos) continue;
        const auto& info = table.at(t.stimulus_id);
        if (info.distractor) continue;
        out.push_back({t.participant_id, info.condition, *t.mos});
    }
    return out;
}

Json mos_report_to_json(const MosReport& r) {
    Json j;
    Json sums = Json::array();
    for (const auto& s : r.summaries) {
        Json e;
        e["strategy"] = s.strategy;
        e["scale"] = s.scale;
        e["n"] = s.n;
        e["median"] = s.median;
        e["mean"] = s.mean;
        sums.push_back(std::move(e));
    }
    j["summaries"] = std::move(sums);
    Json cmp = Json::array();
    for (const auto& c : r.comparisons) {
        Json e;
        e["scale"] = c.scale;
        e["a"] = c.a;
        e["b"] = c.b;
        e["n_pairs"] = c.n_pairs;
        e["test"] = test_to_json(c.test);
        if (!c.skipped.empty()) e["skipped"] = c.skipped;
        e["adjusted_p"] = c.adjusted_p;
        e["significant"] = c.significant;
        cmp.push_back(std::move(e));
    }
    j["comparisons"] = std::move(cmp);
    return j;
}

HttpTranscriptionClient::HttpTranscriptionClient(std::string url, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
    const auto scheme = url.find("://");
    require(scheme != std::string::npos, "transcription URL needs a scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    host_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

std::unique_ptr<HttpTranscriptionClient> HttpTranscriptionClient::from_environment(std::chrono::milliseconds timeout) {
    const char* url = std::getenv("RATESCULPT_ASR_URL");
    if (!url || !*url) return nullptr;
    return std::make_unique<HttpTranscriptionClient>(url, timeout);
}

std::string HttpTranscriptionClient::transcribe(const std::filesystem::path& wav) {
    std::string bytes;
    try {
        bytes = read_text_file(wav);
    } catch (const Error& e) {
        fail(ErrorCode::IoError, e.what());
    }
    httplib::Client cli(host_);
    if (!cli.is_valid()) fail(ErrorCode::ExternalService, "unsupported transcription endpoint " + host_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    httplib::MultipartFormDataItems items{{"file", bytes, wav.filename().string(), "audio/wav"}};
    const auto res = cli.Post(path_, items);
    if (!res) fail(ErrorCode::ExternalService, "transcription request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        fail(ErrorCode::ExternalService, "transcription service returned HTTP " + std::to_string(res->status));
    const auto parsed = Json::parse(res->body, nullptr, false);
    if (parsed.is_object() && parsed.contains("text") && parsed["text"].is_string()) return parsed["text"];
    return res->body;
}

namespace {

std::vector<std::string> transcript_words(const std::string& text, const WordList& words) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string w; is >> w;) {
        auto n = words.normalize(w);
        if (!n.empty()) out.push_back(std::move(n));
    }
    return out;
}

}  // namespace

Alignment align_targets(const std::string& flagged_text, const std::string& transcript, const WordList& words) {
    const auto text = parse_flagged(flagged_text);
    std::vector<std::string> ref;
    std::vector<std::size_t> target_pos;
    for (std::size_t i = 0; i < text.tokens.size(); ++i) {
        if (text.tokens[i].flagged) target_pos.push_back(ref.size());
        for (auto& w : transcript_words(text.tokens[i].text, words)) ref.push_back(std::move(w));
    }
    const auto hyp = transcript_words(transcript, words);

    const auto n = ref.size(), m = hyp.size();
    std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
    for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j)
            d[i][j] = std::min({d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0u : 1u), d[i - 1][j] + 1,
                                d[i][j - 1] + 1});

    // Backtrace preferring the diagonal so substitutions line up with targets.
    std::vector<std::optional<std::size_t>> aligned(n);
    for (std::size_t i = n, j = m; i > 0 || j > 0;) {
        if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0u : 1u)) {
            aligned[i - 1] = j - 1;
            --i;
            --j;
        } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
            --i;
        } else {
            --j;
        }
    }

    Alignment out;
    out.edits = d[n][m];
    for (auto pos : target_pos) out.aligned_targets.push_back(aligned[pos] ? hyp[*aligned[pos]] : std::string());
    return out;
}

AsrReport transcribe_eval(const StimulusTable& table, const std::filesystem::path& base_dir,
                          TranscriptionClient& client, const WordList& words, unsigned concurrency) {
    AsrReport report;
    report.records.resize(table.stimuli.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < table.stimuli.size();) {
            const auto& info = table.stimuli[i];
            auto& rec = report.records[i];
            rec.stimulus_id = info.stimulus_id;
            rec.strategy = info.distractor ? "distractor" : info.condition;
            try {
                rec.transcript = client.transcribe(base_dir / info.wav_path);
                const auto al = align_targets(info.text, rec.transcript, words);
                require(al.aligned_targets.size() == info.targets.size(),
                        "stimulus " + info.stimulus_id + ": targets do not match its text");
                for (std::size_t k = 0; k < info.targets.size(); ++k) {
                    const auto truth = strip_punctuation_lower(info.targets[k]);
                    const auto* pair = words.find(truth);
                    require(pair != nullptr, "target '" + truth + "' is not in the word list");
                    rec.targets.push_back(score_response(truth, al.aligned_targets[k], *pair));
                }
                std::size_t ref_words = 0;
                for (const auto& tok : parse_flagged(info.text).tokens)
                    ref_words += transcript_words(tok.text, words).size();
                rec.transcript_wer = ref_words ? 100.0 * static_cast<double>(al.edits) / static_cast<double>(ref_words)
                                               : 0.0;
                rec.ok = true;
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.error = e.what();
                rec.targets.clear();
            }
        }
    };
    const auto n_workers = std::max(1u, std::min<unsigned>(concurrency, static_cast<unsigned>(table.stimuli.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    std::vector<ScoredTarget> scored;
    for (std::size_t i = 0; i < table.stimuli.size(); ++i) {
        const auto& rec = report.records[i];
        const auto& info = table.stimuli[i];
        if (!rec.ok) continue;
        for (const auto& r : rec.targets) {
            const auto* pair = words.find(r.truth);
            scored.push_back({info.stimulus_id, rec.strategy, pair->tense_word == r.truth ? "tense" : "lax",
                              info.targets.size() > 1 ? "double" : "single", info.distractor, r});
        }
    }
    report.wer = wer_report(scored);
    return report;
}

Json asr_report_to_json(const AsrReport& report) {
    Json recs = Json::array();
    for (const auto& r : report.records) {
        Json e;
        e["stimulus_id"] = r.stimulus_id;
        e["strategy"] = r.strategy;
        e["ok"] = r.ok;
        if (r.ok) {
            e["transcript"] = r.transcript;
            Json t = Json::array();
            for (const auto& s : r.targets) {
                Json x;
                x["truth"] = s.truth;
                x["heard"] = s.selected;
                x["outcome"] = std::string(to_string(s.outcome));
                t.push_back(std::move(x));
            }
            e["targets"] = std::move(t);
            e["transcript_wer"] = r.transcript_wer;
        } else {
            e["error"] = r.error;
        }
        recs.push_back(std::move(e));
    }
    Json j;
    j["records"] = std::move(recs);
    j["wer"] = wer_report_to_json(report.wer);
    return j;
}

}  // namespace ratesculpt

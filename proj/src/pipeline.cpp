#include "ratesculpt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <map>

#include "ratesculpt/error.hpp"
#include "ratesculpt/json_io.hpp"
#include "ratesculpt/rng.hpp"
#include "ratesculpt/scissor.hpp"

namespace ratesculpt {

namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& path, const Json& j) {
    write_text_file(path, dump_canonical(j) + "\n");
}

void write_log(const fs::path& path, const std::vector<TrialRecord>& trials) {
    std::string text;
    for (const auto& t : trials) text += to_log_line(t) + "\n";
    write_text_file(path, text);
}

std::string participant_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "sim%02zu", i + 1);
    return buf;
}

std::string level_stimulus_id(int k) {
    if (k == 0) return "scissor_0";
    return std::string("scissor_") + (k < 0 ? "m" : "p") + std::to_string(std::abs(k));
}

}  // namespace

Json kernel_stats_report(const std::vector<std::string>& participants, const std::vector<revcor::Kernel>& kernels,
                         const revcor::GroupTestOptions& opts, const std::vector<double>& template_weights) {
    require(participants.size() == kernels.size(), "one kernel per participant expected");
    require(!kernels.empty(), "no kernels");
    std::vector<std::vector<double>> a, b;
    const auto n = kernels.front().weights.size();
    std::vector<double> mean(n, 0.0);
    for (const auto& k : kernels) {
        require(k.weights.size() == n, "kernels differ in length");
        a.push_back(k.class_kernels[0]);
        b.push_back(k.class_kernels[1]);
        for (std::size_t i = 0; i < n; ++i) mean[i] += k.weights[i] / static_cast<double>(kernels.size());
    }
    const auto st = revcor::group_ttest(a, b, opts);

    Json j;
    j["participants"] = participants;
    j["dimension"] = std::string(revcor::to_string(kernels.front().dimension));
    j["response_classes"] = kernels.front().response_classes;
    j["df"] = st.df;
    j["holm"] = st.holm;
    j["alpha"] = st.alpha;
    j["mean_kernel"] = mean;
    if (!template_weights.empty()) j["cosine_to_template"] = revcor::cosine_similarity(mean, template_weights);
    Json windows = Json::array();
    for (std::size_t i = 0; i < n; ++i)
        windows.push_back({{"window", i},
                           {"mean_kernel", mean[i]},
                           {"t", st.t[i]},
                           {"p", st.p[i]},
                           {"adjusted_p", st.adjusted_p[i]},
                           {"significant", static_cast<bool>(st.significant[i])}});
    j["windows"] = std::move(windows);
    return j;
}

Study1Result pipeline_study1(const AudioBuffer& base, const std::string& base_path, const fs::path& out_dir,
                             const Study1Options& opts) {
    require(opts.n_stimuli >= 1, "study1 needs at least one stimulus");
    Study1Result r;
    BatchOptions bo;
    bo.window_ms = opts.window_ms;
    bo.render = opts.render;
    bo.workers = opts.workers;
    r.manifest = generate_batch(base, base_path, opts.n_stimuli, opts.params, opts.seed, out_dir, bo);
    if (!opts.simulate) return r;
    require(opts.participants >= 2, "simulation needs at least two participants");

    revcor::SpecIndex specs;
    specs.add(r.manifest);
    const auto n_windows = r.manifest.stimuli.front().spec.stretch.size();
    r.template_weights = revcor::scissor_template(n_windows);
    revcor::SyntheticObserver observer{r.template_weights, opts.internal_noise_sd};

    const auto& [label_a, label_b] = opts.labels;
    revcor::KernelOptions ko;
    ko.class_a = label_a;
    ko.class_b = label_b;
    for (std::size_t p = 0; p < opts.participants; ++p) {
        const auto pid = participant_name(p);
        Rng rng(derive_seed(opts.seed, fnv1a(pid)));
        std::vector<std::size_t> order(r.manifest.stimuli.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        std::vector<TrialRecord> mine;
        for (auto i : order) {
            const auto& entry = r.manifest.stimuli[i];
            TrialRecord t;
            t.participant_id = pid;
            t.session_id = pid;
            t.stimulus_id = entry.stimulus_id;
            t.condition = "revcor";
            t.option_groups = {{label_a, label_b}};
            const int cls = observer.respond(revcor::features(entry.spec, opts.dimension), rng);
            t.responses = {static_cast<std::size_t>(cls)};
            mine.push_back(std::move(t));
        }
        r.kernels.push_back(revcor::compute_kernel(mine, specs, opts.dimension, ko));
        r.participants.push_back(pid);
        r.trials.insert(r.trials.end(), mine.begin(), mine.end());
    }

    r.stats = revcor::group_ttest(
        [&] {
            std::vector<std::vector<double>> a;
            for (const auto& k : r.kernels) a.push_back(k.class_kernels[0]);
            return a;
        }(),
        [&] {
            std::vector<std::vector<double>> b;
            for (const auto& k : r.kernels) b.push_back(k.class_kernels[1]);
            return b;
        }(),
        revcor::GroupTestOptions{opts.holm, 0.05});

    write_log(out_dir / "trials.log.jsonl", r.trials);
    fs::create_directories(out_dir / "kernels");
    for (std::size_t p = 0; p < r.kernels.size(); ++p)
        write_json(out_dir / "kernels" / (r.participants[p] + ".json"), revcor::kernel_to_json(r.kernels[p]));

    r.report = kernel_stats_report(r.participants, r.kernels, {opts.holm, 0.05}, r.template_weights);
    r.report["batch_id"] = r.manifest.batch_id;
    r.report["window_ms"] = r.manifest.window_ms;
    r.report["n_stimuli"] = r.manifest.stimuli.size();
    r.report["internal_noise_sd"] = opts.internal_noise_sd;
    write_json(out_dir / "report.json", r.report);
    return r;
}

Study2Result pipeline_study2(const AudioBuffer& base, const fs::path& out_dir, const Study2Options& opts) {
    require(opts.target != opts.other, "target and other word must differ");
    Study2Result r;
    fs::create_directories(out_dir / "audio");

    Block block{"scissor", {}};
    for (const auto& level : scissor_grid()) {
        const auto id = level_stimulus_id(level.level_index);
        const auto rel = "audio/" + id + ".wav";
        write_wav(out_dir / rel, apply_scissor(base, opts.word_start_s, opts.word_end_s, level));

        StimulusInfo info;
        info.stimulus_id = id;
        info.targets = {opts.target};
        info.condition = "level=" + std::to_string(level.level_index);
        info.level = level.level_index;
        info.sentence_type = "single";
        info.wav_path = rel;
        r.table.stimuli.push_back(info);

        TrialSpec spec;
        spec.stimulus_id = id;
        spec.wav_path = id + ".wav";
        spec.condition = info.condition;
        spec.targets = {opts.target};
        spec.option_groups = {{opts.target, opts.other}};
        block.trials.push_back(std::move(spec));
    }
    r.config.experiment_id = "study2";
    r.config.task = Task::TwoAfc;
    r.config.seed = opts.seed;
    r.config.trials_per_stimulus = std::max<std::size_t>(1, opts.trials_per_level);
    r.config.audio_dir = out_dir / "audio";
    r.config.blocks = {std::move(block)};
    r.config.ui = {{"instructions", "Which word did you hear?"}};
    r.config.validate(true);

    write_json(out_dir / "stimuli.json", stimulus_table_to_json(r.table));
    auto cj = experiment_config_to_json(r.config);
    cj["audio_dir"] = "audio";
    write_json(out_dir / "experiment.json", cj);
    if (!opts.simulate) return r;

    for (std::size_t p = 0; p < opts.participants; ++p) {
        const auto pid = participant_name(p);
        Rng rng(derive_seed(opts.seed, fnv1a(pid)));
        // Each listener gets their own offset so per-participant baselines differ.
        const double offset = 0.3 * (rng.uniform() - 0.5);
        for (const auto& info : r.table.stimuli) {
            const double logit = opts.listener_intercept + offset + opts.listener_slope * *info.level;
            const double pc = 1.0 / (1.0 + std::exp(-logit));
            for (std::size_t k = 0; k < opts.trials_per_level; ++k) {
                TrialRecord t;
                t.participant_id = pid;
                t.session_id = pid;
                t.stimulus_id = info.stimulus_id;
                t.condition = info.condition;
                t.option_groups = {{opts.target, opts.other}};
                t.responses = {rng.uniform() < pc ? 0u : 1u};
                r.trials.push_back(std::move(t));
            }
        }
    }
    write_log(out_dir / "trials.log.jsonl", r.trials);
    r.curve = accuracy_curve(level_trials(r.trials, r.table));
    write_json(out_dir / "curve.json", curve_to_json(*r.curve));
    return r;
}

std::string masked_prompt(const std::string& flagged_text) {
    auto text = parse_flagged(flagged_text);
    static constexpr const char* kSlots[] = {"X", "Y", "Z"};
    std::size_t slot = 0;
    for (auto i : text.flagged_indices()) {
        text.tokens[i].text = slot < 3 ? kSlots[slot] : "X" + std::to_string(slot + 1);
        ++slot;
    }
    return flag_words(text, {});
}

Json mos_ui_strings() {
    const std::array<std::array<const char*, 3>, 6> rows{{
        {"How natural (pleasantly humanlike) was the sound of the voice?", "Extremely unnatural",
         "Perfectly natural"},
        {"Please rate the extent to which it was easy or difficult to understand what the voice was saying.",
         "Completely unintelligible", "Completely intelligible"},
        {"To what extent were the elements of timing, pitch and emphasis appropriate for the message?",
         "Completely inappropriate", "Always appropriate"},
        {"Please rate the degree of effort you had to make to understand the message.",
         "Impossible even with much effort", "No effort required"},
        {"For an English second language speaker being spoken to with this voice, how respectful is the voice?",
         "Condescending", "Respectful"},
        {"For an English second language speaker being spoken to with this voice, how encouraging is the voice?",
         "Not encouraging", "Encouraging"},
    }};
    Json scales = Json::array();
    for (std::size_t i = 0; i < rows.size(); ++i)
        scales.push_back({{"scale", std::string(MosRecord::kScales[i])},
                          {"question", rows[i][0]},
                          {"low", rows[i][1]},
                          {"high", rows[i][2]},
                          {"min", 0},
                          {"max", 10}});
    return scales;
}

Study3Result pipeline_study3(const std::vector<Sentence>& sentences, const WordList& words, const fs::path& out_dir,
                             const Study3Options& opts) {
    require(!sentences.empty(), "no sentences");
    Study3Result r;
    fs::create_directories(out_dir / "plans");

    Block single{"single", {}}, dbl{"double", {}};
    auto add = [&](const Sentence& s, const std::string& stem, const std::string& flagged, Strategy strategy,
                   bool distractor) {
        auto p = plan_text(flagged, strategy, opts.plan, opts.phonemizer);
        write_text_file(out_dir / "plans" / (stem + ".json"), emit_plan(p));

        StimulusInfo info;
        info.stimulus_id = stem;
        info.targets = target_words(flagged);
        info.condition = std::string(to_string(strategy));
        info.distractor = distractor;
        info.sentence_type = s.is_double() ? "double" : "single";
        info.wav_path = "audio/" + stem + ".wav";
        info.text = flagged;
        r.table.stimuli.push_back(info);

        TrialSpec spec;
        spec.stimulus_id = stem;
        spec.wav_path = stem + ".wav";
        spec.condition = distractor ? "distractor" : info.condition;
        spec.targets = info.targets;
        for (const auto& t : info.targets) {
            const auto o = words.options(strip_punctuation_lower(t));
            spec.option_groups.emplace_back(o.begin(), o.end());
        }
        spec.prompt = masked_prompt(flagged);
        (s.is_double() ? dbl : single).trials.push_back(std::move(spec));
        r.plans.emplace_back(stem, std::move(p));
    };

    for (const auto& s : sentences) {
        for (auto strategy : kAllStrategies)
            add(s, s.sentence_id + "_" + std::string(to_string(strategy)), s.text, strategy, false);
        if (opts.distractors) {
            // Presented once, under one strategy drawn per sentence.
            Rng rng(derive_seed(opts.seed, fnv1a(s.sentence_id)));
            const auto strategy = kAllStrategies[rng.below(std::size(kAllStrategies))];
            add(s, s.sentence_id + "_distractor", swap_targets(s.text, words), strategy, true);
        }
    }
    write_json(out_dir / "stimuli.json", stimulus_table_to_json(r.table));
    if (!opts.distractors) return r;

    ExperimentConfig c;
    c.experiment_id = opts.experiment_id;
    c.task = Task::FourAfcMos;
    c.seed = opts.seed;
    c.audio_dir = out_dir / "audio";
    if (!single.trials.empty()) c.blocks.push_back(std::move(single));
    if (!dbl.trials.empty()) c.blocks.push_back(std::move(dbl));
    c.ui = {{"instructions",
             "Listen to the sentence and select the word you heard for each missing slot. "
             "In two-word sentences it is possible to hear the same word twice."},
            {"mos", mos_ui_strings()}};
    c.validate(false);
    auto cj = experiment_config_to_json(c);
    cj["audio_dir"] = "audio";
    write_json(out_dir / "experiment.json", cj);
    r.config = std::move(c);
    return r;
}

}  // namespace ratesculpt

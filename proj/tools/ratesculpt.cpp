// ratesculpt command-line entry point.
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "httplib.h"
#include "ratesculpt/audio.hpp"
#include "ratesculpt/corpus.hpp"
#include "ratesculpt/error.hpp"
#include "ratesculpt/eval.hpp"
#include "ratesculpt/json_io.hpp"
#include "ratesculpt/pipeline.hpp"
#include "ratesculpt/planner.hpp"
#include "ratesculpt/revcor.hpp"
#include "ratesculpt/scissor.hpp"
#include "ratesculpt/service.hpp"
#include "ratesculpt/stimgen.hpp"
#include "ratesculpt/trial_log.hpp"

namespace fs = std::filesystem;
using namespace ratesculpt;

namespace {

enum Exit { kOk = 0, kInvalid = 2, kExternal = 3, kIo = 4 };

int exit_code(ErrorCode c) {
    switch (c) {
        case ErrorCode::ExternalService: return kExternal;
        case ErrorCode::IoError: return kIo;
        default: return kInvalid;
    }
}

struct Globals {
    std::string data_dir = ".";
    bool force = false;

    fs::path in(const std::string& p) const {
        fs::path path(p);
        return path.is_absolute() ? path : fs::path(data_dir) / path;
    }

    // Refuses to replace an existing file or a non-empty directory.
    fs::path out(const std::string& p) const {
        auto path = in(p);
        if (!force && fs::exists(path) && !(fs::is_directory(path) && fs::is_empty(path)))
            fail(ErrorCode::IoError, path.string() + " exists; pass --force to overwrite");
        return path;
    }

    fs::path shipped_or(const std::string& p, const char* file) const {
        return p.empty() ? fs::path(RATESCULPT_DATA_DIR) / file : in(p);
    }
};

void emit(const std::string& text, const std::string& out, const Globals& g) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    write_text_file(g.out(out), text);
}

void emit_json(const Json& j, const std::string& out, const Globals& g) { emit(dump_canonical(j) + "\n", out, g); }

std::pair<std::string, std::string> split_labels(const std::string& s) {
    const auto comma = s.find(',');
    require(comma != std::string::npos && comma > 0 && comma + 1 < s.size(), "--labels expects A,B");
    return {s.substr(0, comma), s.substr(comma + 1)};
}

// Kernels per participant keyed by id, read from a directory of <id>.json or one combined file.
std::map<std::string, revcor::Kernel> read_kernels(const fs::path& path) {
    std::map<std::string, revcor::Kernel> out;
    if (fs::is_directory(path)) {
        for (const auto& e : fs::directory_iterator(path))
            if (e.path().extension() == ".json")
                out.emplace(e.path().stem().string(), revcor::kernel_from_json(read_json_file(e.path())));
    } else {
        const auto j = read_json_file(path);
        for (const auto& [pid, k] : j.at("kernels").items()) out.emplace(pid, revcor::kernel_from_json(k));
    }
    require(!out.empty(), "no kernels found in " + path.string());
    return out;
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ratesculpt: speech-rate reverse correlation, scissor manipulation, duration planning, "
                 "evaluation and experiment serving"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--data-dir", g.data_dir, "Base directory for relative paths")->capture_default_str();
    app.add_flag("--force", g.force, "Overwrite existing outputs");

    std::function<void()> action;
    auto run = [&](CLI::App* sub, std::function<void()> f) { sub->callback([&action, f] { action = f; }); };

    // stimgen
    auto* stimgen = app.add_subcommand("stimgen", "Sample and render a reverse-correlation batch");
    std::string sg_base, sg_out, sg_batch;
    std::size_t sg_n = 500;
    double sg_window = 100.0;
    SamplingParams sg_params;
    std::uint64_t sg_seed = 1;
    bool sg_no_render = false;
    unsigned sg_workers = 0;
    stimgen->add_option("--base", sg_base, "Base recording (WAV)")->required();
    stimgen->add_option("--n", sg_n, "Number of stimuli")->capture_default_str();
    stimgen->add_option("--window-ms", sg_window, "Window length in ms")->capture_default_str();
    stimgen->add_option("--sigma-pitch", sg_params.sigma_pitch_cents, "Pitch std in cents")->capture_default_str();
    stimgen->add_option("--sigma-stretch", sg_params.sigma_stretch, "Std of log2 stretch")->capture_default_str();
    stimgen->add_option("--clip", sg_params.clip_sigmas, "Clip bound in sigmas")->capture_default_str();
    stimgen->add_option("--seed", sg_seed, "Batch seed")->capture_default_str();
    stimgen->add_option("--out", sg_out, "Output directory")->required();
    stimgen->add_option("--batch-id", sg_batch, "Batch id (default <base stem>-<seed>)");
    stimgen->add_option("--workers", sg_workers, "Render threads (0 = all cores)");
    stimgen->add_flag("--no-render", sg_no_render, "Write only the manifest");
    run(stimgen, [&] {
        const auto base_path = g.in(sg_base);
        const auto out = g.out(sg_out);
        const auto m = generate_batch(read_wav(base_path), base_path.string(), sg_n, sg_params, sg_seed, out,
                                      {sg_batch, sg_window, !sg_no_render, sg_workers});
        std::cout << m.stimuli.size() << " stimuli -> " << (out / "manifest.json").string() << "\n";
    });

    // revcor
    auto* revcor_cmd = app.add_subcommand("revcor", "First-order kernels and group statistics");
    revcor_cmd->require_subcommand(1);
    auto* kernels = revcor_cmd->add_subcommand("kernels", "Compute one kernel per participant from a trial log");
    std::string rk_trials, rk_out, rk_dim = "stretch", rk_labels, rk_condition;
    std::vector<std::string> rk_manifests;
    kernels->add_option("--trials", rk_trials, "Trial log (JSONL)")->required();
    kernels->add_option("--manifest", rk_manifests, "Batch manifest(s)")->required();
    kernels->add_option("--dimension", rk_dim, "stretch or pitch")->capture_default_str();
    kernels->add_option("--labels", rk_labels, "Response classes A,B (default: first trial's options)");
    kernels->add_option("--condition", rk_condition, "Only trials with this condition");
    kernels->add_option("--out", rk_out, "Output: a .json file holding all kernels, or a directory")->required();
    run(kernels, [&] {
        revcor::SpecIndex specs;
        for (const auto& m : rk_manifests) specs.add(read_manifest(g.in(m)));
        const auto dim = revcor::parse_dimension(rk_dim);
        revcor::KernelOptions ko;
        if (!rk_labels.empty()) std::tie(ko.class_a, ko.class_b) = split_labels(rk_labels);
        std::map<std::string, std::vector<TrialRecord>> by_participant;
        for (auto& t : read_trial_log(g.in(rk_trials)))
            if (rk_condition.empty() || t.condition == rk_condition) by_participant[t.participant_id].push_back(t);
        require(!by_participant.empty(), "no trials");
        Json all = Json::object();
        for (const auto& [pid, trials] : by_participant) all[pid] = revcor::kernel_to_json(revcor::compute_kernel(trials, specs, dim, ko));
        if (fs::path(rk_out).extension() == ".json") {
            emit_json({{"kernels", all}}, rk_out, g);
        } else {
            const auto dir = g.out(rk_out);
            fs::create_directories(dir);
            for (const auto& [pid, k] : all.items()) write_text_file(dir / (pid + ".json"), dump_canonical(k) + "\n");
        }
        std::cout << by_participant.size() << " kernels\n";
    });
    auto* kstats = revcor_cmd->add_subcommand("stats", "Per-window paired t-tests across participants");
    std::string rs_kernels, rs_out;
    bool rs_holm = false;
    double rs_alpha = 0.05;
    kstats->add_option("--kernels", rs_kernels, "Kernel directory or combined file")->required();
    kstats->add_flag("--holm", rs_holm, "Holm-correct across windows");
    kstats->add_option("--alpha", rs_alpha, "Significance level")->capture_default_str();
    kstats->add_option("--out", rs_out, "Report file (default stdout)");
    run(kstats, [&] {
        std::vector<std::string> ids;
        std::vector<revcor::Kernel> ks;
        for (auto& [pid, k] : read_kernels(g.in(rs_kernels))) {
            ids.push_back(pid);
            ks.push_back(std::move(k));
        }
        emit_json(kernel_stats_report(ids, ks, {rs_holm, rs_alpha}), rs_out, g);
    });

    // scissor
    auto* scissor = app.add_subcommand("scissor", "Slow or speed a word against its context");
    std::string sc_in, sc_out;
    double sc_start = -1.0, sc_end = -1.0;
    int sc_level = 0;
    scissor->add_option("--in", sc_in, "Input WAV");
    scissor->add_option("--word-start", sc_start, "Word onset in seconds");
    scissor->add_option("--word-end", sc_end, "Word offset in seconds");
    scissor->add_option("--level", sc_level, "Level -5..5")->check(CLI::Range(-kScissorMaxLevel, kScissorMaxLevel));
    scissor->add_option("--out", sc_out, "Output WAV");
    auto* grid = scissor->add_subcommand("grid", "Print the 11-level table");
    run(grid, [&] {
        std::cout << "level\tcontext_speed\tword_duration\n";
        for (const auto& l : scissor_grid())
            std::cout << l.level_index << "\t" << format_fixed(l.context_speed) << "\t"
                      << format_fixed(l.word_duration) << "\n";
    });
    scissor->callback([&] {
        if (grid->parsed()) return;
        action = [&] {
            require(!sc_in.empty() && !sc_out.empty(), "scissor needs --in and --out");
            require(sc_start >= 0 && sc_end > sc_start, "scissor needs --word-start < --word-end");
            const auto in = read_wav(g.in(sc_in));
            write_wav(g.out(sc_out), apply_scissor(in, sc_start, sc_end, scissor_level(sc_level)));
        };
    });

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Per-phoneme duration multipliers for flagged text");
    std::string pl_text, pl_strategy = "proposed", pl_out, pl_phonemizer;
    PlanOptions pl_opts;
    plan_cmd->add_option("--text", pl_text, "Text with !flagged! words")->required();
    plan_cmd->add_option("--strategy", pl_strategy,
                         "proposed | baseline | stretch-everywhere | stretch-every-target")
        ->capture_default_str();
    plan_cmd->add_option("--base-rate", pl_opts.base_rate, "Baseline duration multiplier")->capture_default_str();
    plan_cmd->add_option("--stretch", pl_opts.target_stretch, "Target stretch over the base rate")
        ->capture_default_str();
    plan_cmd->add_option("--ramp-items", pl_opts.ramp_items, "Ramp length in phoneme items")->capture_default_str();
    plan_cmd->add_option("--phonemizer", pl_phonemizer, "Command printing IPA for a word (lexicon misses)");
    plan_cmd->add_option("--out", pl_out, "Plan file (default stdout)");
    run(plan_cmd, [&] {
        const Phonemizer ph = pl_phonemizer.empty() ? Phonemizer{} : command_phonemizer(pl_phonemizer);
        emit(emit_plan(plan_text(pl_text, parse_strategy(pl_strategy), pl_opts, ph)), pl_out, g);
    });

    // eval
    auto* eval = app.add_subcommand("eval", "Scoring and statistics");
    eval->require_subcommand(1);
    std::string ev_trials, ev_pairs, ev_stimuli, ev_out, ev_format = "json";
    auto* wer = eval->add_subcommand("wer", "WER tables with in-pair / out-of-pair errors");
    wer->add_option("--trials", ev_trials, "Trial log")->required();
    wer->add_option("--pairs", ev_pairs, "Word pair list (default: shipped list)");
    wer->add_option("--stimuli", ev_stimuli, "Stimulus table")->required();
    wer->add_option("--format", ev_format, "json or tsv")->check(CLI::IsMember({"json", "tsv"}))->capture_default_str();
    wer->add_option("--out", ev_out, "Report file (default stdout)");
    run(wer, [&] {
        const auto words = load_word_list(g.shipped_or(ev_pairs, "word_pairs.json"));
        const auto table = load_stimulus_table(g.in(ev_stimuli));
        const auto report = wer_report(score_trials(read_trial_log(g.in(ev_trials)), table, words));
        if (ev_format == "tsv")
            emit(wer_report_to_tsv(report), ev_out, g);
        else
            emit_json(wer_report_to_json(report), ev_out, g);
    });
    auto* curve = eval->add_subcommand("curve", "Baseline-normalized accuracy by level with a logistic fit");
    double ev_baseline = 0.0;
    curve->add_option("--trials", ev_trials, "Trial log")->required();
    curve->add_option("--stimuli", ev_stimuli, "Stimulus table with levels")->required();
    curve->add_option("--baseline-level", ev_baseline, "Reference level")->capture_default_str();
    curve->add_option("--out", ev_out, "Report file (default stdout)");
    run(curve, [&] {
        CurveOptions co;
        co.baseline_level = ev_baseline;
        const auto trials = read_trial_log(g.in(ev_trials));
        emit_json(curve_to_json(accuracy_curve(level_trials(trials, load_stimulus_table(g.in(ev_stimuli))), co)),
                  ev_out, g);
    });
    auto* mos = eval->add_subcommand("mos", "MOS per strategy with Wilcoxon and Holm");
    mos->add_option("--trials", ev_trials, "Trial log")->required();
    mos->add_option("--stimuli", ev_stimuli, "Stimulus table")->required();
    mos->add_option("--out", ev_out, "Report file (default stdout)");
    run(mos, [&] {
        const auto trials = read_trial_log(g.in(ev_trials));
        emit_json(mos_report_to_json(mos_aggregate(mos_observations(trials, load_stimulus_table(g.in(ev_stimuli))))),
                  ev_out, g);
    });
    auto* asr = eval->add_subcommand("asr", "Send stimuli to a transcription service and score the targets");
    std::string asr_dir, asr_expect, asr_url;
    double asr_timeout = 30.0;
    unsigned asr_concurrency = 4;
    asr->add_option("--stimuli", asr_dir, "Directory the table's wav paths are relative to")->required();
    asr->add_option("--expect", asr_expect, "Stimulus table with expected targets (default <stimuli>/stimuli.json)");
    asr->add_option("--pairs", ev_pairs, "Word pair list (default: shipped list)");
    asr->add_option("--url", asr_url, "Transcription endpoint (default $RATESCULPT_ASR_URL)");
    asr->add_option("--timeout", asr_timeout, "Per-request timeout in seconds")->capture_default_str();
    asr->add_option("--concurrency", asr_concurrency, "Parallel requests")->capture_default_str();
    asr->add_option("--out", ev_out, "Report file (default stdout)");
    run(asr, [&] {
        const auto timeout = std::chrono::milliseconds(static_cast<long long>(asr_timeout * 1000));
        std::unique_ptr<TranscriptionClient> client;
        if (!asr_url.empty())
            client = std::make_unique<HttpTranscriptionClient>(asr_url, timeout);
        else
            client = HttpTranscriptionClient::from_environment(timeout);
        require(client != nullptr, "no transcription endpoint: pass --url or set RATESCULPT_ASR_URL");
        const auto dir = g.in(asr_dir);
        const auto table = load_stimulus_table(asr_expect.empty() ? dir / "stimuli.json" : g.in(asr_expect));
        const auto words = load_word_list(g.shipped_or(ev_pairs, "word_pairs.json"));
        emit_json(asr_report_to_json(transcribe_eval(table, dir, *client, words, asr_concurrency)), ev_out, g);
    });

    // serve
    auto* serve = app.add_subcommand("serve", "Run the experiment service");
    std::vector<std::string> sv_configs;
    std::string sv_data, sv_host = "127.0.0.1";
    int sv_port = 0;
    serve->add_option("--config", sv_configs, "Experiment config file(s)")->required();
    serve->add_option("--data", sv_data, "Directory for the append-only logs")->required();
    serve->add_option("--host", sv_host, "Bind address")->capture_default_str();
    serve->add_option("--port", sv_port, "Port (default $RATESCULPT_PORT or 8080)");
    run(serve, [&] {
        if (sv_port == 0) {
            const char* env = std::getenv("RATESCULPT_PORT");
            sv_port = env ? std::atoi(env) : 8080;
        }
        require(sv_port > 0 && sv_port < 65536, "invalid port");
        ExperimentService service(g.in(sv_data));
        for (const auto& c : sv_configs) service.add_experiment(load_experiment_config(g.in(c)));
        auto server = make_http_server(service);
        g_server = server.get();
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        if (!server->bind_to_port(sv_host, sv_port)) fail(ErrorCode::IoError, "cannot bind " + sv_host + ":" + std::to_string(sv_port));
        std::cout << "listening on " << sv_host << ":" << sv_port << std::endl;
        server->listen_after_bind();
        g_server = nullptr;
    });

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "End-to-end study flows at desk scale");
    pipeline->require_subcommand(1);
    std::string pp_out, pp_base;
    std::uint64_t pp_seed = 1;
    bool pp_no_simulate = false;

    auto* s1 = pipeline->add_subcommand("study1", "Batch, simulated listeners, kernels and report");
    Study1Options s1o;
    std::string s1_labels = "peel,pill", s1_dim = "stretch";
    s1->add_option("--base", pp_base, "Base recording (WAV)")->required();
    s1->add_option("--n", s1o.n_stimuli, "Stimuli in the batch")->capture_default_str();
    s1->add_option("--window-ms", s1o.window_ms, "Window length in ms")->capture_default_str();
    s1->add_option("--sigma-pitch", s1o.params.sigma_pitch_cents, "Pitch std in cents")->capture_default_str();
    s1->add_option("--sigma-stretch", s1o.params.sigma_stretch, "Std of log2 stretch")->capture_default_str();
    s1->add_option("--clip", s1o.params.clip_sigmas, "Clip bound in sigmas")->capture_default_str();
    s1->add_option("--participants", s1o.participants, "Simulated listeners")->capture_default_str();
    s1->add_option("--noise", s1o.internal_noise_sd, "Listener internal noise sd")->capture_default_str();
    s1->add_option("--labels", s1_labels, "Response classes A,B")->capture_default_str();
    s1->add_option("--dimension", s1_dim, "stretch or pitch")->capture_default_str();
    s1->add_option("--seed", pp_seed, "Seed")->capture_default_str();
    s1->add_option("--out", pp_out, "Output directory")->required();
    s1->add_flag("--no-simulate", pp_no_simulate, "Stop after the batch");
    s1->add_flag("--no-render{false}", s1o.render, "Write only the manifest, no WAVs");
    run(s1, [&] {
        s1o.seed = pp_seed;
        s1o.simulate = !pp_no_simulate;
        s1o.labels = split_labels(s1_labels);
        s1o.dimension = revcor::parse_dimension(s1_dim);
        const auto base = g.in(pp_base);
        const auto r = pipeline_study1(read_wav(base), base.string(), g.out(pp_out), s1o);
        std::cout << r.manifest.stimuli.size() << " stimuli";
        if (r.stats) std::cout << ", " << r.kernels.size() << " kernels, cosine to template "
                               << format_fixed(r.report.at("cosine_to_template").get<double>(), 3);
        std::cout << "\n";
    });

    auto* s2 = pipeline->add_subcommand("study2", "Scissor grid, 2AFC config and simulated accuracy curve");
    Study2Options s2o;
    s2->add_option("--base", pp_base, "Sentence recording (WAV)")->required();
    s2->add_option("--word-start", s2o.word_start_s, "Word onset in seconds")->required();
    s2->add_option("--word-end", s2o.word_end_s, "Word offset in seconds")->required();
    s2->add_option("--target", s2o.target, "Word spoken in the recording")->capture_default_str();
    s2->add_option("--other", s2o.other, "Competing option")->capture_default_str();
    s2->add_option("--participants", s2o.participants, "Simulated listeners")->capture_default_str();
    s2->add_option("--trials-per-level", s2o.trials_per_level, "Repetitions per level")->capture_default_str();
    s2->add_option("--seed", pp_seed, "Seed")->capture_default_str();
    s2->add_option("--out", pp_out, "Output directory")->required();
    s2->add_flag("--no-simulate", pp_no_simulate, "Skip the simulated listeners");
    run(s2, [&] {
        s2o.seed = pp_seed;
        s2o.simulate = !pp_no_simulate;
        const auto r = pipeline_study2(read_wav(g.in(pp_base)), g.out(pp_out), s2o);
        std::cout << r.table.stimuli.size() << " levels, " << r.config.total_trials() << " trials\n";
    });

    auto* s3 = pipeline->add_subcommand("study3", "Duration plans for every strategy, stimulus table and 4AFC config");
    Study3Options s3o;
    std::string s3_pairs, s3_sentences, s3_sentence, s3_phonemizer;
    s3->add_option("--pairs", s3_pairs, "Word pair list (default: shipped list)");
    s3->add_option("--sentences", s3_sentences, "Sentence list (default: shipped list)");
    s3->add_option("--sentence", s3_sentence, "Plan a single flagged sentence instead (4 plans)");
    s3->add_option("--phonemizer", s3_phonemizer, "Command printing IPA for a word (lexicon misses)");
    s3->add_option("--base-rate", s3o.plan.base_rate, "Baseline duration multiplier")->capture_default_str();
    s3->add_option("--stretch", s3o.plan.target_stretch, "Target stretch over the base rate")->capture_default_str();
    s3->add_option("--ramp-items", s3o.plan.ramp_items, "Ramp length in phoneme items")->capture_default_str();
    s3->add_option("--experiment-id", s3o.experiment_id, "Experiment id in the config")->capture_default_str();
    s3->add_option("--seed", pp_seed, "Seed")->capture_default_str();
    s3->add_option("--out", pp_out, "Output directory")->required();
    run(s3, [&] {
        s3o.seed = pp_seed;
        if (!s3_phonemizer.empty()) s3o.phonemizer = command_phonemizer(s3_phonemizer);
        const auto words = load_word_list(g.shipped_or(s3_pairs, "word_pairs.json"));
        std::vector<Sentence> sentences;
        if (!s3_sentence.empty()) {
            sentences.push_back({"sentence", "single", s3_sentence});
            if (target_words(s3_sentence).size() > 1) sentences.back().type = "double";
            s3o.distractors = false;
        } else {
            sentences = load_sentences(g.shipped_or(s3_sentences, "sentences.json"));
        }
        const auto r = pipeline_study3(sentences, words, g.out(pp_out), s3o);
        std::cout << r.plans.size() << " plans";
        if (r.config) std::cout << ", " << r.config->total_trials() << " trials";
        std::cout << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (action) action();
        return kOk;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error (IoError): " << e.what() << "\n";
        return kIo;
    } catch (const Json::exception& e) {
        std::cerr << "error (ParseError): " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
}

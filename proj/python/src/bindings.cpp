#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ratesculpt/audio.hpp"
#include "ratesculpt/corpus.hpp"
#include "ratesculpt/dsp.hpp"
#include "ratesculpt/error.hpp"
#include "ratesculpt/eval.hpp"
#include "ratesculpt/json_io.hpp"
#include "ratesculpt/pipeline.hpp"
#include "ratesculpt/planner.hpp"
#include "ratesculpt/revcor.hpp"
#include "ratesculpt/scissor.hpp"
#include "ratesculpt/service.hpp"
#include "ratesculpt/stats.hpp"
#include "ratesculpt/stimgen.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace ratesculpt;

// Structured results cross the boundary as canonical JSON text; the Python
// package parses them.
namespace {

using Samples = py::array_t<double, py::array::c_style | py::array::forcecast>;

AudioBuffer to_buffer(const Samples& x, int rate) {
    require(x.ndim() == 1, "audio must be a 1-D array");
    return {std::vector<double>(x.data(), x.data() + x.size()), rate};
}

Samples to_array(const AudioBuffer& b) { return Samples(static_cast<py::ssize_t>(b.size()), b.samples.data()); }

std::string compact(const Json& j) { return dump_canonical(j, -1); }

Json test_json(const stats::TestResult& t) {
    Json j{{"statistic", t.statistic}, {"p", t.p}};
    if (!std::isnan(t.df)) j["df"] = t.df;
    return j;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "ratesculpt native core";

    static py::exception<Error> error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, py::make_tuple(std::string(to_string(e.code())), e.what()));
        }
    });

    // audio
    m.def("read_wav", [](const fs::path& path) {
        const auto b = read_wav(path);
        return py::make_tuple(to_array(b), b.sample_rate);
    }, py::arg("path"));
    m.def("write_wav", [](const fs::path& path, const Samples& x, int rate) { write_wav(path, to_buffer(x, rate)); },
          py::arg("path"), py::arg("samples"), py::arg("sample_rate"));

    // dsp
    m.def("time_stretch", [](const Samples& x, int rate, const std::vector<double>& stretch, double window_ms) {
        const auto b = to_buffer(x, rate);
        return to_array(time_stretch(b, make_grid(b, window_ms), stretch));
    }, py::arg("samples"), py::arg("sample_rate"), py::arg("stretch"), py::arg("window_ms") = 100.0);
    m.def("pitch_shift", [](const Samples& x, int rate, const std::vector<double>& cents, double window_ms) {
        const auto b = to_buffer(x, rate);
        return to_array(pitch_shift(b, make_grid(b, window_ms), cents));
    }, py::arg("samples"), py::arg("sample_rate"), py::arg("pitch_cents"), py::arg("window_ms") = 100.0);
    m.def("apply_transform", [](const Samples& x, int rate, const std::vector<double>& stretch,
                                const std::vector<double>& cents, double window_ms) {
        const auto b = to_buffer(x, rate);
        return to_array(apply_transform(b, make_grid(b, window_ms), {stretch, cents}));
    }, py::arg("samples"), py::arg("sample_rate"), py::arg("stretch"), py::arg("pitch_cents"),
          py::arg("window_ms") = 100.0);
    m.def("flatten_pitch", [](const Samples& x, int rate, double target_hz) {
        return to_array(flatten_pitch(to_buffer(x, rate), target_hz));
    }, py::arg("samples"), py::arg("sample_rate"), py::arg("target_hz") = 120.0);

    // stimgen
    m.def("sample_transform", [](std::size_t n_windows, std::uint64_t seed, double sigma_pitch, double sigma_stretch,
                                 double clip) {
        const auto s = sample_transform(n_windows, {sigma_pitch, sigma_stretch, clip}, seed);
        return py::make_tuple(s.stretch, s.pitch_cents);
    }, py::arg("n_windows"), py::arg("seed"), py::arg("sigma_pitch") = 100.0, py::arg("sigma_stretch") = 1.0,
          py::arg("clip") = 2.0);
    m.def("generate_batch", [](const fs::path& base, std::size_t n, const fs::path& out_dir, std::uint64_t seed,
                               double window_ms, bool render) {
        const auto manifest = generate_batch(read_wav(base), base.string(), n, {}, seed, out_dir,
                                             {"", window_ms, render, 0});
        return serialize_manifest(manifest);
    }, py::arg("base"), py::arg("n"), py::arg("out_dir"), py::arg("seed") = 1, py::arg("window_ms") = 100.0,
          py::arg("render") = true);

    // revcor
    m.def("kernel", [](const std::vector<std::vector<double>>& features, const std::vector<int>& classes,
                       const std::string& dimension, const std::string& class_a, const std::string& class_b) {
        return compact(revcor::kernel_to_json(revcor::kernel_from_features(
            features, classes, revcor::parse_dimension(dimension), {class_a, class_b})));
    }, py::arg("features"), py::arg("classes"), py::arg("dimension") = "stretch", py::arg("class_a") = "A",
          py::arg("class_b") = "B");
    m.def("scissor_template", &revcor::scissor_template, py::arg("n_windows"));

    // scissor
    m.def("scissor_grid", [] {
        std::vector<std::tuple<int, double, double>> out;
        for (const auto& l : scissor_grid()) out.emplace_back(l.level_index, l.context_speed, l.word_duration);
        return out;
    });
    m.def("apply_scissor", [](const Samples& x, int rate, double start, double end, int level) {
        return to_array(apply_scissor(to_buffer(x, rate), start, end, scissor_level(level)));
    }, py::arg("samples"), py::arg("sample_rate"), py::arg("word_start"), py::arg("word_end"), py::arg("level"));

    // planner
    m.def("plan", [](const std::string& text, const std::string& strategy, double base_rate, double stretch,
                     std::size_t ramp_items) {
        return emit_plan(plan_text(text, parse_strategy(strategy), {base_rate, stretch, ramp_items}));
    }, py::arg("text"), py::arg("strategy") = "proposed", py::arg("base_rate") = 0.75, py::arg("stretch") = 1.6,
          py::arg("ramp_items") = 6);
    m.def("split_ipa", [](const std::string& ipa) {
        std::vector<std::string> out;
        for (const auto& p : split_ipa(ipa)) out.push_back(p.symbol);
        return out;
    }, py::arg("ipa"));
    m.def("classify_word", [](const std::string& word) {
        return std::string(to_string(classify_word(phonemize(parse_flagged("!" + word + "!")), 0)));
    }, py::arg("word"));
    m.def("study3", [](const fs::path& out_dir, const fs::path& pairs, const fs::path& sentences, std::uint64_t seed) {
        Study3Options o;
        o.seed = seed;
        const auto r = pipeline_study3(load_sentences(sentences), load_word_list(pairs), out_dir, o);
        std::vector<std::string> stems;
        for (const auto& [stem, p] : r.plans) stems.push_back(stem);
        return stems;
    }, py::arg("out_dir"), py::arg("pairs"), py::arg("sentences"), py::arg("seed") = 1);

    // stats
    m.def("wilcoxon", [](const std::vector<double>& d) { return compact(test_json(stats::wilcoxon_signed_rank(d))); },
          py::arg("differences"));
    m.def("holm", [](const std::vector<double>& p) { return stats::holm_correct(p).adjusted; }, py::arg("p_values"));
    m.def("chi_square_2x2", [](double a, double b, double c, double d, bool yates) {
        return compact(test_json(stats::chi_square_2x2({{{a, b}, {c, d}}}, yates)));
    }, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"), py::arg("yates") = false);

    // eval
    m.def("wer_report", [](const fs::path& trials, const fs::path& stimuli, const fs::path& pairs) {
        const auto scored = score_trials(read_trial_log(trials), load_stimulus_table(stimuli), load_word_list(pairs));
        return compact(wer_report_to_json(wer_report(scored)));
    }, py::arg("trials"), py::arg("stimuli"), py::arg("pairs"));

    // service
    py::class_<ExperimentService>(m, "ExperimentService")
        .def(py::init<fs::path>(), py::arg("data_dir"))
        .def("add_experiment", [](ExperimentService& s, const fs::path& config) {
            s.add_experiment(load_experiment_config(config));
        }, py::arg("config_path"))
        .def("create_session", [](ExperimentService& s, const std::string& exp, const std::string& pid) {
            return compact(session_info_to_json(s.create_session(exp, pid)));
        }, py::arg("experiment_id"), py::arg("participant_id"))
        .def("next_trial", [](ExperimentService& s, const std::string& sid) {
            const auto info = s.session(sid);
            return compact(trial_payload_to_json(s.next_trial(sid), s.experiment(info.experiment_id).ui));
        }, py::arg("session_id"))
        .def("submit_response", [](ExperimentService& s, const std::string& sid, const std::string& body) {
            return compact(session_info_to_json(s.submit_response(sid, submission_from_json(Json::parse(body)))));
        }, py::arg("session_id"), py::arg("body"))
        .def("export_log", &ExperimentService::export_log, py::arg("experiment_id"));
}

#include "ratesculpt/stimgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "ratesculpt/error.hpp"
#include "ratesculpt/json_io.hpp"
#include "ratesculpt/rng.hpp"

namespace ratesculpt {

void SamplingParams::validate() const {
    require(sigma_pitch_cents > 0 && sigma_stretch > 0 && clip_sigmas > 0,
            "sampling parameters must be positive");
}

TransformSpec transform_from_draws(std::span<const double> pitch_z, std::span<const double> stretch_z,
                                   const SamplingParams& params) {
    params.validate();
    require(pitch_z.size() == stretch_z.size(), "draw vectors differ in length");
    TransformSpec spec;
    spec.pitch_cents.reserve(pitch_z.size());
    spec.stretch.reserve(stretch_z.size());
    const double bound = params.clip_sigmas;
    for (std::size_t i = 0; i < pitch_z.size(); ++i) {
        spec.pitch_cents.push_back(std::clamp(pitch_z[i], -bound, bound) * params.sigma_pitch_cents);
        spec.stretch.push_back(std::exp2(std::clamp(stretch_z[i], -bound, bound) * params.sigma_stretch));
    }
    return spec;
}

TransformSpec sample_transform(std::size_t n_windows, const SamplingParams& params, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> pz(n_windows), sz(n_windows);
    for (std::size_t i = 0; i < n_windows; ++i) {
        pz[i] = rng.normal();
        sz[i] = rng.normal();
    }
    return transform_from_draws(pz, sz, params);
}

TransformSpec sample_transform(const WindowGrid& grid, const SamplingParams& params, std::uint64_t seed) {
    return sample_transform(grid.n_windows(), params, seed);
}

std::uint64_t stimulus_seed(std::uint64_t batch_seed, std::size_t index) { return derive_seed(batch_seed, index); }

StimulusManifest BatchManifest::stimulus(std::size_t i) const {
    const auto& e = stimuli.at(i);
    return {e.stimulus_id, base_audio, window_ms, e.spec, stimulus_seed(seed, e.index), batch_id};
}

const StimulusEntry* BatchManifest::find(const std::string& stimulus_id) const {
    for (const auto& e : stimuli)
        if (e.stimulus_id == stimulus_id) return &e;
    return nullptr;
}

bool BatchManifest::operator==(const BatchManifest& o) const {
    return batch_id == o.batch_id && base_audio == o.base_audio && window_ms == o.window_ms &&
           params.sigma_pitch_cents == o.params.sigma_pitch_cents &&
           params.sigma_stretch == o.params.sigma_stretch && params.clip_sigmas == o.params.clip_sigmas &&
           seed == o.seed && stimuli == o.stimuli;
}

std::string serialize_manifest(const BatchManifest& m) {
    Json doc;
    doc["batch_id"] = m.batch_id;
    doc["base_audio"] = m.base_audio;
    doc["window_ms"] = m.window_ms;
    doc["sigma_pitch_cents"] = m.params.sigma_pitch_cents;
    doc["sigma_stretch"] = m.params.sigma_stretch;
    doc["clip_sigmas"] = m.params.clip_sigmas;
    doc["seed"] = m.seed;
    Json stimuli = Json::array();
    for (const auto& e : m.stimuli) {
        Json s;
        s["stimulus_id"] = e.stimulus_id;
        s["index"] = e.index;
        s["stretch"] = e.spec.stretch;
        s["pitch_cents"] = e.spec.pitch_cents;
        s["wav_path"] = e.wav_path;
        stimuli.push_back(std::move(s));
    }
    doc["stimuli"] = std::move(stimuli);
    return dump_canonical(doc) + "\n";
}

BatchManifest parse_manifest(const std::string& text) {
    try {
        const auto doc = Json::parse(text);
        BatchManifest m;
        m.batch_id = doc.at("batch_id").get<std::string>();
        m.base_audio = doc.at("base_audio").get<std::string>();
        m.window_ms = doc.at("window_ms").get<double>();
        m.params.sigma_pitch_cents = doc.at("sigma_pitch_cents").get<double>();
        m.params.sigma_stretch = doc.at("sigma_stretch").get<double>();
        m.params.clip_sigmas = doc.at("clip_sigmas").get<double>();
        m.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& s : doc.at("stimuli")) {
            StimulusEntry e;
            e.stimulus_id = s.at("stimulus_id").get<std::string>();
            e.index = s.at("index").get<std::size_t>();
            e.spec.stretch = s.at("stretch").get<std::vector<double>>();
            e.spec.pitch_cents = s.at("pitch_cents").get<std::vector<double>>();
            e.wav_path = s.at("wav_path").get<std::string>();
            require(e.spec.stretch.size() == e.spec.pitch_cents.size(),
                    "manifest entry " + e.stimulus_id + " has mismatched spec lengths");
            m.stimuli.push_back(std::move(e));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidInput, std::string("malformed manifest: ") + e.what());
    }
}

BatchManifest read_manifest(const std::filesystem::path& path) { return parse_manifest(read_text_file(path)); }

void write_manifest(const std::filesystem::path& path, const BatchManifest& manifest) {
    write_text_file(path, serialize_manifest(manifest));
}

BatchManifest generate_batch(const AudioBuffer& base, const std::string& base_path, std::size_t n,
                             const SamplingParams& params, std::uint64_t seed,
                             const std::filesystem::path& out_dir, const BatchOptions& options) {
    require(n >= 1, "batch size must be at least 1");
    params.validate();
    const auto grid = make_grid(base, options.window_ms);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir))
        fail(ErrorCode::IoError, "cannot create output directory " + out_dir.string());

    BatchManifest m;
    m.batch_id = options.batch_id.empty()
                     ? std::filesystem::path(base_path).stem().string() + "-" + std::to_string(seed)
                     : options.batch_id;
    m.base_audio = base_path;
    m.window_ms = options.window_ms;
    m.params = params;
    m.seed = seed;
    m.stimuli.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& e = m.stimuli[i];
        char id[32];
        std::snprintf(id, sizeof id, "%04zu", i);
        e.stimulus_id = m.batch_id + "_" + id;
        e.index = i;
        // Stored values are what gets rendered, so the manifest reproduces the audio exactly.
        e.spec = sample_transform(grid, params, stimulus_seed(seed, i));
        for (double& v : e.spec.stretch) v = quantize(v);
        for (double& v : e.spec.pitch_cents) v = quantize(v);
        e.wav_path = e.stimulus_id + ".wav";
    }

    if (options.render) {
        const unsigned workers = std::max(1u, std::min<unsigned>(
            options.workers ? options.workers : std::thread::hardware_concurrency(), static_cast<unsigned>(n)));
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto work = [&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    const auto& e = m.stimuli[i];
                    write_wav(out_dir / e.wav_path, apply_transform(base, grid, e.spec));
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
        work();
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    write_manifest(out_dir / "manifest.json", m);
    return m;
}

std::size_t select_ambiguous_candidate(std::span<const std::pair<double, double>> log_prob_pairs) {
    require(!log_prob_pairs.empty(), "no candidates to choose from");
    std::size_t best = 0;
    double best_distance = 0.0;
    for (std::size_t i = 0; i < log_prob_pairs.size(); ++i) {
        const auto [la, lb] = log_prob_pairs[i];
        require(std::isfinite(la) && std::isfinite(lb), "candidate scores must be finite");
        // p_A = e^la / (e^la + e^lb), written to stay finite for large magnitudes.
        const double p_a = 1.0 / (1.0 + std::exp(lb - la));
        const double distance = std::abs(p_a - 0.5);
        // Differences below 1e-12 are rounding noise and count as ties.
        if (i == 0 || distance < best_distance - 1e-12) {
            best = i;
            best_distance = distance;
        }
    }
    return best;
}

}  // namespace ratesculpt

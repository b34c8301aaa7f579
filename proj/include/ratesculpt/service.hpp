#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "ratesculpt/error.hpp"
#include "ratesculpt/json_io.hpp"
#include "ratesculpt/trial_log.hpp"

namespace httplib {
class Server;
}

namespace ratesculpt {

enum class Task { TwoAfc, FourAfcMos };

std::string_view to_string(Task t);
Task parse_task(std::string_view s);

struct TrialSpec {
    std::string stimulus_id;
    std::string wav_path;   // relative to the config's audio_dir
    std::string condition;
    std::vector<std::string> targets;
    std::vector<std::vector<std::string>> option_groups;
    std::string prompt;     // transcription shown to the listener, targets masked
};

struct Block {
    std::string name;
    std::vector<TrialSpec> trials;
};

struct ExperimentConfig {
    std::string experiment_id;
    Task task = Task::TwoAfc;
    std::uint64_t seed = 0;
    std::size_t trials_per_stimulus = 1;
    std::filesystem::path audio_dir;  // absolute after loading
    std::vector<Block> blocks;
    Json ui = Json::object();  // listener-facing strings, passed through untouched

    std::size_t total_trials() const;
    void validate(bool check_audio) const;
};

Json experiment_config_to_json(const ExperimentConfig& config);
// audio_dir in the document is resolved against `base_dir`.
ExperimentConfig experiment_config_from_json(const Json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path, bool check_audio = true);

struct PresentedTrial {
    std::size_t spec_block = 0;
    std::size_t spec_index = 0;
    std::vector<std::vector<std::string>> option_groups;  // in presentation order
};

struct SessionInfo {
    std::string session_id;
    std::string participant_id;
    std::string experiment_id;
    std::size_t cursor = 0;
    std::size_t total = 0;
    bool completed = false;
    std::string created_at;
    bool resumed = false;
};

Json session_info_to_json(const SessionInfo& s);

struct TrialPayload {
    std::string session_id;
    std::size_t trial_index = 0;
    std::size_t total = 0;
    std::string block;
    std::string stimulus_id;
    std::string audio_url;
    std::string prompt;
    std::vector<std::vector<std::string>> option_groups;
    bool require_mos = false;

    bool operator==(const TrialPayload&) const = default;
};

Json trial_payload_to_json(const TrialPayload& p, const Json& ui);

struct ResponseSubmission {
    std::size_t trial_index = 0;
    std::vector<std::size_t> responses;
    std::optional<double> response_time_ms;
    std::optional<MosRecord> mos;
    std::optional<int> replay_count;
};

// Body shape mirrors the log: response_index is an integer for one option
// group and an array otherwise.
ResponseSubmission submission_from_json(const Json& j);
Json submission_to_json(const ResponseSubmission& s);

std::string session_id_for(const std::string& experiment_id, const std::string& participant_id);

// Presentation order for one participant: block order and trial order within
// each block are shuffled, as are the options of every trial.
std::vector<PresentedTrial> presentation_order(const ExperimentConfig& config, const std::string& participant_id);

// Sessions live in memory; the only persistent state is one append-only
// <data_dir>/<experiment_id>.log.jsonl per experiment, replayed on startup.
class ExperimentService {
public:
    explicit ExperimentService(std::filesystem::path data_dir);
    ~ExperimentService();

    // Replays an existing log, truncating a torn final line.
    void add_experiment(ExperimentConfig config);

    SessionInfo create_session(const std::string& experiment_id, const std::string& participant_id);
    SessionInfo session(const std::string& session_id) const;
    TrialPayload next_trial(const std::string& session_id) const;
    SessionInfo submit_response(const std::string& session_id, const ResponseSubmission& submission);

    std::string export_log(const std::string& experiment_id) const;
    std::filesystem::path audio_path(const std::string& stimulus_id) const;
    const ExperimentConfig& experiment(const std::string& experiment_id) const;
    std::filesystem::path log_path(const std::string& experiment_id) const;

private:
    struct Experiment;
    struct Session;

    Session& find_session(const std::string& session_id) const;
    Experiment& find_experiment(const std::string& experiment_id) const;

    std::filesystem::path data_dir_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::unique_ptr<Experiment>> experiments_;
    std::map<std::string, std::unique_ptr<Session>> sessions_;
    std::map<std::string, std::filesystem::path> audio_;
};

// Routes: POST /experiments/{id}/sessions, GET /sessions/{sid}, GET /sessions/{sid}/next,
// POST /sessions/{sid}/responses, GET /experiments/{id}/export, GET /audio/{stimulus_id}.
std::unique_ptr<httplib::Server> make_http_server(ExperimentService& service);

int http_status(ErrorCode code);

}  // namespace ratesculpt

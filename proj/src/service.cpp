#include "ratesculpt/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <set>

#include "ratesculpt/rng.hpp"

namespace ratesculpt {

std::string_view to_string(Task t) { return t == Task::TwoAfc ? "2AFC" : "4AFC+MOS"; }

Task parse_task(std::string_view s) {
    if (s == "2AFC") return Task::TwoAfc;
    if (s == "4AFC+MOS") return Task::FourAfcMos;
    fail(ErrorCode::InvalidInput, "unknown task '" + std::string(s) + "'");
}

std::size_t ExperimentConfig::total_trials() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.trials.size();
    return n * trials_per_stimulus;
}

void ExperimentConfig::validate(bool check_audio) const {
    require(!experiment_id.empty(), "experiment_id is required");
    require(experiment_id.find('/') == std::string::npos, "experiment_id may not contain '/'");
    require(trials_per_stimulus >= 1, "trials_per_stimulus must be at least 1");
    require(total_trials() > 0, "experiment has no trials");
    const std::size_t n_options = task == Task::TwoAfc ? 2 : 4;
    std::set<std::string> ids;
    for (const auto& b : blocks) {
        for (const auto& t : b.trials) {
            require(!t.stimulus_id.empty(), "trial without stimulus_id");
            require(ids.insert(t.stimulus_id).second, "stimulus " + t.stimulus_id + " appears twice");
            require(!t.option_groups.empty(), "stimulus " + t.stimulus_id + " has no options");
            for (const auto& g : t.option_groups) {
                require(g.size() == n_options, "stimulus " + t.stimulus_id + " needs " + std::to_string(n_options) +
                                                   " options per group for " + std::string(to_string(task)));
                require(std::set<std::string>(g.begin(), g.end()).size() == g.size(),
                        "stimulus " + t.stimulus_id + " repeats an option");
            }
            if (check_audio) {
                const auto p = audio_dir / t.wav_path;
                if (!std::filesystem::is_regular_file(p))
                    fail(ErrorCode::IoError, "missing audio for " + t.stimulus_id + ": " + p.string());
            }
        }
    }
}

Json experiment_config_to_json(const ExperimentConfig& c) {
    Json j;
    j["experiment_id"] = c.experiment_id;
    j["task"] = std::string(to_string(c.task));
    j["seed"] = c.seed;
    j["trials_per_stimulus"] = c.trials_per_stimulus;
    j["audio_dir"] = c.audio_dir.string();
    j["ui"] = c.ui;
    Json blocks = Json::array();
    for (const auto& b : c.blocks) {
        Json jb;
        jb["name"] = b.name;
        Json trials = Json::array();
        for (const auto& t : b.trials) {
            Json jt;
            jt["stimulus_id"] = t.stimulus_id;
            jt["wav_path"] = t.wav_path;
            jt["condition"] = t.condition;
            jt["targets"] = t.targets;
            jt["option_groups"] = t.option_groups;
            jt["prompt"] = t.prompt;
            trials.push_back(std::move(jt));
        }
        jb["trials"] = std::move(trials);
        blocks.push_back(std::move(jb));
    }
    j["blocks"] = std::move(blocks);
    return j;
}

ExperimentConfig experiment_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
    try {
        ExperimentConfig c;
        c.experiment_id = j.at("experiment_id").get<std::string>();
        c.task = parse_task(j.at("task").get<std::string>());
        c.seed = j.at("seed").get<std::uint64_t>();
        c.trials_per_stimulus = j.value("trials_per_stimulus", std::size_t{1});
        const std::filesystem::path audio = j.value("audio_dir", std::string("."));
        c.audio_dir = audio.is_absolute() ? audio : base_dir / audio;
        if (j.contains("ui")) c.ui = j.at("ui");
        for (const auto& jb : j.at("blocks")) {
            Block b;
            b.name = jb.at("name").get<std::string>();
            for (const auto& jt : jb.at("trials")) {
                TrialSpec t;
                t.stimulus_id = jt.at("stimulus_id").get<std::string>();
                t.wav_path = jt.value("wav_path", t.stimulus_id + ".wav");
                t.condition = jt.value("condition", std::string());
                t.targets = jt.value("targets", std::vector<std::string>{});
                t.option_groups = jt.at("option_groups").get<std::vector<std::vector<std::string>>>();
                t.prompt = jt.value("prompt", std::string());
                b.trials.push_back(std::move(t));
            }
            c.blocks.push_back(std::move(b));
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed experiment config: ") + e.what());
    }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path, bool check_audio) {
    auto c = experiment_config_from_json(read_json_file(path), path.parent_path());
    c.validate(check_audio);
    return c;
}

Json session_info_to_json(const SessionInfo& s) {
    Json j;
    j["session_id"] = s.session_id;
    j["participant_id"] = s.participant_id;
    j["experiment_id"] = s.experiment_id;
    j["cursor"] = s.cursor;
    j["total"] = s.total;
    j["remaining"] = s.total - s.cursor;
    j["completed"] = s.completed;
    j["created_at"] = s.created_at;
    j["resumed"] = s.resumed;
    return j;
}

Json trial_payload_to_json(const TrialPayload& p, const Json& ui) {
    Json j;
    j["session_id"] = p.session_id;
    j["trial_index"] = p.trial_index;
    j["total"] = p.total;
    j["remaining"] = p.total - p.trial_index;
    j["block"] = p.block;
    j["stimulus_id"] = p.stimulus_id;
    j["audio_url"] = p.audio_url;
    j["prompt"] = p.prompt;
    if (p.option_groups.size() == 1)
        j["options"] = p.option_groups.front();
    else
        j["options"] = p.option_groups;
    j["require_mos"] = p.require_mos;
    j["ui"] = ui;
    return j;
}

ResponseSubmission submission_from_json(const Json& j) {
    try {
        ResponseSubmission s;
        s.trial_index = j.at("trial_index").get<std::size_t>();
        const auto& r = j.at("response_index");
        if (r.is_array())
            s.responses = r.get<std::vector<std::size_t>>();
        else
            s.responses = {r.get<std::size_t>()};
        if (j.contains("response_time_ms") && !j.at("response_time_ms").is_null())
            s.response_time_ms = j.at("response_time_ms").get<double>();
        if (j.contains("mos") && !j.at("mos").is_null()) s.mos = MosRecord::from_json(j.at("mos"));
        if (j.contains("replay_count") && !j.at("replay_count").is_null())
            s.replay_count = j.at("replay_count").get<int>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidInput, std::string("malformed response: ") + e.what());
    }
}

Json submission_to_json(const ResponseSubmission& s) {
    Json j;
    j["trial_index"] = s.trial_index;
    if (s.responses.size() == 1)
        j["response_index"] = s.responses.front();
    else
        j["response_index"] = s.responses;
    if (s.response_time_ms) j["response_time_ms"] = *s.response_time_ms;
    if (s.mos) j["mos"] = s.mos->to_json();
    if (s.replay_count) j["replay_count"] = *s.replay_count;
    return j;
}

std::string session_id_for(const std::string& experiment_id, const std::string& participant_id) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(experiment_id + "\n" + participant_id)));
    return buf;
}

std::vector<PresentedTrial> presentation_order(const ExperimentConfig& config, const std::string& participant_id) {
    Rng rng(derive_seed(config.seed, fnv1a(participant_id)));
    std::vector<std::size_t> blocks(config.blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) blocks[b] = b;
    rng.shuffle(blocks);

    std::vector<PresentedTrial> order;
    for (auto b : blocks) {
        std::vector<std::size_t> trials;
        for (std::size_t r = 0; r < config.trials_per_stimulus; ++r)
            for (std::size_t t = 0; t < config.blocks[b].trials.size(); ++t) trials.push_back(t);
        rng.shuffle(trials);
        for (auto t : trials) {
            PresentedTrial p{b, t, config.blocks[b].trials[t].option_groups};
            for (auto& g : p.option_groups) rng.shuffle(g);
            order.push_back(std::move(p));
        }
    }
    return order;
}

namespace {

std::string utc_now(bool millis = false) {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    std::string out = buf;
    if (millis) {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
        std::snprintf(buf, sizeof buf, ".%03lld", static_cast<long long>(ms));
        out += buf;
    }
    return out + "Z";
}

}  // namespace

struct ExperimentService::Experiment {
    ExperimentConfig config;
    std::filesystem::path log;
    int fd = -1;
    std::mutex log_mutex;

    ~Experiment() {
        if (fd >= 0) ::close(fd);
    }

    void append(const std::string& line) {
        std::lock_guard lock(log_mutex);
        const std::string data = line + "\n";
        std::size_t done = 0;
        while (done < data.size()) {
            const auto n = ::write(fd, data.data() + done, data.size() - done);
            if (n < 0) {
                if (errno == EINTR) continue;
                fail(ErrorCode::IoError, "cannot append to " + log.string() + ": " + std::strerror(errno));
            }
            done += static_cast<std::size_t>(n);
        }
        ::fdatasync(fd);
    }
};

struct ExperimentService::Session {
    SessionInfo info;
    std::vector<PresentedTrial> order;
    Experiment* experiment = nullptr;
    mutable std::mutex mutex;
    // First time the trial at `cursor` was served; repeated GETs keep the first stamp.
    mutable std::optional<std::pair<std::size_t, std::string>> served;
};

ExperimentService::ExperimentService(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {
    std::error_code ec;
    std::filesystem::create_directories(data_dir_, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create data directory " + data_dir_.string() + ": " + ec.message());
}

ExperimentService::~ExperimentService() = default;

std::filesystem::path ExperimentService::log_path(const std::string& experiment_id) const {
    return data_dir_ / (experiment_id + ".log.jsonl");
}

void ExperimentService::add_experiment(ExperimentConfig config) {
    config.validate(false);
    std::unique_lock lock(mutex_);
    if (experiments_.count(config.experiment_id))
        fail(ErrorCode::Conflict, "experiment " + config.experiment_id + " already loaded");

    auto exp = std::make_unique<Experiment>();
    exp->log = log_path(config.experiment_id);

    // Drop a torn trailing line left by a crash mid-append.
    std::string text;
    if (std::filesystem::exists(exp->log)) {
        text = read_text_file(exp->log);
        if (!text.empty() && text.back() != '\n') {
            const auto keep = text.rfind('\n');
            text.resize(keep == std::string::npos ? 0 : keep + 1);
            std::filesystem::resize_file(exp->log, text.size());
        }
    }
    const auto records = parse_trial_log(text);

    exp->fd = ::open(exp->log.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (exp->fd < 0) fail(ErrorCode::IoError, "cannot open " + exp->log.string() + ": " + std::strerror(errno));
    exp->config = std::move(config);
    const auto& cfg = exp->config;

    std::map<std::string, std::unique_ptr<Session>> recovered;
    for (const auto& r : records) {
        const auto sid = session_id_for(cfg.experiment_id, r.participant_id);
        if (r.session_id != sid)
            fail(ErrorCode::Conflict, "log record for " + r.participant_id + " has an unexpected session id");
        auto& s = recovered[sid];
        if (!s) {
            s = std::make_unique<Session>();
            s->info = {sid, r.participant_id, cfg.experiment_id, 0, cfg.total_trials(), false, utc_now(), true};
            s->order = presentation_order(cfg, r.participant_id);
            s->experiment = exp.get();
        }
        if (s->info.cursor >= s->order.size())
            fail(ErrorCode::Conflict, "log has more records than trials for " + r.participant_id);
        const auto& p = s->order[s->info.cursor];
        if (cfg.blocks[p.spec_block].trials[p.spec_index].stimulus_id != r.stimulus_id)
            fail(ErrorCode::Conflict, "log does not match the presentation order for " + r.participant_id);
        ++s->info.cursor;
        s->info.completed = s->info.cursor == s->info.total;
    }

    for (const auto& b : cfg.blocks)
        for (const auto& t : b.trials) audio_[t.stimulus_id] = cfg.audio_dir / t.wav_path;
    for (auto& [sid, s] : recovered) sessions_[sid] = std::move(s);
    experiments_[cfg.experiment_id] = std::move(exp);
}

ExperimentService::Experiment& ExperimentService::find_experiment(const std::string& experiment_id) const {
    const auto it = experiments_.find(experiment_id);
    if (it == experiments_.end()) fail(ErrorCode::NotFound, "unknown experiment '" + experiment_id + "'");
    return *it->second;
}

ExperimentService::Session& ExperimentService::find_session(const std::string& session_id) const {
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) fail(ErrorCode::NotFound, "unknown session '" + session_id + "'");
    return *it->second;
}

const ExperimentConfig& ExperimentService::experiment(const std::string& experiment_id) const {
    std::shared_lock lock(mutex_);
    return find_experiment(experiment_id).config;
}

SessionInfo ExperimentService::create_session(const std::string& experiment_id, const std::string& participant_id) {
    require(!participant_id.empty(), "participant_id is required");
    std::unique_lock lock(mutex_);
    auto& exp = find_experiment(experiment_id);
    const auto sid = session_id_for(experiment_id, participant_id);
    auto& slot = sessions_[sid];
    if (slot) {
        std::lock_guard sl(slot->mutex);
        auto info = slot->info;
        info.resumed = true;
        return info;
    }
    slot = std::make_unique<Session>();
    slot->info = {sid, participant_id, experiment_id, 0, exp.config.total_trials(), false, utc_now(), false};
    slot->order = presentation_order(exp.config, participant_id);
    slot->experiment = &exp;
    return slot->info;
}

SessionInfo ExperimentService::session(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    const auto& s = find_session(session_id);
    std::lock_guard sl(s.mutex);
    return s.info;
}

TrialPayload ExperimentService::next_trial(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    const auto& s = find_session(session_id);
    std::lock_guard sl(s.mutex);
    if (s.info.completed) fail(ErrorCode::Completed, "session " + session_id + " is complete");
    const auto& cfg = s.experiment->config;
    const auto& p = s.order[s.info.cursor];
    const auto& spec = cfg.blocks[p.spec_block].trials[p.spec_index];
    if (!s.served || s.served->first != s.info.cursor) s.served.emplace(s.info.cursor, utc_now(true));
    return {s.info.session_id,
            s.info.cursor,
            s.info.total,
            cfg.blocks[p.spec_block].name,
            spec.stimulus_id,
            "/audio/" + spec.stimulus_id,
            spec.prompt,
            p.option_groups,
            cfg.task == Task::FourAfcMos};
}

SessionInfo ExperimentService::submit_response(const std::string& session_id, const ResponseSubmission& sub) {
    std::shared_lock lock(mutex_);
    auto& s = find_session(session_id);
    std::lock_guard sl(s.mutex);
    if (sub.trial_index < s.info.cursor)
        fail(ErrorCode::Conflict, "trial " + std::to_string(sub.trial_index) + " was already answered");
    if (s.info.completed) fail(ErrorCode::Completed, "session " + session_id + " is complete");
    if (sub.trial_index != s.info.cursor)
        fail(ErrorCode::Conflict, "expected a response for trial " + std::to_string(s.info.cursor));

    const auto& cfg = s.experiment->config;
    const auto& p = s.order[s.info.cursor];
    const auto& spec = cfg.blocks[p.spec_block].trials[p.spec_index];
    require(sub.responses.size() == p.option_groups.size(),
            "expected " + std::to_string(p.option_groups.size()) + " response(s)");
    for (std::size_t g = 0; g < sub.responses.size(); ++g)
        require(sub.responses[g] < p.option_groups[g].size(), "response index out of range");
    if (cfg.task == Task::FourAfcMos)
        require(sub.mos.has_value(), "this task requires MOS ratings");
    else
        require(!sub.mos.has_value(), "this task takes no MOS ratings");
    require(!sub.response_time_ms || *sub.response_time_ms >= 0.0, "response_time_ms must be non-negative");

    TrialRecord rec;
    rec.participant_id = s.info.participant_id;
    rec.session_id = s.info.session_id;
    rec.stimulus_id = spec.stimulus_id;
    rec.condition = spec.condition;
    rec.option_groups = p.option_groups;
    rec.responses = sub.responses;
    rec.response_time_ms = sub.response_time_ms;
    rec.mos = sub.mos;
    rec.replay_count = sub.replay_count;
    if (s.served && s.served->first == s.info.cursor) rec.presented_at = s.served->second;
    rec.validate();

    s.experiment->append(to_log_line(rec));
    ++s.info.cursor;
    s.info.completed = s.info.cursor == s.info.total;
    return s.info;
}

std::string ExperimentService::export_log(const std::string& experiment_id) const {
    std::shared_lock lock(mutex_);
    auto& exp = find_experiment(experiment_id);
    std::lock_guard ll(exp.log_mutex);
    return read_text_file(exp.log);
}

std::filesystem::path ExperimentService::audio_path(const std::string& stimulus_id) const {
    std::shared_lock lock(mutex_);
    const auto it = audio_.find(stimulus_id);
    if (it == audio_.end()) fail(ErrorCode::NotFound, "unknown stimulus '" + stimulus_id + "'");
    if (!std::filesystem::is_regular_file(it->second))
        fail(ErrorCode::NotFound, "no audio file for '" + stimulus_id + "'");
    return it->second;
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return 404;
        case ErrorCode::Conflict: return 409;
        case ErrorCode::Completed: return 410;
        case ErrorCode::InvalidInput:
        case ErrorCode::ParseError: return 400;
        default: return 500;
    }
}

}  // namespace ratesculpt

#include "ratesculpt/trial_log.hpp"

#include <algorithm>

#include "ratesculpt/error.hpp"

namespace ratesculpt {

int MosRecord::get(std::string_view scale) const {
    for (std::size_t i = 0; i < kScales.size(); ++i)
        if (kScales[i] == scale) return values[i];
    fail(ErrorCode::InvalidInput, "unknown MOS scale '" + std::string(scale) + "'");
}

void MosRecord::validate() const {
    for (std::size_t i = 0; i < values.size(); ++i)
        require(values[i] >= 0 && values[i] <= 10,
                "MOS " + std::string(kScales[i]) + " must be an integer in [0,10]");
}

Json MosRecord::to_json() const {
    Json j;
    for (std::size_t i = 0; i < kScales.size(); ++i) j[std::string(kScales[i])] = values[i];
    return j;
}

MosRecord MosRecord::from_json(const Json& j) {
    require(j.is_object(), "MOS must be an object");
    MosRecord m;
    for (std::size_t i = 0; i < kScales.size(); ++i) {
        const auto key = std::string(kScales[i]);
        require(j.contains(key), "MOS is missing '" + key + "'");
        const auto& v = j.at(key);
        require(v.is_number_integer(), "MOS " + key + " must be an integer");
        m.values[i] = v.get<int>();
    }
    m.validate();
    return m;
}

void TrialRecord::validate() const {
    require(!participant_id.empty() && !stimulus_id.empty(), "trial record needs participant and stimulus ids");
    require(!responses.empty() && responses.size() == option_groups.size(),
            "one response per option group is required");
    for (std::size_t g = 0; g < option_groups.size(); ++g) {
        require(option_groups[g].size() >= 2, "a trial needs at least two options");
        require(responses[g] < option_groups[g].size(), "response index out of range");
    }
    if (mos) mos->validate();
    require(!replay_count || *replay_count >= 0, "replay_count must be non-negative");
}

Json trial_to_json(const TrialRecord& r) {
    Json j;
    j["participant_id"] = r.participant_id;
    j["session_id"] = r.session_id;
    j["stimulus_id"] = r.stimulus_id;
    j["condition"] = r.condition;
    if (r.option_groups.size() == 1) {
        j["options"] = r.option_groups[0];
        j["response_index"] = r.responses[0];
    } else {
        j["options"] = r.option_groups;
        j["response_index"] = r.responses;
    }
    if (r.response_time_ms) j["response_time_ms"] = *r.response_time_ms;
    if (r.mos) j["mos"] = r.mos->to_json();
    if (r.replay_count) j["replay_count"] = *r.replay_count;
    if (r.presented_at) j["presented_at"] = *r.presented_at;
    return j;
}

TrialRecord trial_from_json(const Json& j) {
    try {
        TrialRecord r;
        r.participant_id = j.at("participant_id").get<std::string>();
        r.session_id = j.at("session_id").get<std::string>();
        r.stimulus_id = j.at("stimulus_id").get<std::string>();
        r.condition = j.value("condition", std::string{});
        const auto& options = j.at("options");
        const auto& response = j.at("response_index");
        require(options.is_array() && !options.empty(), "options must be a non-empty list");
        if (options.front().is_array()) {
            r.option_groups = options.get<std::vector<std::vector<std::string>>>();
            r.responses = response.get<std::vector<std::size_t>>();
        } else {
            r.option_groups.push_back(options.get<std::vector<std::string>>());
            require(response.is_number_integer() && response.get<long long>() >= 0,
                    "response_index must be a non-negative integer");
            r.responses.push_back(response.get<std::size_t>());
        }
        if (j.contains("response_time_ms") && !j.at("response_time_ms").is_null())
            r.response_time_ms = j.at("response_time_ms").get<double>();
        if (j.contains("mos") && !j.at("mos").is_null()) r.mos = MosRecord::from_json(j.at("mos"));
        if (j.contains("replay_count") && !j.at("replay_count").is_null())
            r.replay_count = j.at("replay_count").get<int>();
        if (j.contains("presented_at") && !j.at("presented_at").is_null())
            r.presented_at = j.at("presented_at").get<std::string>();
        r.validate();
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidInput, std::string("malformed trial record: ") + e.what());
    }
}

std::string to_log_line(const TrialRecord& record) { return dump_canonical(trial_to_json(record), -1, 3); }

TrialRecord parse_log_line(std::string_view line) {
    try {
        return trial_from_json(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidInput, std::string("malformed trial log line: ") + e.what());
    }
}

std::vector<TrialRecord> parse_trial_log(std::string_view text) {
    std::vector<TrialRecord> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) break;  // torn final line
        ++line_no;
        const auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            out.push_back(parse_log_line(line));
        } catch (const Error& e) {
            fail(ErrorCode::InvalidInput, "trial log line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<TrialRecord> read_trial_log(const std::filesystem::path& path) {
    return parse_trial_log(read_text_file(path));
}

}  // namespace ratesculpt

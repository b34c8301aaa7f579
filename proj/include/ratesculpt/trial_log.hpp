#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratesculpt/json_io.hpp"

namespace ratesculpt {

// Six 0-10 opinion scales collected after each 4AFC trial.
struct MosRecord {
    static constexpr std::array<std::string_view, 6> kScales{
        "naturalness", "intelligibility", "prosody", "effort", "respectfulness", "encouragement"};

    std::array<int, 6> values{};

    int get(std::string_view scale) const;
    void validate() const;

    Json to_json() const;
    static MosRecord from_json(const Json& j);

    bool operator==(const MosRecord&) const = default;
};

// One listener decision. Single-target trials have one option group and one
// response; multi-target trials carry one group and one response per target.
struct TrialRecord {
    std::string participant_id;
    std::string session_id;
    std::string stimulus_id;
    std::string condition;
    std::vector<std::vector<std::string>> option_groups;
    std::vector<std::size_t> responses;
    std::optional<double> response_time_ms;
    std::optional<MosRecord> mos;
    std::optional<int> replay_count;
    std::optional<std::string> presented_at;  // UTC, when the trial was first served

    std::size_t targets() const noexcept { return responses.size(); }
    const std::string& chosen(std::size_t slot = 0) const { return option_groups.at(slot).at(responses.at(slot)); }

    void validate() const;
    bool operator==(const TrialRecord&) const = default;
};

// Log line: {participant_id, session_id, stimulus_id, condition, options,
// response_index, response_time_ms?, mos?, replay_count?, presented_at?}. `options` is a flat list and
// `response_index` an integer for single-target trials, nested lists and an
// index array otherwise.
Json trial_to_json(const TrialRecord& record);
TrialRecord trial_from_json(const Json& j);
std::string to_log_line(const TrialRecord& record);
TrialRecord parse_log_line(std::string_view line);

// Reads a line-delimited log. A final line without a newline (a torn write)
// is ignored; any other malformed line is an error.
std::vector<TrialRecord> read_trial_log(const std::filesystem::path& path);
std::vector<TrialRecord> parse_trial_log(std::string_view text);

}  // namespace ratesculpt

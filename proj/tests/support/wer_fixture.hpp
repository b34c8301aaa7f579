#pragma once

#include <string>
#include <vector>

#include "ratesculpt/eval.hpp"

// Hand-tallied WER fixture: two strategies, single and double targets, one distractor.
namespace ratesculpt::testing {

inline TrialRecord trial(const std::string& pid, const std::string& stim, std::vector<std::string> chosen) {
    TrialRecord t;
    t.participant_id = pid;
    t.session_id = "s-" + pid;
    t.stimulus_id = stim;
    t.condition = "x";
    for (auto& c : chosen) {
        t.option_groups.push_back({c, "filler1", "filler2", "filler3"});
        t.responses.push_back(0);
    }
    return t;
}

inline StimulusInfo info(const std::string& id, std::vector<std::string> targets, const std::string& condition,
                         bool distractor = false) {
    StimulusInfo s;
    s.stimulus_id = id;
    s.targets = std::move(targets);
    s.condition = condition;
    s.distractor = distractor;
    s.sentence_type = s.targets.size() > 1 ? "double" : "single";
    return s;
}

// proposed targets: 6 total, 4 correct, 1 in-pair, 1 out-of-pair
// baseline targets: 6 total, 3 correct, 2 in-pair, 1 out-of-pair
inline StimulusTable fixture_table() {
    StimulusTable t;
    t.stimuli = {info("A", {"cot"}, "proposed"), info("B", {"could", "cooed"}, "proposed"),
                 info("C", {"peel"}, "baseline"), info("D", {"kid", "dull"}, "baseline"),
                 info("X", {"cut"}, "distractor", true)};
    return t;
}

inline std::vector<TrialRecord> fixture_trials() {
    return {trial("p1", "A", {"cot"}),          trial("p2", "A", {"cut"}),
            trial("p1", "B", {"could", "cod"}), trial("p2", "B", {"could", "cooed"}),
            trial("p1", "C", {"pill"}),         trial("p2", "C", {"peel"}),
            trial("p1", "D", {"kid", "dull"}),  trial("p2", "D", {"keyed", "dell"}),
            trial("p1", "X", {"cut"}),          trial("p2", "X", {"kit"})};
}

}  // namespace ratesculpt::testing

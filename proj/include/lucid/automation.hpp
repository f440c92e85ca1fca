#pragma once

// Edge-triggered rule execution used by the scenario simulator and, when
// enabled, by the service for live event streams.

#include "lucid/domain.hpp"
#include "lucid/event_log.hpp"

#include <map>
#include <span>
#include <vector>

namespace lucid {

struct AutomationOptions {
    // Offset of emitted actions from the triggering instant; must stay below
    // the causal engine's simultaneity tolerance.
    Millis action_delay = Millis{100};
};

struct Firing {
    RuleId rule;
    Timestamp at;
    // RULE_FIRED record at `at`, then one ACTION_EXECUTED per rule action at `at + delay`.
    std::vector<EventRecord> emitted;
};

// Reads property values at or before an instant.
using StateReader = std::function<std::optional<Scalar>(const EntityId&, const std::string&, Timestamp)>;

StateReader reader_for(const EventLog& log);

class RuleRunner {
public:
    explicit RuleRunner(AutomationOptions options = {}) : options_(options) {}

    // Evaluates every rule on the state at t and fires those whose trees went
    // false -> true since the previous step (or are true, for level-triggered
    // rules). A rule never seen before counts as previously false.
    std::vector<Firing> step(const StateReader& state, std::span<const Rule> rules, Timestamp t);

    void forget(const RuleId& id) { last_truth_.erase(id); }
    const AutomationOptions& options() const { return options_; }

private:
    AutomationOptions options_;
    std::map<RuleId, bool> last_truth_;
};

} // namespace lucid

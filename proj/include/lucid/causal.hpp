#pragma once

// Cause-path search over the event log: which rule, if any, made an
// observed action happen, and which facts satisfied that rule.

#include "lucid/domain.hpp"
#include "lucid/event_log.hpp"

#include <span>

namespace lucid {

struct CausalOptions {
    // How far back from the request the search looks.
    Millis lookback = std::chrono::minutes{30};
    // Max gap between the explanandum and a co-executed action of the same rule.
    Millis simultaneity = Millis{2000};
    // When set, facts must be established inside [requested_at - lookback, t)
    // rather than by reconstructed state.
    bool strict_window = false;
};

// Truth of the tree with every leaf read from the state strictly before t.
// ABSENT values make a leaf false.
bool eval(const PreconditionGroup& group, const LogWindow& log, Timestamp t,
          bool strict_window = false);

// Same evaluation; on success returns the leaves that made it true, each
// paired with the record that established its value, in declaration order.
// True leaves under false subgroups are not part of the witness.
std::optional<std::vector<SatisfyingEvent>> satisfying_leaves(const PreconditionGroup& group,
                                                              const LogWindow& log, Timestamp t,
                                                              bool strict_window = false);

// Latest ACTION_EXECUTED record for (entity, action) in [at - lookback, at].
std::optional<EventRecord> locate_execution(const LogWindow& log, const EntityId& entity,
                                            const std::string& action, Timestamp at,
                                            Millis lookback);

// nullopt means no rule explains the action (manual, API or remote).
// Throws Error(ActionNotFound) when the action was not executed in the
// lookback window, and AmbiguousCauseError when several rules qualify.
std::optional<CausePath> find_cause_path(const Explanandum& explanandum,
                                         std::span<const Rule> rules, const LogWindow& log,
                                         const CausalOptions& options = {});

} // namespace lucid

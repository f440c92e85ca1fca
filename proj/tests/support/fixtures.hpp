#pragma once

#include "lucid/codec.hpp"
#include "lucid/domain.hpp"
#include "lucid/time.hpp"

#include <string>

namespace fx {

using namespace lucid;

// "HH:MM[:SS[.mmm]]" on the fixture day.
inline Timestamp at(const std::string& clock) {
    std::string full = clock.size() == 5 ? clock + ":00" : clock;
    return parse_iso8601("2024-03-12T" + full + "Z");
}

inline EventRecord change(const std::string& clock, EntityId e, std::string prop, Scalar v,
                          Cause cause = Cause::none()) {
    return {at(clock), std::move(e), EventKind::PropertyChange, std::move(prop), std::move(v), std::move(cause), 0};
}

inline EventRecord action(const std::string& clock, EntityId e, std::string name,
                          Cause cause = Cause::none()) {
    return {at(clock), std::move(e), EventKind::ActionExecuted, std::move(name), std::nullopt, std::move(cause), 0};
}

inline Precondition leaf(EntityId e, std::string prop, Comparator c, Scalar v, std::string phrase = {}) {
    return {std::move(e), std::move(prop), c, std::move(v), std::move(phrase)};
}

inline PreconditionGroup all_of(std::vector<PreconditionNode> children) { return {GroupOp::And, std::move(children)}; }
inline PreconditionGroup any_of(std::vector<PreconditionNode> children) { return {GroupOp::Or, std::move(children)}; }

// The mute rule as written in the shipped scenario.
inline Rule tv_rule() {
    Rule r;
    r.id = "rule_2";
    r.name = "Rule_2";
    r.description = "mutes the TV if the TV is playing while a meeting is going on";
    r.owner = "bob";
    r.preconditions = all_of({{leaf("room1", "meeting", Comparator::Eq, true, "a meeting in room 1 is going on")},
                              {leaf("tv", "power", Comparator::Eq, std::string("on"), "the TV is playing")}});
    r.actions = {{"tv", "mute", std::nullopt}};
    return r;
}

inline const std::string kBobText =
    "Hi Bob, tv_mute is active because currently a meeting in room 1 is going on and the TV is playing.";
inline const std::string kAliceText =
    "Hi Alice, tv_mute is active because Bob has set up a rule: \"Rule_2: mutes the TV if the TV is "
    "playing while a meeting is going on\" and currently a meeting in room 1 is going on and the TV is "
    "playing, so the rule has been fired.";
inline const std::string kDanaText = "Hi Dana, Bob has set up a rule and at this moment, the rule has been fired.";

} // namespace fx

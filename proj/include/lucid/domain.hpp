#pragma once

#include "lucid/time.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lucid {

using EntityId = std::string;
using UserId = std::string;
using RuleId = std::string;

// Closed scalar union carried by properties, preconditions and action arguments.
using Scalar = std::variant<bool, double, std::string>;

std::string scalar_to_string(const Scalar& value);

enum class Comparator { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view comparator_symbol(Comparator c) noexcept;
Comparator parse_comparator(std::string_view symbol);
bool is_ordering(Comparator c) noexcept;

// Leaf truth: same-type equality for Eq/Ne, numeric ordering for the rest.
// A type mismatch under an ordering comparator is false.
bool compare(const Scalar& observed, Comparator c, const Scalar& expected);

struct SmartObject {
    EntityId id;
    std::string name;
    std::set<std::string> properties;
    std::set<std::string> actions;
};

struct Precondition {
    EntityId entity;
    std::string property;
    Comparator comparator = Comparator::Eq;
    Scalar value;
    // Human phrasing used by the fact renderer; empty selects the mechanical fallback.
    std::string phrase;

    // Logical identity only; the phrase does not take part.
    bool same_logic(const Precondition& other) const;
};

enum class GroupOp { And, Or };

struct PreconditionNode;

struct PreconditionGroup {
    GroupOp op = GroupOp::And;
    std::vector<PreconditionNode> children;
};

struct PreconditionNode {
    std::variant<Precondition, PreconditionGroup> value;

    bool is_leaf() const { return std::holds_alternative<Precondition>(value); }
    const Precondition& leaf() const { return std::get<Precondition>(value); }
    const PreconditionGroup& group() const { return std::get<PreconditionGroup>(value); }
};

bool same_logic(const PreconditionGroup& a, const PreconditionGroup& b);

// Leaves in declaration (depth-first, left-to-right) order.
std::vector<Precondition> collect_leaves(const PreconditionGroup& group);
std::size_t tree_depth(const PreconditionGroup& group);

// Bottom-up AND/OR evaluation with a caller-supplied leaf oracle.
bool evaluate_tree(const PreconditionGroup& group,
                   const std::function<bool(const Precondition&)>& leaf_truth);

// Throws Error(Validation) on empty groups or ordering comparators over non-numbers.
void validate_tree(const PreconditionGroup& group);

struct RuleAction {
    EntityId entity;
    std::string action;
    std::optional<Scalar> value;

    bool operator==(const RuleAction&) const = default;
};

struct Rule {
    RuleId id;
    std::string name;
    std::string description;
    UserId owner;
    PreconditionGroup preconditions;
    std::vector<RuleAction> actions;
    // Simulator-only: fire on every evaluation while true instead of on false->true edges.
    bool level_triggered = false;
};

void validate_rule(const Rule& rule);

// Identical precondition tree and identical action set.
bool is_duplicate(const Rule& a, const Rule& b);

enum class EventKind { PropertyChange, ActionExecuted, RuleFired };

std::string_view event_kind_name(EventKind k) noexcept;
EventKind parse_event_kind(std::string_view name);

enum class CauseKind { None, Rule, Api, Remote, User };

struct Cause {
    CauseKind kind = CauseKind::None;
    std::string id; // rule id or user id for Rule/User

    static Cause none() { return {}; }
    static Cause api() { return {CauseKind::Api, {}}; }
    static Cause remote() { return {CauseKind::Remote, {}}; }
    static Cause rule(RuleId id) { return {CauseKind::Rule, std::move(id)}; }
    static Cause user(UserId id) { return {CauseKind::User, std::move(id)}; }

    bool operator==(const Cause&) const = default;
};

// "none", "api", "remote", "rule:<id>", "user:<id>"
std::string cause_to_string(const Cause& cause);
Cause parse_cause(std::string_view text);

struct EventRecord {
    Timestamp ts;
    EntityId entity;
    EventKind kind = EventKind::PropertyChange;
    std::string name;
    std::optional<Scalar> value;
    Cause caused_by;
    // Ingestion sequence number, assigned by the event log. Zero before ingest.
    std::uint64_t seq = 0;

    bool operator==(const EventRecord&) const = default;
};

void validate_event(const EventRecord& record);

// Total order used everywhere records are sorted.
inline bool log_order(const EventRecord& a, const EventRecord& b) {
    return a.ts != b.ts ? a.ts < b.ts : a.seq < b.seq;
}

struct Explanandum {
    EntityId entity;
    std::string action;
    Timestamp requested_at;
    UserId explainee;
};

// Identifier-style action label, e.g. "tv_mute".
std::string action_label(const EntityId& entity, const std::string& action);

struct SatisfyingEvent {
    Precondition precondition;
    EventRecord record;
};

struct SiblingAction {
    RuleAction action;
    EventRecord record;
};

struct CausePath {
    RuleId fired_rule;
    std::vector<SatisfyingEvent> satisfying_events;
    // Includes the explanandum's own execution record.
    std::vector<SiblingAction> sibling_actions;
    // Execution time of the explanandum.
    Timestamp fired_at;
    EventRecord execution;
    // Cross-check against logged attribution (RULE_FIRED records, caused_by tags).
    // Empty when the log carries no attribution for this execution.
    std::optional<bool> log_agrees;
};

enum class ViewKind { Simplified = 1, Rule = 2, Fact = 3, Full = 4 };

constexpr int expressiveness(ViewKind v) noexcept { return static_cast<int>(v); }

enum class UserState { Meeting, Break, Working };
enum class Occurrence { FirstTime, SecondTime, More };
enum class Technicality { Technical, Medium, NonTechnical };
enum class Role { Owner, Coworker, Guest };

std::string_view to_string(ViewKind v) noexcept;
std::string_view to_string(UserState v) noexcept;
std::string_view to_string(Occurrence v) noexcept;
std::string_view to_string(Technicality v) noexcept;
std::string_view to_string(Role v) noexcept;

// Human label used by the report and dashboard badge: "Full", "Fact", "Rule", "Simplified".
std::string_view view_label(ViewKind v) noexcept;

ViewKind parse_view(std::string_view s);
UserState parse_user_state(std::string_view s);
Occurrence parse_occurrence(std::string_view s);
Technicality parse_technicality(std::string_view s);
Role parse_role(std::string_view s);

inline constexpr ViewKind kAllViews[] = {ViewKind::Full, ViewKind::Fact, ViewKind::Rule,
                                         ViewKind::Simplified};
inline constexpr UserState kAllUserStates[] = {UserState::Meeting, UserState::Break,
                                               UserState::Working};
inline constexpr Occurrence kAllOccurrences[] = {Occurrence::FirstTime, Occurrence::SecondTime,
                                                 Occurrence::More};
inline constexpr Technicality kAllTechnicalities[] = {
    Technicality::Technical, Technicality::Medium, Technicality::NonTechnical};
inline constexpr Role kAllRoles[] = {Role::Owner, Role::Coworker, Role::Guest};

struct ContextSnapshot {
    std::string user_name;
    UserState user_state = UserState::Working;
    Occurrence occurrence = Occurrence::FirstTime;
    Technicality technicality = Technicality::Technical;
    Role role = Role::Guest;

    bool operator==(const ContextSnapshot&) const = default;
};

} // namespace lucid

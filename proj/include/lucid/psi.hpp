#pragma once

#include "lucid/domain.hpp"

#include <span>
#include <variant>
#include <vector>

namespace lucid {

enum class ConstructCategory { Aec, Cec };

enum class ConstructKind { RuleFired, PreconditionFact, ActionFact, RuleDescription, RuleOwner };

std::string_view to_string(ConstructCategory c) noexcept;
std::string_view to_string(ConstructKind k) noexcept;

// The firing itself, anchored to the explanandum's execution record.
struct RuleFiredPayload {
    Rule rule;
    EventRecord trigger;
};

struct PreconditionFactPayload {
    Precondition precondition;
    EventRecord record;
};

struct ActionFactPayload {
    RuleAction action;
    EventRecord record;
};

struct RuleDescriptionPayload {
    RuleId rule;
    std::string name;
    std::string description;
};

struct RuleOwnerPayload {
    RuleId rule;
    UserId owner;
};

using ConstructPayload = std::variant<RuleFiredPayload, PreconditionFactPayload, ActionFactPayload,
                                      RuleDescriptionPayload, RuleOwnerPayload>;

class ExplanationConstruct {
public:
    explicit ExplanationConstruct(ConstructPayload payload) : payload_(std::move(payload)) {}

    // Kind and category follow from the payload, so AEC/CEC membership cannot drift.
    ConstructKind kind() const noexcept { return static_cast<ConstructKind>(payload_.index()); }
    ConstructCategory category() const noexcept;

    const ConstructPayload& payload() const noexcept { return payload_; }

    template <class T>
    const T& as() const { return std::get<T>(payload_); }

private:
    ConstructPayload payload_;
};

using Psi = std::vector<ExplanationConstruct>;

struct Explanation {
    Explanandum explanandum;
    Psi constructs;
    ViewKind view = ViewKind::Full;
    std::string text;
};

// Order: RULE_FIRED, one PRECONDITION_FACT per satisfying event, one ACTION_FACT
// per sibling action, RULE_DESCRIPTION, RULE_OWNER. Throws Error(UnknownRule).
Psi assemble_psi(const CausePath& path, std::span<const Rule> rules);

// FULL is the identity. Every other view keeps the RULE_FIRED anchor:
//   FACT       -> RULE_FIRED + PRECONDITION_FACTs
//   RULE       -> RULE_FIRED + RULE_DESCRIPTION
//   SIMPLIFIED -> RULE_FIRED + RULE_OWNER
// Relative order of the input is preserved.
Psi project_view(const Psi& psi, ViewKind view);

// Construct kinds a view is allowed to carry.
std::vector<ConstructKind> view_kinds(ViewKind view);

} // namespace lucid

#include "lucid/psi.hpp"

#include "lucid/errors.hpp"

#include <algorithm>

namespace lucid {

std::string_view to_string(ConstructCategory c) noexcept {
    return c == ConstructCategory::Aec ? "AEC" : "CEC";
}

std::string_view to_string(ConstructKind k) noexcept {
    switch (k) {
        case ConstructKind::RuleFired: return "RULE_FIRED";
        case ConstructKind::PreconditionFact: return "PRECONDITION_FACT";
        case ConstructKind::ActionFact: return "ACTION_FACT";
        case ConstructKind::RuleDescription: return "RULE_DESCRIPTION";
        case ConstructKind::RuleOwner: return "RULE_OWNER";
    }
    return "?";
}

ConstructCategory ExplanationConstruct::category() const noexcept {
    switch (kind()) {
        case ConstructKind::RuleDescription:
        case ConstructKind::RuleOwner: return ConstructCategory::Cec;
        default: return ConstructCategory::Aec;
    }
}

Psi assemble_psi(const CausePath& path, std::span<const Rule> rules) {
    const auto it = std::find_if(rules.begin(), rules.end(),
                                 [&](const Rule& r) { return r.id == path.fired_rule; });
    if (it == rules.end())
        fail(ErrorCode::UnknownRule, "cause path names unknown rule '" + path.fired_rule + "'");
    const Rule& rule = *it;

    Psi psi;
    psi.reserve(3 + path.satisfying_events.size() + path.sibling_actions.size());
    psi.emplace_back(RuleFiredPayload{rule, path.execution});
    for (const auto& s : path.satisfying_events)
        psi.emplace_back(PreconditionFactPayload{s.precondition, s.record});
    for (const auto& a : path.sibling_actions)
        psi.emplace_back(ActionFactPayload{a.action, a.record});
    psi.emplace_back(RuleDescriptionPayload{rule.id, rule.name, rule.description});
    psi.emplace_back(RuleOwnerPayload{rule.id, rule.owner});
    return psi;
}

std::vector<ConstructKind> view_kinds(ViewKind view) {
    switch (view) {
        case ViewKind::Full:
            return {ConstructKind::RuleFired, ConstructKind::PreconditionFact,
                    ConstructKind::ActionFact, ConstructKind::RuleDescription,
                    ConstructKind::RuleOwner};
        case ViewKind::Fact: return {ConstructKind::RuleFired, ConstructKind::PreconditionFact};
        case ViewKind::Rule: return {ConstructKind::RuleFired, ConstructKind::RuleDescription};
        case ViewKind::Simplified: return {ConstructKind::RuleFired, ConstructKind::RuleOwner};
    }
    return {};
}

Psi project_view(const Psi& psi, ViewKind view) {
    if (view == ViewKind::Full) return psi;
    const auto kinds = view_kinds(view);
    Psi out;
    for (const auto& c : psi)
        if (std::find(kinds.begin(), kinds.end(), c.kind()) != kinds.end()) out.push_back(c);
    return out;
}

} // namespace lucid

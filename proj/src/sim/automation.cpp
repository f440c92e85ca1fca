#include "lucid/automation.hpp"

namespace lucid {

StateReader reader_for(const EventLog& log) {
    return [&log](const EntityId& e, const std::string& p, Timestamp t) { return log.state_at(e, p, t); };
}

std::vector<Firing> RuleRunner::step(const StateReader& state, std::span<const Rule> rules,
                                     Timestamp t) {
    std::vector<Firing> out;
    for (const auto& rule : rules) {
        const bool now = evaluate_tree(rule.preconditions, [&](const Precondition& p) {
            const auto v = state(p.entity, p.property, t);
            return v && compare(*v, p.comparator, p.value);
        });
        bool& before = last_truth_[rule.id];
        const bool fire = now && (rule.level_triggered || !before);
        before = now;
        if (!fire) continue;

        Firing f{rule.id, t, {}};
        const EntityId& anchor = rule.actions.front().entity;
        f.emitted.push_back({t, anchor, EventKind::RuleFired, rule.id, std::nullopt,
                             Cause::rule(rule.id), 0});
        for (const auto& a : rule.actions)
            f.emitted.push_back({t + options_.action_delay, a.entity, EventKind::ActionExecuted,
                                 a.action, a.value, Cause::rule(rule.id), 0});
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace lucid

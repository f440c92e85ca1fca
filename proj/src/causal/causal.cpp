#include "lucid/causal.hpp"

#include "lucid/errors.hpp"

#include <algorithm>

namespace lucid {

namespace {

constexpr Timestamp kNoFloor = Timestamp::min();

// Record establishing the value of (entity, property) strictly before t. With a
// floor, only writes at or after it count and the baseline is ignored.
const EventRecord* establishing_write(const LogWindow& log, const Precondition& p, Timestamp t,
                                      Timestamp floor) {
    if (floor == kNoFloor) return log.last_write_before(p.entity, p.property, t);
    const EventRecord* w = log.last_write_before(p.entity, p.property, t, true);
    return (w && w->ts >= floor) ? w : nullptr;
}

bool leaf_holds(const Precondition& p, const EventRecord* w) {
    return w && w->value && compare(*w->value, p.comparator, p.value);
}

bool witness(const PreconditionGroup& g, const LogWindow& log, Timestamp t,
             Timestamp floor, std::vector<SatisfyingEvent>& out) {
    const bool is_and = g.op == GroupOp::And;
    bool acc = is_and;
    std::vector<SatisfyingEvent> mine;
    for (const auto& child : g.children) {
        std::vector<SatisfyingEvent> sub;
        bool v;
        if (child.is_leaf()) {
            const auto* w = establishing_write(log, child.leaf(), t, floor);
            v = leaf_holds(child.leaf(), w);
            if (v) sub.push_back({child.leaf(), *w});
        } else {
            v = witness(child.group(), log, t, floor, sub);
        }
        if (v) mine.insert(mine.end(), sub.begin(), sub.end());
        acc = is_and ? (acc && v) : (acc || v);
    }
    if (acc) out.insert(out.end(), mine.begin(), mine.end());
    return acc;
}

bool action_matches(const RuleAction& a, const EventRecord& r) {
    if (r.kind != EventKind::ActionExecuted || r.entity != a.entity || r.name != a.action)
        return false;
    return !a.value || (r.value && *r.value == *a.value);
}

Millis distance(Timestamp a, Timestamp b) { return a > b ? a - b : b - a; }

struct Candidate {
    const Rule* rule;
    std::vector<SatisfyingEvent> facts;
    std::vector<SiblingAction> actions;
};

std::optional<Candidate> qualify(const Rule& rule, const EventRecord& exec, const LogWindow& log,
                                 Timestamp lower, Timestamp upper, const CausalOptions& opt) {
    const auto own = std::find_if(rule.actions.begin(), rule.actions.end(),
                                  [&](const RuleAction& a) { return action_matches(a, exec); });
    if (own == rule.actions.end()) return std::nullopt;

    Candidate c{&rule, {}, {}};
    const Timestamp t = exec.ts;
    for (auto a = rule.actions.begin(); a != rule.actions.end(); ++a) {
        if (a == own) {
            c.actions.push_back({*a, exec});
            continue;
        }
        const EventRecord* best = nullptr;
        for (const auto& r : log.records) {
            if (r.ts < lower || r.ts > upper || !action_matches(*a, r)) continue;
            if (distance(r.ts, t) > opt.simultaneity) continue;
            if (!best || distance(r.ts, t) < distance(best->ts, t)) best = &r;
        }
        if (!best) return std::nullopt;
        c.actions.push_back({*a, *best});
    }

    const Timestamp floor = opt.strict_window ? std::max(lower, log.from) : kNoFloor;
    if (!witness(rule.preconditions, log, t, floor, c.facts)) return std::nullopt;
    return c;
}

std::optional<bool> cross_check(const RuleId& id, const EventRecord& exec, const LogWindow& log,
                                const CausalOptions& opt) {
    if (exec.caused_by.kind == CauseKind::Rule) return exec.caused_by.id == id;
    for (const auto& r : log.records)
        if (r.kind == EventKind::RuleFired && r.name == id && r.ts <= exec.ts &&
            exec.ts - r.ts <= opt.simultaneity)
            return true;
    if (exec.caused_by.kind != CauseKind::None) return false;
    return std::nullopt;
}

} // namespace

bool eval(const PreconditionGroup& group, const LogWindow& log, Timestamp t, bool strict_window) {
    return satisfying_leaves(group, log, t, strict_window).has_value();
}

std::optional<std::vector<SatisfyingEvent>> satisfying_leaves(const PreconditionGroup& group,
                                                              const LogWindow& log, Timestamp t,
                                                              bool strict_window) {
    std::vector<SatisfyingEvent> out;
    const Timestamp floor = strict_window ? log.from : kNoFloor;
    if (!witness(group, log, t, floor, out)) return std::nullopt;
    return out;
}

std::optional<EventRecord> locate_execution(const LogWindow& log, const EntityId& entity,
                                            const std::string& action, Timestamp at,
                                            Millis lookback) {
    const Timestamp lower = at - lookback;
    for (auto it = log.records.rbegin(); it != log.records.rend(); ++it) {
        if (it->ts > at) continue;
        if (it->ts < lower) break;
        if (it->kind == EventKind::ActionExecuted && it->entity == entity && it->name == action)
            return *it;
    }
    return std::nullopt;
}

std::optional<CausePath> find_cause_path(const Explanandum& explanandum,
                                         std::span<const Rule> rules, const LogWindow& log,
                                         const CausalOptions& options) {
    if (options.lookback <= Millis::zero())
        fail(ErrorCode::Validation, "lookback must be positive");
    const Timestamp upper = explanandum.requested_at;
    const Timestamp lower = upper - options.lookback;
    const auto exec =
        locate_execution(log, explanandum.entity, explanandum.action, upper, options.lookback);
    if (!exec)
        fail(ErrorCode::ActionNotFound,
             "no execution of " + action_label(explanandum.entity, explanandum.action) +
                 " between " + format_iso8601(lower) + " and " + format_iso8601(upper));

    std::vector<Candidate> found;
    for (const auto& rule : rules)
        if (auto c = qualify(rule, *exec, log, lower, upper, options)) found.push_back(std::move(*c));

    if (found.empty()) return std::nullopt;
    if (found.size() > 1) {
        std::vector<std::string> ids;
        for (const auto& c : found) ids.push_back(c.rule->id);
        std::sort(ids.begin(), ids.end());
        throw AmbiguousCauseError(std::move(ids));
    }

    auto& c = found.front();
    CausePath path;
    path.fired_rule = c.rule->id;
    path.satisfying_events = std::move(c.facts);
    path.sibling_actions = std::move(c.actions);
    path.fired_at = exec->ts;
    path.execution = *exec;
    path.log_agrees = cross_check(path.fired_rule, *exec, log, options);
    return path;
}

} // namespace lucid

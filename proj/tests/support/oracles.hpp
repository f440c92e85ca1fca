#pragma once

// Reference answers computed the slow, obvious way. Nothing here calls into
// the library's evaluation, lookup or search code; only plain data types are
// shared so results can be compared.

#include "lucid/domain.hpp"
#include "lucid/view_inference.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

using namespace lucid;

// Records sorted by time; equal timestamps keep insertion order.
inline std::vector<EventRecord> time_sorted(std::vector<EventRecord> inserted) {
    std::stable_sort(inserted.begin(), inserted.end(),
                     [](const EventRecord& a, const EventRecord& b) { return a.ts < b.ts; });
    return inserted;
}

// Linear scan over everything that was inserted.
inline std::vector<EventRecord> window(const std::vector<EventRecord>& inserted, Timestamp from,
                                       Timestamp to) {
    std::vector<EventRecord> out;
    for (const auto& r : time_sorted(inserted))
        if (r.ts >= from && r.ts <= to) out.push_back(r);
    return out;
}

// Folds every write up to t (inclusive, or strictly before when `strict`).
inline std::optional<Scalar> fold_state(const std::vector<EventRecord>& inserted, const EntityId& entity,
                                        const std::string& property, Timestamp t, bool strict = false) {
    std::optional<Scalar> v;
    for (const auto& r : time_sorted(inserted)) {
        if (strict ? r.ts >= t : r.ts > t) break;
        if (r.kind == EventKind::PropertyChange && r.entity == entity && r.name == property) v = r.value;
    }
    return v;
}

// Same-type equality; numeric-only ordering; anything else is false.
inline bool holds(const std::optional<Scalar>& observed, Comparator c, const Scalar& expected) {
    if (!observed) return false;
    const Scalar& o = *observed;
    if (o.index() != expected.index()) return false;
    if (c == Comparator::Eq) return o == expected;
    if (c == Comparator::Ne) return o != expected;
    if (o.index() != 1) return false;
    const double a = std::get<double>(o), b = std::get<double>(expected);
    switch (c) {
        case Comparator::Lt: return a < b;
        case Comparator::Le: return a <= b;
        case Comparator::Gt: return a > b;
        case Comparator::Ge: return a >= b;
        default: return false;
    }
}

// Postfix form: leaf tokens index into a leaf table; op tokens pop `arity` values.
struct Token {
    bool is_leaf = true;
    std::size_t leaf = 0;
    GroupOp op = GroupOp::And;
    std::size_t arity = 0;
};

inline void to_postfix(const PreconditionGroup& g, std::vector<const Precondition*>& leaves,
                       std::vector<Token>& out) {
    for (const auto& child : g.children) {
        if (std::holds_alternative<Precondition>(child.value)) {
            leaves.push_back(&std::get<Precondition>(child.value));
            out.push_back({true, leaves.size() - 1, GroupOp::And, 0});
        } else {
            to_postfix(std::get<PreconditionGroup>(child.value), leaves, out);
        }
    }
    out.push_back({false, 0, g.op, g.children.size()});
}

inline bool run_postfix(const std::vector<Token>& tokens, const std::vector<bool>& leaf_values) {
    std::vector<bool> stack;
    for (const auto& t : tokens) {
        if (t.is_leaf) {
            stack.push_back(leaf_values.at(t.leaf));
            continue;
        }
        bool acc = t.op == GroupOp::And;
        for (std::size_t i = 0; i < t.arity; ++i) {
            const bool v = stack.back();
            stack.pop_back();
            acc = t.op == GroupOp::And ? (acc && v) : (acc || v);
        }
        stack.push_back(acc);
    }
    return stack.back();
}

// Formula substitution: every leaf replaced by its truth under `value_of`.
template <class ValueOf>
bool substitute_and_eval(const PreconditionGroup& g, ValueOf value_of) {
    std::vector<const Precondition*> leaves;
    std::vector<Token> tokens;
    to_postfix(g, leaves, tokens);
    std::vector<bool> values;
    for (const auto* p : leaves) values.push_back(holds(value_of(*p), p->comparator, p->value));
    return run_postfix(tokens, values);
}

// Tree truth with state reconstructed from the whole log strictly before t.
inline bool eval(const PreconditionGroup& g, const std::vector<EventRecord>& inserted, Timestamp t) {
    return substitute_and_eval(g, [&](const Precondition& p) {
        return fold_state(inserted, p.entity, p.property, t, true);
    });
}

struct CauseOutcome {
    enum Kind { ActionNotFound, NoRule, Found, Ambiguous } kind = NoRule;
    std::vector<RuleId> rules; // sorted
    std::optional<EventRecord> execution;
};

inline bool action_is(const RuleAction& a, const EventRecord& r) {
    if (r.kind != EventKind::ActionExecuted || r.entity != a.entity || r.name != a.action) return false;
    if (!a.value) return true;
    return r.value && r.value->index() == a.value->index() && *r.value == *a.value;
}

// Exhaustive per-rule test: each rule is tried on its own against fully
// reconstructed state.
inline CauseOutcome find_cause(const EntityId& entity, const std::string& action, Timestamp at, Millis m,
                               Millis epsilon, const std::vector<Rule>& rules,
                               const std::vector<EventRecord>& inserted) {
    CauseOutcome out;
    const auto win = window(inserted, at - m, at);
    for (const auto& r : win)
        if (r.kind == EventKind::ActionExecuted && r.entity == entity && r.name == action) out.execution = r;
    if (!out.execution) {
        out.kind = CauseOutcome::ActionNotFound;
        return out;
    }
    const EventRecord& exec = *out.execution;
    for (const auto& rule : rules) {
        bool triggers = false;
        for (const auto& a : rule.actions) triggers = triggers || action_is(a, exec);
        if (!triggers) continue;
        bool all_actions = true;
        for (const auto& a : rule.actions) {
            bool seen = action_is(a, exec);
            for (const auto& r : win) {
                const auto gap = r.ts > exec.ts ? r.ts - exec.ts : exec.ts - r.ts;
                if (action_is(a, r) && gap <= epsilon) seen = true;
            }
            all_actions = all_actions && seen;
        }
        if (!all_actions) continue;
        if (!eval(rule.preconditions, inserted, exec.ts)) continue;
        out.rules.push_back(rule.id);
    }
    std::sort(out.rules.begin(), out.rules.end());
    out.kind = out.rules.empty() ? CauseOutcome::NoRule
               : out.rules.size() == 1 ? CauseOutcome::Found
                                       : CauseOutcome::Ambiguous;
    return out;
}

// Two passes over a property-change trace: first the truth of every rule
// after each change, then the false -> true transitions. Level-triggered
// rules fire on every true step.
inline std::vector<std::pair<RuleId, Timestamp>> edge_firings(const std::vector<Rule>& rules,
                                                              const std::vector<EventRecord>& trace) {
    std::vector<std::vector<bool>> truth(rules.size());
    std::vector<EventRecord> prefix;
    std::vector<Timestamp> steps;
    for (const auto& r : trace) {
        prefix.push_back(r);
        if (r.kind != EventKind::PropertyChange) continue;
        steps.push_back(r.ts);
        std::map<std::pair<EntityId, std::string>, Scalar> state;
        for (const auto& w : prefix)
            if (w.kind == EventKind::PropertyChange && w.ts <= r.ts && w.value)
                state[{w.entity, w.name}] = *w.value;
        for (std::size_t i = 0; i < rules.size(); ++i)
            truth[i].push_back(substitute_and_eval(rules[i].preconditions, [&](const Precondition& p) {
                const auto it = state.find({p.entity, p.property});
                return it == state.end() ? std::optional<Scalar>() : std::optional<Scalar>(it->second);
            }));
    }
    std::vector<std::pair<RuleId, Timestamp>> out;
    for (std::size_t k = 0; k < steps.size(); ++k)
        for (std::size_t i = 0; i < rules.size(); ++i) {
            const bool before = k > 0 && truth[i][k - 1];
            if (truth[i][k] && (rules[i].level_triggered || !before)) out.emplace_back(rules[i].id, steps[k]);
        }
    return out;
}

// Deliveries in (at - 90 days, at].
inline std::size_t occurrences(const std::vector<Timestamp>& deliveries, Timestamp at) {
    const Timestamp lower = at - std::chrono::days{90};
    std::size_t n = 0;
    for (auto d : deliveries) n += (d > lower && d <= at);
    return n;
}

inline Occurrence occurrence_class(std::size_t prior) {
    return prior == 0 ? Occurrence::FirstTime : prior == 1 ? Occurrence::SecondTime : Occurrence::More;
}

// Last-added half-open interval containing t; WORKING when none does.
inline UserState schedule_lookup(const std::vector<std::tuple<Timestamp, Timestamp, UserState>>& entries,
                                 Timestamp t) {
    UserState s = UserState::Working;
    for (const auto& [from, to, state] : entries)
        if (from <= t && t < to) s = state;
    return s;
}

// Priority-ordered narrowing over std::set, skipping empty intersections.
// Expressiveness, highest first: Full, Fact, Rule, Simplified.
using Views = std::set<ViewKind>;

inline ViewKind infer(const std::vector<std::pair<int, std::function<Views(const ContextSnapshot&)>>>& policies,
                      const ContextSnapshot& s, Views* final_running = nullptr) {
    auto ordered = policies;
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Views running{ViewKind::Full, ViewKind::Fact, ViewKind::Rule, ViewKind::Simplified};
    for (const auto& [prio, suitable] : ordered) {
        Views next;
        for (auto v : suitable(s))
            if (running.count(v)) next.insert(v);
        if (!next.empty()) running = next;
    }
    if (final_running) *final_running = running;
    for (auto v : {ViewKind::Full, ViewKind::Fact, ViewKind::Rule, ViewKind::Simplified})
        if (running.count(v)) return v;
    return ViewKind::Simplified;
}

} // namespace oracle

#pragma once

// Hand-rolled random generators for the property tests. Every generator
// takes the engine by reference so a failing case can be replayed from its seed.

#include "lucid/domain.hpp"
#include "lucid/scenario.hpp"

#include <random>
#include <string>
#include <vector>

namespace gen {

using namespace lucid;
using Rng = std::mt19937_64;

inline const Timestamp kBase = from_unix_millis(1'700'000'000'000);

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
inline int between(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

// A small fixed universe so random trees and random logs actually collide.
// Property k of every entity has a fixed type: 0 bool, 1 number, 2 string.
struct Universe {
    int entities = 4;
    int properties = 3;

    static EntityId entity(int i) { return "e" + std::to_string(i); }
    static std::string property(int k) { return "p" + std::to_string(k); }

    Scalar value(Rng& rng, int k) const {
        switch (k % 3) {
            case 0: return chance(rng, 0.5);
            case 1: return static_cast<double>(between(rng, 0, 3));
            default: {
                static const char* names[] = {"on", "off", "idle"};
                return std::string(names[pick(rng, 3)]);
            }
        }
    }
};

inline Precondition leaf(Rng& rng, const Universe& u) {
    Precondition p;
    const int e = between(rng, 0, u.entities - 1), k = between(rng, 0, u.properties - 1);
    p.entity = Universe::entity(e);
    p.property = Universe::property(k);
    p.value = u.value(rng, k);
    if (k % 3 == 1) {
        static const Comparator all[] = {Comparator::Eq, Comparator::Ne, Comparator::Lt,
                                         Comparator::Le, Comparator::Gt, Comparator::Ge};
        p.comparator = all[pick(rng, 6)];
    } else {
        p.comparator = chance(rng, 0.75) ? Comparator::Eq : Comparator::Ne;
    }
    p.phrase = p.entity + " " + p.property + " is " + scalar_to_string(p.value);
    return p;
}

// Random AND/OR tree of depth at most `max_depth` (a lone group is depth 1).
inline PreconditionGroup tree(Rng& rng, const Universe& u, int max_depth, int depth = 1) {
    PreconditionGroup g;
    g.op = chance(rng, 0.5) ? GroupOp::And : GroupOp::Or;
    const int n = between(rng, 1, 3);
    for (int i = 0; i < n; ++i) {
        if (depth < max_depth && chance(rng, 0.35))
            g.children.push_back({tree(rng, u, max_depth, depth + 1)});
        else
            g.children.push_back({leaf(rng, u)});
    }
    return g;
}

// One property write per (entity, property), so every leaf has a value or is ABSENT.
inline std::vector<EventRecord> random_state(Rng& rng, const Universe& u, Timestamp at, double absent_p = 0.15) {
    std::vector<EventRecord> out;
    for (int e = 0; e < u.entities; ++e)
        for (int k = 0; k < u.properties; ++k) {
            if (chance(rng, absent_p)) continue;
            out.push_back({at, Universe::entity(e), EventKind::PropertyChange, Universe::property(k),
                           u.value(rng, k), Cause::none(), 0});
        }
    return out;
}

struct System {
    std::vector<Rule> rules;
    std::vector<EventRecord> events; // insertion order
    EntityId entity;
    std::string action;
    Timestamp at;
    Millis lookback{0};
};

// Up to 10 rules and 50 events over a twenty-minute span. With `disjoint`,
// no two rules share an (entity, action) pair, so no action has two rule
// explanations and the system is conflict-free by construction.
inline System system(Rng& rng, bool disjoint = true) {
    Universe u;
    System s;
    const int n_rules = between(rng, 1, 10);
    for (int i = 0; i < n_rules; ++i) {
        Rule r;
        r.id = "r" + std::to_string(i);
        r.name = "Rule_" + std::to_string(i);
        r.description = "generated rule " + std::to_string(i);
        r.owner = "u0";
        r.preconditions = tree(rng, u, between(rng, 1, 4));
        const int n_actions = between(rng, 1, 3);
        for (int k = 0; k < n_actions; ++k) {
            RuleAction a;
            a.entity = Universe::entity(between(rng, 0, u.entities - 1));
            a.action = disjoint ? "act_" + r.id + "_" + std::to_string(k) : "act" + std::to_string(between(rng, 0, 2));
            r.actions.push_back(a);
        }
        s.rules.push_back(std::move(r));
    }

    const int n_events = between(rng, 1, 50);
    const auto at_offset = [&] { return kBase + Millis{250LL * between(rng, 0, 4800)}; };
    while (static_cast<int>(s.events.size()) < n_events) {
        if (chance(rng, 0.6)) {
            const int e = between(rng, 0, u.entities - 1), k = between(rng, 0, u.properties - 1);
            s.events.push_back({at_offset(), Universe::entity(e), EventKind::PropertyChange,
                                Universe::property(k), u.value(rng, k), Cause::none(), 0});
            continue;
        }
        // A burst of one rule's actions, sometimes incomplete or spread past the tolerance.
        const auto& r = s.rules[pick(rng, s.rules.size())];
        const Timestamp t = at_offset();
        const Cause cause = chance(rng, 0.5) ? Cause::rule(r.id) : chance(rng, 0.5) ? Cause::api() : Cause::none();
        for (const auto& a : r.actions) {
            if (chance(rng, 0.1)) continue;
            s.events.push_back({t + Millis{between(rng, 0, 2600)}, a.entity, EventKind::ActionExecuted, a.action,
                                std::nullopt, cause, 0});
            if (static_cast<int>(s.events.size()) >= n_events) break;
        }
    }

    std::vector<const EventRecord*> actions;
    for (const auto& e : s.events)
        if (e.kind == EventKind::ActionExecuted) actions.push_back(&e);
    if (!actions.empty() && chance(rng, 0.85)) {
        const auto* e = actions[pick(rng, actions.size())];
        s.entity = e->entity;
        s.action = e->name;
        s.at = e->ts + Millis{1000LL * between(rng, 0, 300)};
    } else {
        const auto& r = s.rules[pick(rng, s.rules.size())];
        s.entity = r.actions.front().entity;
        s.action = r.actions.front().action;
        s.at = at_offset();
    }
    s.lookback = Millis{60'000LL * between(rng, 1, 30)};
    return s;
}

// Closed-loop scenario: rules with disjoint actions, property changes spaced
// well past the action delay, and no queries (the test asks afterwards).
inline sim::Scenario closed_loop_scenario(Rng& rng, int index) {
    Universe u;
    sim::Scenario s;
    s.name = "generated-" + std::to_string(index);
    for (int e = 0; e < u.entities; ++e) {
        SmartObject d;
        d.id = Universe::entity(e);
        d.name = "Device " + std::to_string(e);
        for (int k = 0; k < u.properties; ++k) d.properties.insert(Universe::property(k));
        s.devices.push_back(d);
    }
    s.users.push_back({{"u0", "Owner", Technicality::Technical, Role::Owner}, {}});

    const int n_rules = between(rng, 1, 8);
    for (int i = 0; i < n_rules; ++i) {
        Rule r;
        r.id = "r" + std::to_string(i);
        r.name = "Rule_" + std::to_string(i);
        r.description = "generated rule " + std::to_string(i);
        r.owner = "u0";
        r.preconditions = tree(rng, u, between(rng, 1, 3));
        const int n_actions = between(rng, 1, 3);
        for (int k = 0; k < n_actions; ++k) {
            const int e = between(rng, 0, u.entities - 1);
            const std::string name = "act_" + r.id + "_" + std::to_string(k);
            r.actions.push_back({Universe::entity(e), name, std::nullopt});
            s.devices[static_cast<std::size_t>(e)].actions.insert(name);
        }
        s.rules.push_back(std::move(r));
    }

    Timestamp t = kBase;
    const int n_events = between(rng, 5, 60);
    for (int i = 0; i < n_events; ++i) {
        t += Millis{between(rng, 500, 20'000)};
        const int e = between(rng, 0, u.entities - 1), k = between(rng, 0, u.properties - 1);
        sim::ScriptedEvent ev;
        ev.entity = Universe::entity(e);
        ev.name = Universe::property(k);
        ev.value = u.value(rng, k);
        s.timeline.push_back({t, ev});
    }
    return s;
}

} // namespace gen

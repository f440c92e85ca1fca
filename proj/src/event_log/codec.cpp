#include "lucid/codec.hpp"

#include "lucid/errors.hpp"

namespace lucid::codec {

const json& require(const json& j, std::string_view field) {
    if (!j.is_object()) fail(ErrorCode::Validation, "expected a JSON object");
    const auto it = j.find(std::string(field));
    if (it == j.end()) fail(ErrorCode::Validation, "missing field '" + std::string(field) + "'");
    return *it;
}

std::string require_string(const json& j, std::string_view field) {
    const auto& v = require(j, field);
    if (!v.is_string())
        fail(ErrorCode::Validation, "field '" + std::string(field) + "' must be a string");
    return v.get<std::string>();
}

std::string optional_string(const json& j, std::string_view field, std::string fallback) {
    if (!j.is_object()) return fallback;
    const auto it = j.find(std::string(field));
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_string())
        fail(ErrorCode::Validation, "field '" + std::string(field) + "' must be a string");
    return it->get<std::string>();
}

Timestamp require_time(const json& j, std::string_view field) {
    return parse_iso8601(require_string(j, field));
}

json parse_document(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Validation, std::string(what) + ": " + e.what());
    }
}

json scalar_to_json(const Scalar& v) {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

Scalar scalar_from_json(const json& j, std::string_view field) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    fail(ErrorCode::Validation,
         "field '" + std::string(field) + "' must be a boolean, number or string");
}

json precondition_to_json(const Precondition& p) {
    json j{{"entity", p.entity},
           {"property", p.property},
           {"comparator", std::string(comparator_symbol(p.comparator))},
           {"value", scalar_to_json(p.value)}};
    if (!p.phrase.empty()) j["phrase"] = p.phrase;
    return j;
}

Precondition precondition_from_json(const json& j) {
    Precondition p;
    p.entity = require_string(j, "entity");
    p.property = require_string(j, "property");
    p.comparator = parse_comparator(optional_string(j, "comparator", "="));
    p.value = scalar_from_json(require(j, "value"), "value");
    p.phrase = optional_string(j, "phrase");
    return p;
}

json tree_to_json(const PreconditionGroup& g) {
    json children = json::array();
    for (const auto& c : g.children)
        children.push_back(c.is_leaf() ? precondition_to_json(c.leaf()) : tree_to_json(c.group()));
    return {{"op", g.op == GroupOp::And ? "AND" : "OR"}, {"children", std::move(children)}};
}

PreconditionGroup tree_from_json(const json& j) {
    PreconditionGroup g;
    const auto op = require_string(j, "op");
    if (op == "AND" || op == "and")
        g.op = GroupOp::And;
    else if (op == "OR" || op == "or")
        g.op = GroupOp::Or;
    else
        fail(ErrorCode::Validation, "unknown group operator '" + op + "'");
    const auto& children = require(j, "children");
    if (!children.is_array()) fail(ErrorCode::Validation, "'children' must be an array");
    for (const auto& c : children) {
        if (c.is_object() && c.contains("op"))
            g.children.push_back({tree_from_json(c)});
        else
            g.children.push_back({precondition_from_json(c)});
    }
    return g;
}

json action_to_json(const RuleAction& a) {
    json j{{"entity", a.entity}, {"action", a.action}};
    if (a.value) j["value"] = scalar_to_json(*a.value);
    return j;
}

RuleAction action_from_json(const json& j) {
    RuleAction a;
    a.entity = require_string(j, "entity");
    a.action = require_string(j, "action");
    if (j.contains("value") && !j["value"].is_null()) a.value = scalar_from_json(j["value"], "value");
    return a;
}

json rule_to_json(const Rule& r) {
    json actions = json::array();
    for (const auto& a : r.actions) actions.push_back(action_to_json(a));
    json j{{"id", r.id},
           {"name", r.name},
           {"description", r.description},
           {"owner", r.owner},
           {"preconditions", tree_to_json(r.preconditions)},
           {"actions", std::move(actions)}};
    if (r.level_triggered) j["level_triggered"] = true;
    return j;
}

Rule rule_from_json(const json& j) {
    Rule r;
    r.id = require_string(j, "id");
    r.name = optional_string(j, "name", r.id);
    r.description = optional_string(j, "description");
    r.owner = require_string(j, "owner");
    r.preconditions = tree_from_json(require(j, "preconditions"));
    const auto& actions = require(j, "actions");
    if (!actions.is_array()) fail(ErrorCode::Validation, "'actions' must be an array");
    for (const auto& a : actions) r.actions.push_back(action_from_json(a));
    if (j.contains("level_triggered")) r.level_triggered = j["level_triggered"].get<bool>();
    validate_rule(r);
    return r;
}

json object_to_json(const SmartObject& o) {
    return {{"id", o.id}, {"name", o.name}, {"properties", o.properties}, {"actions", o.actions}};
}

SmartObject object_from_json(const json& j) {
    SmartObject o;
    o.id = require_string(j, "id");
    o.name = optional_string(j, "name", o.id);
    auto names = [&](std::string_view field) {
        std::set<std::string> out;
        if (!j.contains(std::string(field))) return out;
        for (const auto& n : j[std::string(field)]) {
            if (!n.is_string()) fail(ErrorCode::Validation, "device names must be strings");
            if (!out.insert(n.get<std::string>()).second)
                fail(ErrorCode::Validation, "duplicate " + std::string(field) + " name '" +
                                                n.get<std::string>() + "' on " + o.id);
        }
        return out;
    };
    o.properties = names("properties");
    o.actions = names("actions");
    return o;
}

json event_to_json(const EventRecord& e) {
    return {{"ts", format_iso8601(e.ts)},
            {"entity", e.entity},
            {"kind", std::string(event_kind_name(e.kind))},
            {"name", e.name},
            {"value", e.value ? scalar_to_json(*e.value) : json(nullptr)},
            {"caused_by", cause_to_string(e.caused_by)}};
}

EventRecord event_from_json(const json& j) {
    EventRecord e;
    e.ts = require_time(j, "ts");
    e.entity = require_string(j, "entity");
    e.kind = parse_event_kind(require_string(j, "kind"));
    e.name = require_string(j, "name");
    if (j.contains("value") && !j["value"].is_null()) e.value = scalar_from_json(j["value"], "value");
    e.caused_by = parse_cause(optional_string(j, "caused_by", "none"));
    validate_event(e);
    return e;
}

std::string event_to_line(const EventRecord& e) { return event_to_json(e).dump(); }

} // namespace lucid::codec

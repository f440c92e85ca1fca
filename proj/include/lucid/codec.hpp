#pragma once

// JSON encodings of the shared domain types. Every decoder throws
// Error(Validation) with a message naming the offending field.

#include "lucid/domain.hpp"

#include <json.hpp>

namespace lucid::codec {

using nlohmann::json;

json scalar_to_json(const Scalar& v);
Scalar scalar_from_json(const json& j, std::string_view field);

// Groups are {op, children}; leaves are {entity, property, comparator, value[, phrase]}.
json tree_to_json(const PreconditionGroup& g);
PreconditionGroup tree_from_json(const json& j);

json precondition_to_json(const Precondition& p);
Precondition precondition_from_json(const json& j);

json action_to_json(const RuleAction& a);
RuleAction action_from_json(const json& j);

json rule_to_json(const Rule& r);
Rule rule_from_json(const json& j);

json object_to_json(const SmartObject& o);
SmartObject object_from_json(const json& j);

// Exactly the log-line fields: ts, entity, kind, name, value, caused_by.
json event_to_json(const EventRecord& e);
EventRecord event_from_json(const json& j);

std::string event_to_line(const EventRecord& e);

// Small helpers shared by the other decoders.
const json& require(const json& j, std::string_view field);
std::string require_string(const json& j, std::string_view field);
std::string optional_string(const json& j, std::string_view field, std::string fallback = {});
Timestamp require_time(const json& j, std::string_view field);

// Parses text or throws Error(Validation) with the parser message.
json parse_document(std::string_view text, std::string_view what);

} // namespace lucid::codec

#include "lucid/view_inference.hpp"

#include "lucid/errors.hpp"
#include "lucid/resources.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace lucid {

std::string_view to_string(ContextAttribute a) noexcept {
    switch (a) {
        case ContextAttribute::Role: return "role";
        case ContextAttribute::UserState: return "userState";
        case ContextAttribute::Occurrence: return "occurrence";
        case ContextAttribute::Technicality: return "technicality";
    }
    return "?";
}

ContextAttribute parse_attribute(std::string_view s) {
    if (s == "role") return ContextAttribute::Role;
    if (s == "userState") return ContextAttribute::UserState;
    if (s == "occurrence") return ContextAttribute::Occurrence;
    if (s == "technicality") return ContextAttribute::Technicality;
    fail(ErrorCode::PolicyConfig, "unknown context attribute '" + std::string(s) + "'");
}

std::array<std::string_view, 3> attribute_values(ContextAttribute a) {
    switch (a) {
        case ContextAttribute::Role: return {"OWNER", "COWORKER", "GUEST"};
        case ContextAttribute::UserState: return {"MEETING", "BREAK", "WORKING"};
        case ContextAttribute::Occurrence: return {"FIRST_TIME", "SECOND_TIME", "MORE"};
        case ContextAttribute::Technicality: return {"TECHNICAL", "MEDIUM", "NON_TECHNICAL"};
    }
    return {};
}

std::size_t attribute_index(const ContextSnapshot& s, ContextAttribute a) {
    switch (a) {
        case ContextAttribute::Role: return static_cast<std::size_t>(s.role);
        case ContextAttribute::UserState: return static_cast<std::size_t>(s.user_state);
        case ContextAttribute::Occurrence: return static_cast<std::size_t>(s.occurrence);
        case ContextAttribute::Technicality: return static_cast<std::size_t>(s.technicality);
    }
    return 0;
}

std::size_t ViewSet::size() const {
    std::size_t n = 0;
    for (auto v : kAllViews) n += contains(v);
    return n;
}

ViewKind ViewSet::most_expressive() const {
    for (auto v : kAllViews)
        if (contains(v)) return v;
    fail(ErrorCode::Validation, "empty view set has no most expressive view");
}

std::vector<ViewKind> ViewSet::members() const {
    std::vector<ViewKind> out;
    for (auto v : kAllViews)
        if (contains(v)) out.push_back(v);
    return out;
}

std::string ViewSet::to_string() const {
    std::string out = "{";
    for (auto v : members()) {
        if (out.size() > 1) out += ", ";
        out += lucid::to_string(v);
    }
    return out + "}";
}

namespace {

[[noreturn]] void bad(const std::string& msg) { fail(ErrorCode::PolicyConfig, msg); }

} // namespace

PolicySet PolicySet::from_json(const nlohmann::json& doc) {
    PolicySet set;
    const nlohmann::json* list = &doc;
    if (doc.is_object()) {
        if (doc.contains("name") && doc["name"].is_string()) set.name_ = doc["name"];
        if (!doc.contains("policies")) bad("policy document has no 'policies' array");
        list = &doc["policies"];
    }
    if (!list->is_array()) bad("'policies' must be an array");

    std::set<ContextAttribute> seen_attr;
    std::set<int> seen_prio;
    for (const auto& entry : *list) {
        if (!entry.is_object() || !entry.contains("attribute") || !entry["attribute"].is_string())
            bad("policy entry needs a string 'attribute'");
        ContextViewPolicy p;
        p.attribute = parse_attribute(entry["attribute"].get<std::string>());
        const std::string attr(to_string(p.attribute));
        if (!entry.contains("priority") || !entry["priority"].is_number_integer())
            bad("policy '" + attr + "' needs an integer 'priority'");
        p.priority = entry["priority"].get<int>();
        if (p.priority < 1) bad("policy '" + attr + "' priority must be positive");
        if (!seen_attr.insert(p.attribute).second) bad("attribute '" + attr + "' appears twice");
        if (!seen_prio.insert(p.priority).second)
            bad("duplicate priority " + std::to_string(p.priority) + " on '" + attr + "'");

        if (!entry.contains("mapping") || !entry["mapping"].is_object())
            bad("policy '" + attr + "' needs a 'mapping' object");
        const auto& mapping = entry["mapping"];
        const auto values = attribute_values(p.attribute);
        for (const auto& [key, _] : mapping.items())
            if (std::find(values.begin(), values.end(), key) == values.end())
                bad("policy '" + attr + "' maps unknown value '" + key + "'");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const std::string value(values[i]);
            if (!mapping.contains(value)) bad("policy '" + attr + "' does not cover value '" + value + "'");
            const auto& views = mapping[value];
            if (!views.is_array()) bad("policy '" + attr + "' value '" + value + "' must list views");
            for (const auto& v : views) {
                if (!v.is_string()) bad("view names must be strings");
                try {
                    p.mapping[i].insert(parse_view(v.get<std::string>()));
                } catch (const Error&) {
                    bad("policy '" + attr + "' value '" + value + "' names unknown view '" +
                        v.get<std::string>() + "'");
                }
            }
            if (p.mapping[i].empty()) bad("policy '" + attr + "' value '" + value + "' maps to no view");
        }
        set.policies_.push_back(p);
    }
    for (auto a : {ContextAttribute::Role, ContextAttribute::UserState, ContextAttribute::Occurrence,
                   ContextAttribute::Technicality})
        if (!seen_attr.count(a)) bad("no policy for attribute '" + std::string(to_string(a)) + "'");

    std::sort(set.policies_.begin(), set.policies_.end(),
              [](const auto& a, const auto& b) { return a.priority < b.priority; });
    return set;
}

nlohmann::json PolicySet::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : policies_) {
        nlohmann::json mapping = nlohmann::json::object();
        const auto values = attribute_values(p.attribute);
        for (std::size_t i = 0; i < values.size(); ++i) {
            nlohmann::json views = nlohmann::json::array();
            for (auto v : p.mapping[i].members()) views.push_back(std::string(lucid::to_string(v)));
            mapping[std::string(values[i])] = std::move(views);
        }
        list.push_back({{"attribute", std::string(to_string(p.attribute))},
                        {"priority", p.priority},
                        {"mapping", std::move(mapping)}});
    }
    nlohmann::json doc{{"policies", std::move(list)}};
    if (!name_.empty()) doc["name"] = name_;
    return doc;
}

PolicySet load_policies(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        bad(std::string("policy document does not parse: ") + e.what());
    }
    return PolicySet::from_json(doc);
}

PolicySet load_policies_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot read policy file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_policies(ss.str());
}

PolicySet default_policies() { return load_policies(resources::default_policies_json()); }

PolicySet state_first_policies() { return load_policies(resources::state_first_policies_json()); }

InferenceTrace infer_view_traced(const ContextSnapshot& snapshot, const PolicySet& policies) {
    InferenceTrace trace;
    ViewSet running = ViewSet::all();
    for (const auto& p : policies.ordered()) {
        const ViewSet suitable = p.suitable(snapshot);
        const ViewSet narrowed = running & suitable;
        const bool applied = !narrowed.empty();
        if (applied) running = narrowed;
        trace.steps.push_back({p.attribute, suitable, applied, running});
    }
    trace.view = running.most_expressive();
    return trace;
}

ViewKind infer_view(const ContextSnapshot& snapshot, const PolicySet& policies) {
    return infer_view_traced(snapshot, policies).view;
}

} // namespace lucid

#include "lucid/rule_table.hpp"

#include "lucid/codec.hpp"
#include "lucid/errors.hpp"

#include <algorithm>
#include <mutex>

namespace lucid {

namespace {

bool same_content(const Rule& a, const Rule& b) {
    return codec::rule_to_json(a) == codec::rule_to_json(b);
}

} // namespace

RuleVersion RuleTable::put(const Rule& rule, Timestamp effective) {
    validate_rule(rule);
    std::unique_lock lock(mutex_);
    RuleVersion* current = nullptr;
    std::uint32_t last_version = 0;
    for (auto& v : versions_) {
        if (v.rule.id == rule.id) {
            last_version = std::max(last_version, v.version);
            if (!v.valid_to) current = &v;
            continue;
        }
        if (!v.valid_to && is_duplicate(v.rule, rule))
            fail(ErrorCode::Conflict,
                 "rule '" + rule.id + "' duplicates existing rule '" + v.rule.id + "'");
    }
    if (current && same_content(current->rule, rule)) return *current;
    if (current) {
        if (effective < current->valid_from) effective = current->valid_from;
        current->valid_to = effective;
    }
    RuleVersion next{rule, last_version + 1, effective, std::nullopt};
    versions_.push_back(next);
    return next;
}

void RuleTable::remove(const RuleId& id, Timestamp effective) {
    std::unique_lock lock(mutex_);
    for (auto& v : versions_) {
        if (v.rule.id == id && !v.valid_to) {
            v.valid_to = std::max(effective, v.valid_from);
            return;
        }
    }
    fail(ErrorCode::UnknownRule, "no active rule '" + id + "'");
}

std::vector<Rule> RuleTable::active() const {
    std::shared_lock lock(mutex_);
    std::vector<Rule> out;
    for (const auto& v : versions_)
        if (!v.valid_to) out.push_back(v.rule);
    std::sort(out.begin(), out.end(), [](const Rule& a, const Rule& b) { return a.id < b.id; });
    return out;
}

std::vector<Rule> RuleTable::at(Timestamp t) const {
    std::shared_lock lock(mutex_);
    std::vector<Rule> out;
    for (const auto& v : versions_)
        if (v.valid_at(t)) out.push_back(v.rule);
    std::sort(out.begin(), out.end(), [](const Rule& a, const Rule& b) { return a.id < b.id; });
    return out;
}

std::vector<RuleVersion> RuleTable::versions() const {
    std::shared_lock lock(mutex_);
    return versions_;
}

std::optional<Rule> RuleTable::find_active(const RuleId& id) const {
    std::shared_lock lock(mutex_);
    for (const auto& v : versions_)
        if (v.rule.id == id && !v.valid_to) return v.rule;
    return std::nullopt;
}

void RuleTable::import_json(const nlohmann::json& doc, Timestamp effective) {
    const auto& list = doc.is_object() ? codec::require(doc, "rules") : doc;
    if (!list.is_array()) fail(ErrorCode::Validation, "rule document must hold an array of rules");
    for (const auto& r : list) put(codec::rule_from_json(r), effective);
}

nlohmann::json RuleTable::history_json() const {
    std::shared_lock lock(mutex_);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : versions_) {
        nlohmann::json j{{"rule", codec::rule_to_json(v.rule)},
                         {"version", v.version},
                         {"valid_from", format_iso8601(v.valid_from)}};
        j["valid_to"] = v.valid_to ? nlohmann::json(format_iso8601(*v.valid_to)) : nlohmann::json();
        out.push_back(std::move(j));
    }
    return out;
}

void RuleTable::load_history(const nlohmann::json& doc) {
    std::vector<RuleVersion> loaded;
    for (const auto& j : doc) {
        RuleVersion v;
        v.rule = codec::rule_from_json(codec::require(j, "rule"));
        v.version = codec::require(j, "version").get<std::uint32_t>();
        v.valid_from = codec::require_time(j, "valid_from");
        if (j.contains("valid_to") && !j["valid_to"].is_null())
            v.valid_to = codec::require_time(j, "valid_to");
        loaded.push_back(std::move(v));
    }
    std::unique_lock lock(mutex_);
    versions_ = std::move(loaded);
}

} // namespace lucid

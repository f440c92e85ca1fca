#pragma once

#include "lucid/domain.hpp"

#include <json.hpp>

#include <shared_mutex>
#include <vector>

namespace lucid {

// One immutable version of a rule, valid over [valid_from, valid_to).
struct RuleVersion {
    Rule rule;
    std::uint32_t version = 1;
    Timestamp valid_from;
    std::optional<Timestamp> valid_to;

    bool valid_at(Timestamp t) const { return valid_from <= t && (!valid_to || t < *valid_to); }
};

// Append-only rule history. Edits and deletes close the current version
// instead of discarding it, so past firings stay explainable.
class RuleTable {
public:
    // Inserts or supersedes the rule with the same id. Re-putting identical
    // content is a no-op. Throws Error(Conflict) when another active rule has
    // the same precondition tree and action set.
    RuleVersion put(const Rule& rule, Timestamp effective);

    // Closes the active version. Throws Error(UnknownRule).
    void remove(const RuleId& id, Timestamp effective);

    std::vector<Rule> active() const;
    std::vector<Rule> at(Timestamp t) const;
    std::vector<RuleVersion> versions() const;
    std::optional<Rule> find_active(const RuleId& id) const;

    // {"rules": [rule...]} or a bare array; each rule becomes active at `effective`.
    void import_json(const nlohmann::json& doc, Timestamp effective);
    // Full version history, round-trippable through load_history().
    nlohmann::json history_json() const;
    void load_history(const nlohmann::json& doc);

private:
    mutable std::shared_mutex mutex_;
    std::vector<RuleVersion> versions_;
};

} // namespace lucid

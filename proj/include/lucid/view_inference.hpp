#pragma once

// Context-to-view selection. Policies run in priority order, each narrowing
// the running set of views unless the narrowing would leave it empty; the
// most expressive survivor wins.

#include "lucid/domain.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lucid {

enum class ContextAttribute { Role, UserState, Occurrence, Technicality };

std::string_view to_string(ContextAttribute a) noexcept;
ContextAttribute parse_attribute(std::string_view s);

// Value names of an attribute, in the fixed order used to index policy mappings.
std::array<std::string_view, 3> attribute_values(ContextAttribute a);

// Index of the snapshot's value for `a` within attribute_values(a).
std::size_t attribute_index(const ContextSnapshot& snapshot, ContextAttribute a);

class ViewSet {
public:
    ViewSet() = default;
    ViewSet(std::initializer_list<ViewKind> views) {
        for (auto v : views) insert(v);
    }
    static ViewSet all() { return {ViewKind::Full, ViewKind::Fact, ViewKind::Rule, ViewKind::Simplified}; }

    void insert(ViewKind v) { bits_ |= bit(v); }
    bool contains(ViewKind v) const { return bits_ & bit(v); }
    bool empty() const { return bits_ == 0; }
    std::size_t size() const;

    ViewSet operator&(ViewSet o) const { return from_bits(bits_ & o.bits_); }
    bool operator==(const ViewSet&) const = default;
    bool subset_of(ViewSet o) const { return (bits_ & ~o.bits_) == 0; }

    // Precondition: non-empty.
    ViewKind most_expressive() const;
    // Most expressive first.
    std::vector<ViewKind> members() const;
    std::string to_string() const;

private:
    static std::uint8_t bit(ViewKind v) { return static_cast<std::uint8_t>(1u << expressiveness(v)); }
    static ViewSet from_bits(std::uint8_t b) {
        ViewSet s;
        s.bits_ = b;
        return s;
    }
    std::uint8_t bits_ = 0;
};

struct ContextViewPolicy {
    ContextAttribute attribute = ContextAttribute::Role;
    int priority = 1; // 1 is evaluated first
    // Indexed like attribute_values(attribute).
    std::array<ViewSet, 3> mapping;

    ViewSet suitable(const ContextSnapshot& snapshot) const {
        return mapping[attribute_index(snapshot, attribute)];
    }
    bool operator==(const ContextViewPolicy&) const = default;
};

// Validated, priority-sorted policies. Immutable once built.
class PolicySet {
public:
    // Throws Error(PolicyConfig) naming the offending attribute or value.
    static PolicySet from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    const std::vector<ContextViewPolicy>& ordered() const { return policies_; }
    const std::string& name() const { return name_; }

    bool operator==(const PolicySet& o) const { return policies_ == o.policies_; }

private:
    std::string name_;
    std::vector<ContextViewPolicy> policies_;
};

PolicySet load_policies(std::string_view document_text);
PolicySet load_policies_file(const std::string& path);

// Role, User State, Occurrence, Technicality (reproduces the per-user golden outputs).
PolicySet default_policies();
// User State, Occurrence, Technicality, Role (the priority labels as listed in the mapping table).
PolicySet state_first_policies();

struct InferenceStep {
    ContextAttribute attribute;
    ViewSet suitable;
    bool applied = false; // false when the intersection was empty and skipped
    ViewSet running;      // running set after this step
};

struct InferenceTrace {
    std::vector<InferenceStep> steps;
    ViewKind view = ViewKind::Full;
};

InferenceTrace infer_view_traced(const ContextSnapshot& snapshot, const PolicySet& policies);
ViewKind infer_view(const ContextSnapshot& snapshot, const PolicySet& policies);

} // namespace lucid

#include "lucid/domain.hpp"

#include "lucid/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <utility>

namespace lucid {

std::string scalar_to_string(const Scalar& value) {
    if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
    if (const auto* d = std::get_if<double>(&value)) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, *d);
        return std::string(buf, res.ptr);
    }
    return std::get<std::string>(value);
}

std::string_view comparator_symbol(Comparator c) noexcept {
    switch (c) {
        case Comparator::Eq: return "=";
        case Comparator::Ne: return "!=";
        case Comparator::Lt: return "<";
        case Comparator::Le: return "<=";
        case Comparator::Gt: return ">";
        case Comparator::Ge: return ">=";
    }
    return "?";
}

Comparator parse_comparator(std::string_view s) {
    if (s == "=" || s == "==") return Comparator::Eq;
    if (s == "!=" || s == "≠") return Comparator::Ne;
    if (s == "<") return Comparator::Lt;
    if (s == "<=" || s == "≤") return Comparator::Le;
    if (s == ">") return Comparator::Gt;
    if (s == ">=" || s == "≥") return Comparator::Ge;
    fail(ErrorCode::Validation, "unknown comparator '" + std::string(s) + "'");
}

bool is_ordering(Comparator c) noexcept {
    return c == Comparator::Lt || c == Comparator::Le || c == Comparator::Gt ||
           c == Comparator::Ge;
}

bool compare(const Scalar& observed, Comparator c, const Scalar& expected) {
    switch (c) {
        case Comparator::Eq: return observed == expected;
        case Comparator::Ne: return observed.index() == expected.index() && observed != expected;
        default: break;
    }
    const auto* lhs = std::get_if<double>(&observed);
    const auto* rhs = std::get_if<double>(&expected);
    if (!lhs || !rhs) return false;
    switch (c) {
        case Comparator::Lt: return *lhs < *rhs;
        case Comparator::Le: return *lhs <= *rhs;
        case Comparator::Gt: return *lhs > *rhs;
        case Comparator::Ge: return *lhs >= *rhs;
        default: return false;
    }
}

bool Precondition::same_logic(const Precondition& other) const {
    return entity == other.entity && property == other.property &&
           comparator == other.comparator && value == other.value;
}

bool same_logic(const PreconditionGroup& a, const PreconditionGroup& b) {
    if (a.op != b.op || a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        const auto& x = a.children[i];
        const auto& y = b.children[i];
        if (x.is_leaf() != y.is_leaf()) return false;
        if (x.is_leaf() ? !x.leaf().same_logic(y.leaf()) : !same_logic(x.group(), y.group()))
            return false;
    }
    return true;
}

namespace {

void collect(const PreconditionGroup& g, std::vector<Precondition>& out) {
    for (const auto& child : g.children) {
        if (child.is_leaf())
            out.push_back(child.leaf());
        else
            collect(child.group(), out);
    }
}

} // namespace

std::vector<Precondition> collect_leaves(const PreconditionGroup& group) {
    std::vector<Precondition> out;
    collect(group, out);
    return out;
}

std::size_t tree_depth(const PreconditionGroup& group) {
    std::size_t deepest = 0;
    for (const auto& child : group.children)
        if (!child.is_leaf()) deepest = std::max(deepest, tree_depth(child.group()));
    return deepest + 1;
}

bool evaluate_tree(const PreconditionGroup& group,
                   const std::function<bool(const Precondition&)>& leaf_truth) {
    const bool is_and = group.op == GroupOp::And;
    // Every child is evaluated; witness collection in the causal engine relies on it.
    bool acc = is_and;
    for (const auto& child : group.children) {
        const bool v = child.is_leaf() ? leaf_truth(child.leaf())
                                       : evaluate_tree(child.group(), leaf_truth);
        acc = is_and ? (acc && v) : (acc || v);
    }
    return acc;
}

void validate_tree(const PreconditionGroup& group) {
    if (group.children.empty())
        fail(ErrorCode::Validation, "precondition group must have at least one child");
    for (const auto& child : group.children) {
        if (!child.is_leaf()) {
            validate_tree(child.group());
            continue;
        }
        const auto& p = child.leaf();
        if (p.entity.empty() || p.property.empty())
            fail(ErrorCode::Validation, "precondition needs entity and property");
        if (is_ordering(p.comparator) && !std::holds_alternative<double>(p.value))
            fail(ErrorCode::Validation, "comparator '" +
                                            std::string(comparator_symbol(p.comparator)) +
                                            "' requires a numeric value on " + p.entity + "." +
                                            p.property);
    }
}

void validate_rule(const Rule& rule) {
    if (rule.id.empty()) fail(ErrorCode::Validation, "rule id must not be empty");
    if (rule.actions.empty())
        fail(ErrorCode::Validation, "rule '" + rule.id + "' must have at least one action");
    for (const auto& a : rule.actions)
        if (a.entity.empty() || a.action.empty())
            fail(ErrorCode::Validation, "rule '" + rule.id + "' has an incomplete action");
    validate_tree(rule.preconditions);
}

namespace {

std::vector<std::string> action_signature(const Rule& r) {
    std::vector<std::string> sig;
    sig.reserve(r.actions.size());
    for (const auto& a : r.actions)
        sig.push_back(a.entity + '\x1f' + a.action + '\x1f' +
                      (a.value ? std::to_string(a.value->index()) + scalar_to_string(*a.value)
                               : std::string("-")));
    std::sort(sig.begin(), sig.end());
    sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
    return sig;
}

} // namespace

bool is_duplicate(const Rule& a, const Rule& b) {
    return same_logic(a.preconditions, b.preconditions) && action_signature(a) == action_signature(b);
}

std::string_view event_kind_name(EventKind k) noexcept {
    switch (k) {
        case EventKind::PropertyChange: return "PROPERTY_CHANGE";
        case EventKind::ActionExecuted: return "ACTION_EXECUTED";
        case EventKind::RuleFired: return "RULE_FIRED";
    }
    return "?";
}

EventKind parse_event_kind(std::string_view name) {
    if (name == "PROPERTY_CHANGE") return EventKind::PropertyChange;
    if (name == "ACTION_EXECUTED") return EventKind::ActionExecuted;
    if (name == "RULE_FIRED") return EventKind::RuleFired;
    fail(ErrorCode::Validation, "unknown event kind '" + std::string(name) + "'");
}

std::string cause_to_string(const Cause& cause) {
    switch (cause.kind) {
        case CauseKind::None: return "none";
        case CauseKind::Api: return "api";
        case CauseKind::Remote: return "remote";
        case CauseKind::Rule: return "rule:" + cause.id;
        case CauseKind::User: return "user:" + cause.id;
    }
    return "none";
}

Cause parse_cause(std::string_view text) {
    if (text.empty() || text == "none") return Cause::none();
    if (text == "api") return Cause::api();
    if (text == "remote") return Cause::remote();
    if (text.starts_with("rule:") && text.size() > 5) return Cause::rule(std::string(text.substr(5)));
    if (text.starts_with("user:") && text.size() > 5) return Cause::user(std::string(text.substr(5)));
    fail(ErrorCode::Validation, "unknown cause tag '" + std::string(text) + "'");
}

void validate_event(const EventRecord& r) {
    if (r.entity.empty()) fail(ErrorCode::Validation, "event entity must not be empty");
    if (r.name.empty()) fail(ErrorCode::Validation, "event name must not be empty");
    if (r.kind == EventKind::PropertyChange && !r.value)
        fail(ErrorCode::Validation, "property change on " + r.entity + "." + r.name +
                                        " must carry a value");
    if ((r.caused_by.kind == CauseKind::Rule || r.caused_by.kind == CauseKind::User) &&
        r.caused_by.id.empty())
        fail(ErrorCode::Validation, "cause tag is missing its id");
}

std::string action_label(const EntityId& entity, const std::string& action) {
    return entity + "_" + action;
}

namespace {

template <class E, std::size_t N>
struct NameTable {
    std::array<std::pair<E, std::string_view>, N> rows;

    std::string_view name(E v) const noexcept {
        for (const auto& [e, n] : rows)
            if (e == v) return n;
        return "?";
    }

    E parse(std::string_view s, std::string_view what) const {
        for (const auto& [e, n] : rows)
            if (n == s) return e;
        fail(ErrorCode::Validation, "unknown " + std::string(what) + " '" + std::string(s) + "'");
    }
};

constexpr NameTable<ViewKind, 4> kViewNames{{{{ViewKind::Full, "FULL"},
                                              {ViewKind::Fact, "FACT"},
                                              {ViewKind::Rule, "RULE"},
                                              {ViewKind::Simplified, "SIMPLIFIED"}}}};
constexpr NameTable<UserState, 3> kStateNames{{{{UserState::Meeting, "MEETING"},
                                                {UserState::Break, "BREAK"},
                                                {UserState::Working, "WORKING"}}}};
constexpr NameTable<Occurrence, 3> kOccurrenceNames{{{{Occurrence::FirstTime, "FIRST_TIME"},
                                                      {Occurrence::SecondTime, "SECOND_TIME"},
                                                      {Occurrence::More, "MORE"}}}};
constexpr NameTable<Technicality, 3> kTechnicalityNames{
    {{{Technicality::Technical, "TECHNICAL"},
      {Technicality::Medium, "MEDIUM"},
      {Technicality::NonTechnical, "NON_TECHNICAL"}}}};
constexpr NameTable<Role, 3> kRoleNames{
    {{{Role::Owner, "OWNER"}, {Role::Coworker, "COWORKER"}, {Role::Guest, "GUEST"}}}};

} // namespace

std::string_view to_string(ViewKind v) noexcept { return kViewNames.name(v); }
std::string_view to_string(UserState v) noexcept { return kStateNames.name(v); }
std::string_view to_string(Occurrence v) noexcept { return kOccurrenceNames.name(v); }
std::string_view to_string(Technicality v) noexcept { return kTechnicalityNames.name(v); }
std::string_view to_string(Role v) noexcept { return kRoleNames.name(v); }

std::string_view view_label(ViewKind v) noexcept {
    switch (v) {
        case ViewKind::Full: return "Full";
        case ViewKind::Fact: return "Fact";
        case ViewKind::Rule: return "Rule";
        case ViewKind::Simplified: return "Simplified";
    }
    return "?";
}

ViewKind parse_view(std::string_view s) { return kViewNames.parse(s, "view"); }
UserState parse_user_state(std::string_view s) { return kStateNames.parse(s, "user state"); }
Occurrence parse_occurrence(std::string_view s) { return kOccurrenceNames.parse(s, "occurrence"); }
Technicality parse_technicality(std::string_view s) {
    return kTechnicalityNames.parse(s, "technicality");
}
Role parse_role(std::string_view s) { return kRoleNames.parse(s, "role"); }

} // namespace lucid

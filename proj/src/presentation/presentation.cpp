#include "lucid/presentation.hpp"

#include "lucid/errors.hpp"
#include "lucid/resources.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lucid {

namespace {

constexpr std::pair<Slot, std::string_view> kSlots[] = {
    {Slot::User, "user"},         {Slot::Action, "action"}, {Slot::RuleName, "rule_name"},
    {Slot::RuleDescription, "rule_description"}, {Slot::Owner, "owner"}, {Slot::Facts, "facts"},
};

[[noreturn]] void slot_error(const std::string& msg) { fail(ErrorCode::TemplateSlot, msg); }

std::optional<ConstructKind> backing_kind(Slot s) {
    switch (s) {
        case Slot::User: return std::nullopt;
        case Slot::Action:
        case Slot::RuleName: return ConstructKind::RuleFired;
        case Slot::RuleDescription: return ConstructKind::RuleDescription;
        case Slot::Owner: return ConstructKind::RuleOwner;
        case Slot::Facts: return ConstructKind::PreconditionFact;
    }
    return std::nullopt;
}

bool references(const std::vector<Slot>& slots, Slot s) {
    return std::find(slots.begin(), slots.end(), s) != slots.end();
}

void validate_view_template(ViewKind view, const std::string& tmpl) {
    const auto slots = template_slots(tmpl);
    const auto kinds = view_kinds(view);
    const std::string where = "template " + std::string(to_string(view));
    for (auto s : slots) {
        const auto need = backing_kind(s);
        if (need && std::find(kinds.begin(), kinds.end(), *need) == kinds.end())
            slot_error(where + " uses {" + std::string(slot_name(s)) +
                       "} which the view cannot fill");
    }
    if ((view == ViewKind::Full || view == ViewKind::Fact) && !references(slots, Slot::Facts))
        slot_error(where + " must reference {facts}");
    if (view == ViewKind::Simplified &&
        (references(slots, Slot::RuleName) || references(slots, Slot::RuleDescription)))
        slot_error(where + " must not reveal the rule name or description");
}

std::string fill(std::string_view tmpl, const std::function<std::string(Slot)>& value) {
    std::string out;
    out.reserve(tmpl.size() + 64);
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        out.append(tmpl.substr(pos, open - pos));
        const auto close = tmpl.find('}', open);
        const auto name = tmpl.substr(open + 1, close - open - 1);
        const auto it = std::find_if(std::begin(kSlots), std::end(kSlots),
                                     [&](const auto& row) { return row.second == name; });
        out += value(it->first);
        pos = close + 1;
    }
    return out;
}

std::string user_slot(const ContextSnapshot& s) {
    return s.user_name.empty() ? std::string("there") : s.user_name;
}

std::string name_or_id(const std::function<std::string(const std::string&)>& f,
                       const std::string& id) {
    if (!f) return id;
    auto n = f(id);
    return n.empty() ? id : n;
}

std::string action_slot(const EntityId& entity, const std::string& action,
                        const RenderContext& ctx) {
    if (!ctx.display_action_names) return action_label(entity, action);
    return name_or_id(ctx.entity_name, entity) + " " + action;
}

} // namespace

std::string_view slot_name(Slot s) noexcept {
    for (const auto& [slot, name] : kSlots)
        if (slot == s) return name;
    return "?";
}

std::vector<Slot> template_slots(std::string_view tmpl) {
    std::vector<Slot> out;
    std::size_t pos = 0;
    while ((pos = tmpl.find('{', pos)) != std::string_view::npos) {
        const auto close = tmpl.find('}', pos);
        if (close == std::string_view::npos) slot_error("unterminated slot in template");
        const auto name = tmpl.substr(pos + 1, close - pos - 1);
        const auto it = std::find_if(std::begin(kSlots), std::end(kSlots),
                                     [&](const auto& row) { return row.second == name; });
        if (it == std::end(kSlots)) slot_error("unknown slot {" + std::string(name) + "}");
        if (!references(out, it->first)) out.push_back(it->first);
        pos = close + 1;
    }
    return out;
}

TemplateSet TemplateSet::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) slot_error("template document must be an object");
    TemplateSet set;
    for (auto v : kAllViews) {
        const std::string key(to_string(v));
        if (!doc.contains(key) || !doc[key].is_string()) slot_error("missing template for " + key);
        set.views_[v] = doc[key].get<std::string>();
        validate_view_template(v, set.views_[v]);
    }
    if (!doc.contains("NO_CAUSE") || !doc["NO_CAUSE"].is_string())
        slot_error("missing template for NO_CAUSE");
    set.no_cause_ = doc["NO_CAUSE"].get<std::string>();
    for (auto s : template_slots(set.no_cause_))
        if (s != Slot::User && s != Slot::Action)
            slot_error("NO_CAUSE template may only use {user} and {action}");
    return set;
}

nlohmann::json TemplateSet::to_json() const {
    nlohmann::json j;
    for (const auto& [v, t] : views_) j[std::string(to_string(v))] = t;
    j["NO_CAUSE"] = no_cause_;
    return j;
}

TemplateSet default_templates() {
    return TemplateSet::from_json(nlohmann::json::parse(resources::english_templates_json()));
}

TemplateSet load_templates_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) slot_error("cannot read template file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        slot_error(std::string("template file does not parse: ") + e.what());
    }
    return TemplateSet::from_json(doc);
}

std::string join_facts(std::span<const std::string> phrases) {
    std::string out;
    for (std::size_t i = 0; i < phrases.size(); ++i) {
        if (i > 0) out += (i + 1 == phrases.size()) ? " and " : ", ";
        out += phrases[i];
    }
    return out;
}

std::string fact_phrase(const PreconditionFactPayload& fact, const RenderContext& ctx) {
    if (!fact.precondition.phrase.empty()) return fact.precondition.phrase;
    const auto& p = fact.precondition;
    const std::string observed =
        fact.record.value ? scalar_to_string(*fact.record.value) : scalar_to_string(p.value);
    return name_or_id(ctx.entity_name, p.entity) + " " + p.property + " is " + observed;
}

std::string render(std::span<const ExplanationConstruct> constructs, ViewKind view,
                   const ContextSnapshot& snapshot, const TemplateSet& templates,
                   const RenderContext& ctx) {
    const RuleFiredPayload* fired = nullptr;
    const RuleDescriptionPayload* description = nullptr;
    const RuleOwnerPayload* owner = nullptr;
    std::vector<std::string> facts;
    for (const auto& c : constructs) {
        switch (c.kind()) {
            case ConstructKind::RuleFired: fired = &c.as<RuleFiredPayload>(); break;
            case ConstructKind::RuleDescription:
                description = &c.as<RuleDescriptionPayload>();
                break;
            case ConstructKind::RuleOwner: owner = &c.as<RuleOwnerPayload>(); break;
            case ConstructKind::PreconditionFact:
                facts.push_back(fact_phrase(c.as<PreconditionFactPayload>(), ctx));
                break;
            case ConstructKind::ActionFact: break;
        }
    }

    const std::string& tmpl = templates.view_template(view);
    auto missing = [&](Slot s) -> std::string {
        slot_error("template " + std::string(to_string(view)) + " needs {" +
                   std::string(slot_name(s)) + "} but the view has no backing construct");
    };
    return fill(tmpl, [&](Slot s) -> std::string {
        switch (s) {
            case Slot::User: return user_slot(snapshot);
            case Slot::Action:
                if (!fired) return missing(s);
                return action_slot(fired->trigger.entity, fired->trigger.name, ctx);
            case Slot::RuleName:
                if (!fired) return missing(s);
                return fired->rule.name;
            case Slot::RuleDescription:
                if (!description) return missing(s);
                return description->description;
            case Slot::Owner:
                if (!owner) return missing(s);
                return name_or_id(ctx.user_name, owner->owner);
            case Slot::Facts:
                if (facts.empty()) return missing(s);
                return join_facts(facts);
        }
        return {};
    });
}

std::string render_no_cause(const Explanandum& explanandum, const ContextSnapshot& snapshot,
                            const TemplateSet& templates, const RenderContext& ctx) {
    return fill(templates.no_cause_template(), [&](Slot s) -> std::string {
        if (s == Slot::User) return user_slot(snapshot);
        return action_slot(explanandum.entity, explanandum.action, ctx);
    });
}

} // namespace lucid

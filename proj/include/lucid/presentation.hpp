#pragma once

// Template-based rendering of a projected view into English text.
//
// Slots: {user} {action} {rule_name} {rule_description} {owner} {facts}.
// {user} falls back to "there" when the snapshot has no name.

#include "lucid/domain.hpp"
#include "lucid/psi.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <span>
#include <string>

namespace lucid {

enum class Slot { User, Action, RuleName, RuleDescription, Owner, Facts };

std::string_view slot_name(Slot s) noexcept;

// Slots referenced by a template, in order of first appearance. Throws
// Error(TemplateSlot) on an unknown or unterminated slot.
std::vector<Slot> template_slots(std::string_view tmpl);

class TemplateSet {
public:
    // Keys FULL, FACT, RULE, SIMPLIFIED, NO_CAUSE. Validated on load.
    static TemplateSet from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    const std::string& view_template(ViewKind v) const { return views_.at(v); }
    const std::string& no_cause_template() const { return no_cause_; }

private:
    std::map<ViewKind, std::string> views_;
    std::string no_cause_;
};

TemplateSet default_templates();
TemplateSet load_templates_file(const std::string& path);

// Lookups from ids to display strings; unset members return the id itself.
struct RenderContext {
    std::function<std::string(const UserId&)> user_name;
    std::function<std::string(const EntityId&)> entity_name;
    // Describe actions as "TV mute" instead of the identifier "tv_mute".
    bool display_action_names = false;
};

// Joins phrases as "a", "a and b", "a, b and c".
std::string join_facts(std::span<const std::string> phrases);

// Human phrasing of one satisfied precondition.
std::string fact_phrase(const PreconditionFactPayload& fact, const RenderContext& ctx = {});

// Throws Error(TemplateSlot) when a slot the template needs has no backing construct.
std::string render(std::span<const ExplanationConstruct> constructs, ViewKind view,
                   const ContextSnapshot& snapshot, const TemplateSet& templates,
                   const RenderContext& ctx = {});

std::string render_no_cause(const Explanandum& explanandum, const ContextSnapshot& snapshot,
                            const TemplateSet& templates, const RenderContext& ctx = {});

} // namespace lucid

#pragma once

// Request orchestration: explanandum resolution, cause path, context
// snapshot, view inference, projection and rendering, plus the CRUD surface
// the HTTP layer exposes.

#include "lucid/automation.hpp"
#include "lucid/causal.hpp"
#include "lucid/context.hpp"
#include "lucid/event_log.hpp"
#include "lucid/presentation.hpp"
#include "lucid/psi.hpp"
#include "lucid/rule_table.hpp"
#include "lucid/view_inference.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

namespace lucid {

struct ServiceOptions {
    CausalOptions causal;
    // Fire rules on ingested property changes (live mode). The simulator
    // drives firing itself and leaves this off.
    bool automate = false;
    AutomationOptions automation;
    bool display_action_names = false;
};

// What-if adjustments for exploration; accepted only in debug mode and never recorded.
struct ContextOverrides {
    std::optional<std::string> user_name;
    std::optional<UserState> user_state;
    std::optional<Occurrence> occurrence;
    std::optional<Technicality> technicality;
    std::optional<Role> role;

    bool empty() const {
        return !user_name && !user_state && !occurrence && !technicality && !role;
    }
    void apply(ContextSnapshot& s) const;
};

struct ExplanationRequest {
    UserId user;
    // Both set, or both empty for "latest system action".
    std::optional<EntityId> entity;
    std::optional<std::string> action;
    std::optional<Timestamp> at;
    std::optional<Millis> lookback;
    bool debug = false;
    // Append to the explanation history (drives the occurrence context).
    bool record = true;
    ContextOverrides overrides;
};

struct ExplanationResult {
    Explanandum explanandum;
    EventRecord execution;
    // Empty when no rule caused the action.
    std::optional<ViewKind> view;
    std::string text;
    ContextSnapshot context;
    bool degraded = false;
    bool recorded = false;
    std::optional<CausePath> path;
    Psi psi;
    Psi projected;
    std::optional<InferenceTrace> inference;
};

nlohmann::json cause_path_to_json(const CausePath& path);
nlohmann::json construct_to_json(const ExplanationConstruct& c);
nlohmann::json snapshot_to_json(const ContextSnapshot& s);
// Structural payloads (cause path, psi, inference trace, context) only with `debug`.
nlohmann::json result_to_json(const ExplanationResult& r, bool debug);
ExplanationRequest request_from_json(const nlohmann::json& j);

struct PostResult {
    std::uint64_t seq = 0;
    // Records produced by automation, already ingested.
    std::vector<EventRecord> emitted;
};

struct UserRecord {
    UserProfile profile;
    std::vector<ScheduleEntry> schedule;
};

class ExplanationService {
public:
    struct Config {
        ServiceOptions options;
        std::optional<PolicySet> policies;   // default: shipped role-first preset
        std::optional<TemplateSet> templates; // default: shipped English templates
        // Unset stores are created in memory, or under data_dir when given.
        std::unique_ptr<EventLog> log;
        std::unique_ptr<HistoryStore> history;
        // Unset: an internal schedule provider fed through put_user().
        std::unique_ptr<StateProvider> state_provider;
        std::optional<std::filesystem::path> data_dir;
        std::function<Timestamp()> clock;
    };

    explicit ExplanationService(Config config);

    PostResult post_event(EventRecord record);
    std::vector<EventRecord> events(Timestamp from, Timestamp to) const;

    RuleVersion put_rule(const Rule& rule, std::optional<Timestamp> effective = std::nullopt);
    void delete_rule(const RuleId& id, std::optional<Timestamp> effective = std::nullopt);
    std::vector<Rule> rules() const;
    std::vector<RuleVersion> rule_versions() const;

    void put_user(const UserProfile& profile,
                  std::optional<std::vector<ScheduleEntry>> schedule = std::nullopt);
    std::vector<UserRecord> users() const;

    void put_device(const SmartObject& device);
    std::vector<SmartObject> devices() const;

    // Throws Error(UnknownUser | NothingToExplain | ActionNotFound | Validation), AmbiguousCauseError.
    ExplanationResult explain(const ExplanationRequest& request);

    // Backs GET /state, so one instance can act as another's context provider.
    UserState user_state(const UserId& user, Timestamp at);

    Timestamp now() const { return clock_(); }
    const ServiceOptions& options() const { return options_; }
    const PolicySet& policies() const { return policies_; }
    const TemplateSet& templates() const { return templates_; }
    const EventLog& log() const { return *log_; }
    std::size_t history_size() const { return history_->all().size(); }

private:
    RenderContext render_context() const;
    void persist_rules() const;
    void persist_users() const;
    void load_persisted();

    ServiceOptions options_;
    PolicySet policies_;
    TemplateSet templates_;
    std::function<Timestamp()> clock_;
    std::optional<std::filesystem::path> data_dir_;

    std::unique_ptr<EventLog> log_;
    std::unique_ptr<HistoryStore> history_;
    std::unique_ptr<StateProvider> provider_;
    ScheduleStateProvider* schedule_ = nullptr;

    RuleTable rules_;
    UserDirectory users_;
    std::unique_ptr<ContextManager> context_;

    mutable std::mutex devices_mutex_;
    std::map<EntityId, SmartObject> devices_;

    // Serializes ingest + automation, and per-user explanation history appends.
    std::mutex ingest_mutex_;
    std::mutex explain_mutex_;
    RuleRunner runner_;
};

} // namespace lucid

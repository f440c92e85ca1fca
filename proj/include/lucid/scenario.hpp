#pragma once

// Deterministic replay of a scripted smart environment against an
// explanation engine, with expected-output assertions per query.

#include "lucid/automation.hpp"
#include "lucid/context.hpp"
#include "lucid/domain.hpp"
#include "lucid/service.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lucid::sim {

struct ScenarioUser {
    UserProfile profile;
    std::vector<ScheduleEntry> schedule;
};

struct ScriptedEvent {
    EntityId entity;
    EventKind kind = EventKind::PropertyChange;
    std::string name;
    std::optional<Scalar> value;
    Cause caused_by;
};

struct Expectation {
    std::optional<std::string> view; // "FACT", ..., or "NONE" for the no-cause rendering
    std::optional<std::string> text;
    std::optional<std::string> error; // error code name, e.g. "NOTHING_TO_EXPLAIN"
};

struct ScriptedQuery {
    // Request fields as written in the file; "at" is taken from the timeline item.
    nlohmann::json request;
    std::optional<Expectation> expect;
};

struct TimelineItem {
    Timestamp at;
    std::variant<ScriptedEvent, ScriptedQuery> step;

    bool is_query() const { return std::holds_alternative<ScriptedQuery>(step); }
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<SmartObject> devices;
    std::vector<ScenarioUser> users;
    std::vector<Rule> rules;
    std::vector<TimelineItem> timeline;
};

// Parsing and validation both throw Error(ScenarioValidation) with a path to
// the offending element, e.g. "timeline[4].query: unknown user 'eve'".
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const Scenario& s);
void validate_scenario(const Scenario& s);

// The shipped canonical fixture.
Scenario tv_mute_scenario();

struct QueryOutcome {
    std::optional<ViewKind> view;
    std::string text;
    std::optional<std::string> error;
    std::string message;
};

// Where a scenario is replayed: an in-process service or a live HTTP instance.
class Engine {
public:
    virtual ~Engine() = default;
    virtual std::string name() const = 0;
    // Loads devices, users with schedules, and rules valid from `rules_from`.
    virtual void setup(const Scenario& s, Timestamp rules_from) = 0;
    virtual void ingest(const EventRecord& record) = 0;
    virtual QueryOutcome explain(const nlohmann::json& request) = 0;
    virtual std::vector<EventRecord> events() = 0;
};

class EmbeddedEngine final : public Engine {
public:
    explicit EmbeddedEngine(ServiceOptions options = {}, std::optional<PolicySet> policies = std::nullopt,
                            std::optional<TemplateSet> templates = std::nullopt);

    std::string name() const override { return "embedded"; }
    void setup(const Scenario& s, Timestamp rules_from) override;
    void ingest(const EventRecord& record) override;
    QueryOutcome explain(const nlohmann::json& request) override;
    std::vector<EventRecord> events() override;

    ExplanationService& service() { return *service_; }

private:
    Timestamp now_{};
    std::unique_ptr<ExplanationService> service_;
};

// Talks to `lucid serve`. The server must run without --automate, since the
// simulator fires rules itself and posts the resulting records.
class HttpEngine final : public Engine {
public:
    explicit HttpEngine(std::string base_url, Millis timeout = Millis{5000});
    ~HttpEngine() override;

    std::string name() const override { return "http " + base_url_; }
    void setup(const Scenario& s, Timestamp rules_from) override;
    void ingest(const EventRecord& record) override;
    QueryOutcome explain(const nlohmann::json& request) override;
    std::vector<EventRecord> events() override;

private:
    struct Impl;
    std::string base_url_;
    std::unique_ptr<Impl> impl_;
};

struct SimOptions {
    AutomationOptions automation;
};

struct FiringReport {
    RuleId rule;
    Timestamp at;
    std::vector<EventRecord> emitted;
};

struct QueryReport {
    std::size_t index = 0; // position in the timeline
    Timestamp at;
    nlohmann::json request;
    QueryOutcome outcome;
    std::optional<Expectation> expect;
    std::vector<std::string> mismatches;

    bool passed() const { return mismatches.empty(); }
};

struct RunReport {
    std::string scenario;
    std::string engine;
    std::size_t events_ingested = 0;
    std::vector<FiringReport> firings;
    std::vector<QueryReport> queries;

    std::size_t passed() const;
    std::size_t failed() const { return queries.size() - passed(); }
    bool ok() const { return failed() == 0; }
};

// Replays the timeline in order. External events go to the engine at their
// instant; after each property change the rules are evaluated against the
// simulator's own copy of the log and any firings are delivered at their
// emission instants, before later timeline items. Queries never abort the run.
RunReport run(const Scenario& s, Engine& engine, SimOptions options = {});

std::string report_to_text(const RunReport& r);
nlohmann::json report_to_json(const RunReport& r);

} // namespace lucid::sim

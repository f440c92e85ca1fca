#include "lucid/scenario.hpp"

#include "lucid/codec.hpp"
#include "lucid/errors.hpp"
#include "lucid/resources.hpp"

#include <httplib.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lucid::sim {

using nlohmann::json;

namespace {

template <class F>
auto at_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ScenarioValidation) throw;
        throw Error(ErrorCode::ScenarioValidation, path + ": " + e.what());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ScenarioValidation, path + ": " + e.what());
    }
}

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ScenarioValidation, path + ": " + what);
}

const json& array_field(const json& doc, const char* name) {
    static const json empty = json::array();
    if (!doc.contains(name)) return empty;
    if (!doc[name].is_array()) invalid(name, "must be an array");
    return doc[name];
}

ScriptedEvent event_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::Validation, "event must be an object");
    ScriptedEvent e;
    e.entity = codec::require_string(j, "entity");
    e.name = codec::require_string(j, "name");
    e.kind = parse_event_kind(codec::optional_string(j, "kind", "PROPERTY_CHANGE"));
    if (j.contains("value") && !j["value"].is_null()) e.value = codec::scalar_from_json(j["value"], "value");
    e.caused_by = parse_cause(codec::optional_string(j, "caused_by", "none"));
    return e;
}

json event_to_json(const ScriptedEvent& e) {
    json j{{"entity", e.entity}, {"name", e.name}};
    if (e.kind != EventKind::PropertyChange) j["kind"] = std::string(event_kind_name(e.kind));
    j["value"] = e.value ? codec::scalar_to_json(*e.value) : json();
    if (!(e.caused_by == Cause::none())) j["caused_by"] = cause_to_string(e.caused_by);
    return j;
}

Expectation expectation_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::Validation, "expect must be an object");
    Expectation x;
    if (j.contains("view")) {
        const std::string v = codec::require_string(j, "view");
        if (v != "NONE") parse_view(v);
        x.view = v;
    }
    if (j.contains("text")) x.text = codec::require_string(j, "text");
    if (j.contains("error")) x.error = codec::require_string(j, "error");
    return x;
}

json expectation_to_json(const Expectation& x) {
    json j = json::object();
    if (x.view) j["view"] = *x.view;
    if (x.text) j["text"] = *x.text;
    if (x.error) j["error"] = *x.error;
    return j;
}

EventRecord to_record(const ScriptedEvent& e, Timestamp at) {
    return {at, e.entity, e.kind, e.name, e.value, e.caused_by, 0};
}

std::string opt_field(const json& j, const char* name) {
    return j.contains(name) && j[name].is_string() ? j[name].get<std::string>() : std::string();
}

} // namespace

Scenario scenario_from_json(const json& doc) {
    if (!doc.is_object()) invalid("scenario", "must be a JSON object");
    Scenario s;
    s.name = at_path("name", [&] { return codec::optional_string(doc, "name", "unnamed"); });
    s.description = at_path("description", [&] { return codec::optional_string(doc, "description"); });

    const auto& devices = array_field(doc, "devices");
    for (std::size_t i = 0; i < devices.size(); ++i)
        s.devices.push_back(at_path("devices[" + std::to_string(i) + "]",
                                    [&] { return codec::object_from_json(devices[i]); }));

    const auto& users = array_field(doc, "users");
    for (std::size_t i = 0; i < users.size(); ++i) {
        s.users.push_back(at_path("users[" + std::to_string(i) + "]", [&] {
            ScenarioUser u{profile_from_json(users[i]), {}};
            if (users[i].contains("schedule")) u.schedule = schedule_from_json(users[i]["schedule"]);
            return u;
        }));
    }

    const auto& rules = array_field(doc, "rules");
    for (std::size_t i = 0; i < rules.size(); ++i)
        s.rules.push_back(at_path("rules[" + std::to_string(i) + "]",
                                  [&] { return codec::rule_from_json(rules[i]); }));

    const auto& timeline = array_field(doc, "timeline");
    for (std::size_t i = 0; i < timeline.size(); ++i) {
        const std::string path = "timeline[" + std::to_string(i) + "]";
        s.timeline.push_back(at_path(path, [&] {
            const json& item = timeline[i];
            if (!item.is_object()) fail(ErrorCode::Validation, "must be an object");
            TimelineItem t{codec::require_time(item, "at"), ScriptedEvent{}};
            const bool has_event = item.contains("event"), has_query = item.contains("query");
            if (has_event == has_query) fail(ErrorCode::Validation, "needs exactly one of 'event' or 'query'");
            if (has_event) {
                if (item.contains("expect")) fail(ErrorCode::Validation, "'expect' belongs to queries");
                t.step = event_from_json(item["event"]);
            } else {
                ScriptedQuery q;
                q.request = item["query"];
                if (!q.request.is_object()) fail(ErrorCode::Validation, "query must be an object");
                if (q.request.contains("at")) fail(ErrorCode::Validation, "query time comes from 'at'");
                request_from_json(q.request); // shape check only
                if (item.contains("expect")) q.expect = expectation_from_json(item["expect"]);
                t.step = std::move(q);
            }
            return t;
        }));
    }
    validate_scenario(s);
    return s;
}

Scenario load_scenario(std::string_view text) {
    return scenario_from_json(at_path("scenario", [&] { return codec::parse_document(text, "scenario"); }));
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) invalid(path.string(), "cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

Scenario tv_mute_scenario() { return load_scenario(resources::tv_mute_scenario_json()); }

json scenario_to_json(const Scenario& s) {
    json devices = json::array(), users = json::array(), rules = json::array(), timeline = json::array();
    for (const auto& d : s.devices) devices.push_back(codec::object_to_json(d));
    for (const auto& u : s.users) {
        json j = profile_to_json(u.profile);
        j["schedule"] = schedule_to_json(u.schedule);
        users.push_back(std::move(j));
    }
    for (const auto& r : s.rules) rules.push_back(codec::rule_to_json(r));
    for (const auto& t : s.timeline) {
        json j{{"at", format_iso8601(t.at)}};
        if (const auto* e = std::get_if<ScriptedEvent>(&t.step)) {
            j["event"] = event_to_json(*e);
        } else {
            const auto& q = std::get<ScriptedQuery>(t.step);
            j["query"] = q.request;
            if (q.expect) j["expect"] = expectation_to_json(*q.expect);
        }
        timeline.push_back(std::move(j));
    }
    return {{"name", s.name},      {"description", s.description}, {"devices", devices},
            {"users", users},      {"rules", rules},                {"timeline", timeline}};
}

void validate_scenario(const Scenario& s) {
    std::map<EntityId, const SmartObject*> devices;
    for (std::size_t i = 0; i < s.devices.size(); ++i)
        if (!devices.emplace(s.devices[i].id, &s.devices[i]).second)
            invalid("devices[" + std::to_string(i) + "]", "duplicate device id '" + s.devices[i].id + "'");

    std::set<UserId> users;
    for (std::size_t i = 0; i < s.users.size(); ++i) {
        const std::string path = "users[" + std::to_string(i) + "]";
        if (s.users[i].profile.id.empty()) invalid(path, "empty user id");
        if (!users.insert(s.users[i].profile.id).second)
            invalid(path, "duplicate user id '" + s.users[i].profile.id + "'");
        for (const auto& e : s.users[i].schedule)
            if (e.to <= e.from) invalid(path + ".schedule", "interval must have from < to");
    }

    auto check_property = [&](const std::string& path, const EntityId& entity, const std::string& property) {
        const auto it = devices.find(entity);
        if (it == devices.end()) invalid(path, "unknown device '" + entity + "'");
        const auto& props = it->second->properties;
        if (!props.empty() && !props.count(property))
            invalid(path, "device '" + entity + "' has no property '" + property + "'");
    };
    auto check_action = [&](const std::string& path, const EntityId& entity, const std::string& action) {
        const auto it = devices.find(entity);
        if (it == devices.end()) invalid(path, "unknown device '" + entity + "'");
        const auto& acts = it->second->actions;
        if (!acts.empty() && !acts.count(action))
            invalid(path, "device '" + entity + "' has no action '" + action + "'");
    };

    std::set<RuleId> rule_ids;
    for (std::size_t i = 0; i < s.rules.size(); ++i) {
        const std::string path = "rules[" + std::to_string(i) + "]";
        const Rule& r = s.rules[i];
        at_path(path, [&] { validate_rule(r); return 0; });
        if (!rule_ids.insert(r.id).second) invalid(path, "duplicate rule id '" + r.id + "'");
        if (!users.count(r.owner)) invalid(path, "owner '" + r.owner + "' is not a defined user");
        for (const auto& leaf : collect_leaves(r.preconditions))
            check_property(path + ".preconditions", leaf.entity, leaf.property);
        for (const auto& a : r.actions) check_action(path + ".actions", a.entity, a.action);
        for (std::size_t k = 0; k < i; ++k)
            if (is_duplicate(s.rules[k], r))
                invalid(path, "duplicates rule '" + s.rules[k].id + "'");
    }

    for (std::size_t i = 0; i < s.timeline.size(); ++i) {
        const std::string path = "timeline[" + std::to_string(i) + "]";
        const auto& t = s.timeline[i];
        if (i > 0 && t.at <= s.timeline[i - 1].at) invalid(path, "timeline must be strictly time-ordered");
        if (const auto* e = std::get_if<ScriptedEvent>(&t.step)) {
            at_path(path + ".event", [&] { validate_event(to_record(*e, t.at)); return 0; });
            if (e->kind == EventKind::PropertyChange)
                check_property(path + ".event", e->entity, e->name);
            else if (e->kind == EventKind::ActionExecuted)
                check_action(path + ".event", e->entity, e->name);
            else if (!devices.count(e->entity))
                invalid(path + ".event", "unknown device '" + e->entity + "'");
            if (e->caused_by.kind == CauseKind::User && !users.count(e->caused_by.id))
                invalid(path + ".event", "caused_by names unknown user '" + e->caused_by.id + "'");
            if (e->caused_by.kind == CauseKind::Rule && !rule_ids.count(e->caused_by.id))
                invalid(path + ".event", "caused_by names unknown rule '" + e->caused_by.id + "'");
        } else {
            const auto& q = std::get<ScriptedQuery>(t.step);
            const auto req = at_path(path + ".query", [&] { return request_from_json(q.request); });
            if (!users.count(req.user)) invalid(path + ".query", "unknown user '" + req.user + "'");
            if (req.entity.has_value() != req.action.has_value())
                invalid(path + ".query", "entity and action must be given together");
            if (req.entity) check_action(path + ".query", *req.entity, *req.action);
        }
    }
}

// --- engines ---------------------------------------------------------------

EmbeddedEngine::EmbeddedEngine(ServiceOptions options, std::optional<PolicySet> policies,
                               std::optional<TemplateSet> templates) {
    options.automate = false;
    ExplanationService::Config config;
    config.options = options;
    config.policies = std::move(policies);
    config.templates = std::move(templates);
    config.clock = [this] { return now_; };
    service_ = std::make_unique<ExplanationService>(std::move(config));
}

void EmbeddedEngine::setup(const Scenario& s, Timestamp rules_from) {
    now_ = rules_from;
    for (const auto& d : s.devices) service_->put_device(d);
    for (const auto& u : s.users) service_->put_user(u.profile, u.schedule);
    for (const auto& r : s.rules) service_->put_rule(r, rules_from);
}

void EmbeddedEngine::ingest(const EventRecord& record) {
    now_ = record.ts;
    service_->post_event(record);
}

QueryOutcome EmbeddedEngine::explain(const json& request) {
    QueryOutcome out;
    try {
        const auto req = request_from_json(request);
        if (req.at) now_ = *req.at;
        const auto result = service_->explain(req);
        out.view = result.view;
        out.text = result.text;
    } catch (const Error& e) {
        out.error = std::string(code_name(e.code()));
        out.message = e.what();
    }
    return out;
}

std::vector<EventRecord> EmbeddedEngine::events() { return service_->log().all(); }

struct HttpEngine::Impl {
    httplib::Client client;
    explicit Impl(const std::string& url) : client(url) {}

    json call(const char* method, const std::string& path, const json* body, int* status = nullptr) {
        httplib::Result res = [&] {
            const std::string payload = body ? body->dump() : std::string();
            if (std::string_view(method) == "PUT") return client.Put(path, payload, "application/json");
            if (std::string_view(method) == "POST") return client.Post(path, payload, "application/json");
            return client.Get(path);
        }();
        if (!res)
            fail(ErrorCode::ProviderUnavailable,
                 std::string(method) + " " + path + ": " + httplib::to_string(res.error()));
        json parsed = json::parse(res->body, nullptr, false);
        if (status) {
            *status = res->status;
        } else if (res->status / 100 != 2) {
            fail(ErrorCode::ProviderUnavailable, std::string(method) + " " + path + " -> " +
                                                     std::to_string(res->status) + " " + res->body);
        }
        return parsed;
    }
};

HttpEngine::HttpEngine(std::string base_url, Millis timeout)
    : base_url_(std::move(base_url)), impl_(std::make_unique<Impl>(base_url_)) {
    const auto sec = static_cast<time_t>(timeout.count() / 1000);
    const auto usec = static_cast<time_t>((timeout.count() % 1000) * 1000);
    impl_->client.set_connection_timeout(sec, usec);
    impl_->client.set_read_timeout(sec, usec);
    impl_->client.set_write_timeout(sec, usec);
}

HttpEngine::~HttpEngine() = default;

void HttpEngine::setup(const Scenario& s, Timestamp rules_from) {
    json devices = json::array(), users = json::array(), rules = json::array();
    for (const auto& d : s.devices) devices.push_back(codec::object_to_json(d));
    for (const auto& u : s.users) {
        json j = profile_to_json(u.profile);
        j["schedule"] = schedule_to_json(u.schedule);
        users.push_back(std::move(j));
    }
    for (const auto& r : s.rules) rules.push_back(codec::rule_to_json(r));
    if (!devices.empty()) impl_->call("PUT", "/devices", &devices);
    if (!users.empty()) impl_->call("PUT", "/users", &users);
    if (!rules.empty()) {
        const json body{{"rules", rules}, {"valid_from", format_iso8601(rules_from)}};
        impl_->call("PUT", "/rules", &body);
    }
}

void HttpEngine::ingest(const EventRecord& record) {
    const json body = codec::event_to_json(record);
    impl_->call("POST", "/events", &body);
}

QueryOutcome HttpEngine::explain(const json& request) {
    QueryOutcome out;
    int status = 0;
    json res;
    try {
        res = impl_->call("POST", "/explanations", &request, &status);
    } catch (const Error& e) {
        out.error = std::string(code_name(e.code()));
        out.message = e.what();
        return out;
    }
    if (status == 200 && res.is_object()) {
        if (res.contains("view") && res["view"].is_string()) out.view = parse_view(res["view"].get<std::string>());
        out.text = opt_field(res, "text");
    } else {
        out.error = res.is_object() && res.contains("code") ? opt_field(res, "code") : "HTTP_" + std::to_string(status);
        out.message = res.is_object() ? opt_field(res, "message") : std::string();
    }
    return out;
}

std::vector<EventRecord> HttpEngine::events() {
    const json res = impl_->call("GET", "/events", nullptr);
    std::vector<EventRecord> out;
    for (const auto& j : res) {
        auto r = codec::event_from_json(j);
        r.seq = j.value("seq", std::uint64_t{0});
        out.push_back(std::move(r));
    }
    return out;
}

// --- replay ----------------------------------------------------------------

std::size_t RunReport::passed() const {
    std::size_t n = 0;
    for (const auto& q : queries) n += q.passed();
    return n;
}

namespace {

std::vector<std::string> compare(const QueryOutcome& got, const Expectation& want) {
    std::vector<std::string> miss;
    if (want.error) {
        if (got.error != want.error)
            miss.push_back("expected error " + *want.error + ", got " + (got.error ? *got.error : "success"));
        return miss;
    }
    if (got.error) {
        miss.push_back("unexpected error " + *got.error + ": " + got.message);
        return miss;
    }
    const std::string view = got.view ? std::string(to_string(*got.view)) : "NONE";
    if (want.view && *want.view != view) miss.push_back("view: expected " + *want.view + ", got " + view);
    if (want.text && *want.text != got.text)
        miss.push_back("text: expected \"" + *want.text + "\", got \"" + got.text + "\"");
    return miss;
}

} // namespace

RunReport run(const Scenario& s, Engine& engine, SimOptions options) {
    validate_scenario(s);
    RunReport report;
    report.scenario = s.name;
    report.engine = engine.name();

    const Timestamp rules_from = s.timeline.empty() ? Timestamp{} : s.timeline.front().at;
    engine.setup(s, rules_from);

    // The simulator keeps its own copy of the log, so rule evaluation does
    // not depend on what the engine exposes.
    EventLog mirror;
    RuleRunner runner(options.automation);
    std::multimap<Timestamp, EventRecord> pending;

    auto deliver = [&](const EventRecord& r) {
        mirror.ingest(r);
        engine.ingest(r);
        ++report.events_ingested;
        if (r.kind != EventKind::PropertyChange) return;
        for (auto& f : runner.step(reader_for(mirror), s.rules, r.ts)) {
            for (const auto& e : f.emitted) pending.emplace(e.ts, e);
            report.firings.push_back({f.rule, f.at, std::move(f.emitted)});
        }
    };
    auto flush_until = [&](std::optional<Timestamp> limit) {
        while (!pending.empty() && (!limit || pending.begin()->first <= *limit)) {
            const EventRecord r = pending.begin()->second;
            pending.erase(pending.begin());
            deliver(r);
        }
    };

    for (std::size_t i = 0; i < s.timeline.size(); ++i) {
        const auto& item = s.timeline[i];
        flush_until(item.at);
        if (const auto* e = std::get_if<ScriptedEvent>(&item.step)) {
            deliver(to_record(*e, item.at));
            flush_until(item.at);
            continue;
        }
        const auto& q = std::get<ScriptedQuery>(item.step);
        QueryReport qr;
        qr.index = i;
        qr.at = item.at;
        qr.request = q.request;
        qr.request["at"] = format_iso8601(item.at);
        qr.expect = q.expect;
        qr.outcome = engine.explain(qr.request);
        if (q.expect) qr.mismatches = compare(qr.outcome, *q.expect);
        report.queries.push_back(std::move(qr));
    }
    flush_until(std::nullopt);
    return report;
}

std::string report_to_text(const RunReport& r) {
    std::ostringstream out;
    out << "scenario " << r.scenario << " (engine " << r.engine << ")\n";
    out << "events ingested: " << r.events_ingested << ", rule firings: " << r.firings.size() << "\n";
    for (const auto& f : r.firings) {
        out << "  " << format_iso8601(f.at) << "  " << f.rule << " fired ->";
        for (const auto& e : f.emitted)
            if (e.kind == EventKind::ActionExecuted) out << " " << action_label(e.entity, e.name);
        out << "\n";
    }
    std::size_t n = 0;
    for (const auto& q : r.queries) {
        ++n;
        const std::string entity = opt_field(q.request, "entity"), action = opt_field(q.request, "action");
        out << "query " << n << "/" << r.queries.size() << " @ " << format_iso8601(q.at)
            << " user=" << opt_field(q.request, "user") << " "
            << (entity.empty() ? std::string("latest") : action_label(entity, action)) << ": "
            << (!q.expect ? "RAN" : q.passed() ? "PASS" : "FAIL") << "\n";
        if (q.outcome.error) {
            out << "  error " << *q.outcome.error << ": " << q.outcome.message << "\n";
        } else {
            out << "  view " << (q.outcome.view ? std::string(to_string(*q.outcome.view)) : "NONE") << "\n";
            out << "  text " << q.outcome.text << "\n";
        }
        for (const auto& m : q.mismatches) out << "  mismatch " << m << "\n";
    }
    out << "result: " << r.passed() << "/" << r.queries.size() << " queries passed\n";
    return out.str();
}

json report_to_json(const RunReport& r) {
    json firings = json::array(), queries = json::array();
    for (const auto& f : r.firings) {
        json emitted = json::array();
        for (const auto& e : f.emitted) emitted.push_back(codec::event_to_json(e));
        firings.push_back({{"rule", f.rule}, {"at", format_iso8601(f.at)}, {"emitted", emitted}});
    }
    for (const auto& q : r.queries) {
        json j{{"index", q.index}, {"at", format_iso8601(q.at)}, {"request", q.request}};
        j["view"] = q.outcome.view ? json(std::string(to_string(*q.outcome.view))) : json();
        j["text"] = q.outcome.text;
        j["error"] = q.outcome.error ? json(*q.outcome.error) : json();
        if (q.outcome.error) j["message"] = q.outcome.message;
        j["expect"] = q.expect ? expectation_to_json(*q.expect) : json();
        j["passed"] = q.passed();
        j["mismatches"] = q.mismatches;
        queries.push_back(std::move(j));
    }
    return {{"scenario", r.scenario},
            {"engine", r.engine},
            {"events_ingested", r.events_ingested},
            {"firings", firings},
            {"queries", queries},
            {"passed", r.passed()},
            {"failed", r.failed()},
            {"ok", r.ok()}};
}

} // namespace lucid::sim

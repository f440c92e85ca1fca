#include "lucid/service.hpp"

#include "lucid/codec.hpp"
#include "lucid/errors.hpp"

#include <fstream>
#include <sstream>

namespace lucid {

using nlohmann::json;

void ContextOverrides::apply(ContextSnapshot& s) const {
    if (user_name) s.user_name = *user_name;
    if (user_state) s.user_state = *user_state;
    if (occurrence) s.occurrence = *occurrence;
    if (technicality) s.technicality = *technicality;
    if (role) s.role = *role;
}

namespace {

json record_json(const EventRecord& r) {
    json j = codec::event_to_json(r);
    j["seq"] = r.seq;
    return j;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << content;
        if (!out) fail(ErrorCode::Storage, "write to " + tmp + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::Storage, "rename " + tmp + ": " + ec.message());
}

std::optional<json> read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Storage, path.string() + ": " + e.what());
    }
}

} // namespace

json cause_path_to_json(const CausePath& p) {
    json facts = json::array();
    for (const auto& f : p.satisfying_events)
        facts.push_back({{"precondition", codec::precondition_to_json(f.precondition)},
                         {"record", record_json(f.record)}});
    json actions = json::array();
    for (const auto& a : p.sibling_actions)
        actions.push_back({{"action", codec::action_to_json(a.action)}, {"record", record_json(a.record)}});
    json j{{"fired_rule", p.fired_rule},
           {"fired_at", format_iso8601(p.fired_at)},
           {"execution", record_json(p.execution)},
           {"satisfying_events", std::move(facts)},
           {"sibling_actions", std::move(actions)}};
    j["log_agrees"] = p.log_agrees ? json(*p.log_agrees) : json();
    return j;
}

json construct_to_json(const ExplanationConstruct& c) {
    json j{{"category", std::string(to_string(c.category()))},
           {"kind", std::string(to_string(c.kind()))}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, RuleFiredPayload>) {
                j["rule"] = p.rule.id;
                j["rule_name"] = p.rule.name;
                j["trigger"] = record_json(p.trigger);
            } else if constexpr (std::is_same_v<T, PreconditionFactPayload>) {
                j["precondition"] = codec::precondition_to_json(p.precondition);
                j["record"] = record_json(p.record);
            } else if constexpr (std::is_same_v<T, ActionFactPayload>) {
                j["action"] = codec::action_to_json(p.action);
                j["record"] = record_json(p.record);
            } else if constexpr (std::is_same_v<T, RuleDescriptionPayload>) {
                j["rule"] = p.rule;
                j["name"] = p.name;
                j["description"] = p.description;
            } else {
                j["rule"] = p.rule;
                j["owner"] = p.owner;
            }
        },
        c.payload());
    return j;
}

json snapshot_to_json(const ContextSnapshot& s) {
    return {{"userName", s.user_name},
            {"userState", std::string(to_string(s.user_state))},
            {"occurrence", std::string(to_string(s.occurrence))},
            {"technicality", std::string(to_string(s.technicality))},
            {"role", std::string(to_string(s.role))}};
}

json result_to_json(const ExplanationResult& r, bool debug) {
    json j;
    j["view"] = r.view ? json(std::string(to_string(*r.view))) : json();
    j["view_label"] = r.view ? json(std::string(view_label(*r.view))) : json();
    j["text"] = r.text;
    j["explanandum"] = {{"entity", r.explanandum.entity},
                        {"action", r.explanandum.action},
                        {"label", action_label(r.explanandum.entity, r.explanandum.action)},
                        {"requested_at", format_iso8601(r.explanandum.requested_at)},
                        {"executed_at", format_iso8601(r.execution.ts)},
                        {"user", r.explanandum.explainee}};
    j["degraded"] = r.degraded;
    j["recorded"] = r.recorded;
    if (!debug) return j;

    j["context"] = snapshot_to_json(r.context);
    j["cause_path"] = r.path ? cause_path_to_json(*r.path) : json();
    json psi = json::array();
    for (const auto& c : r.psi) psi.push_back(construct_to_json(c));
    j["psi"] = std::move(psi);
    json projected = json::array();
    for (const auto& c : r.projected) projected.push_back(std::string(to_string(c.kind())));
    j["projected_kinds"] = std::move(projected);
    if (r.inference) {
        json steps = json::array();
        for (const auto& s : r.inference->steps)
            steps.push_back({{"attribute", std::string(to_string(s.attribute))},
                             {"suitable", s.suitable.to_string()},
                             {"applied", s.applied},
                             {"running", s.running.to_string()}});
        j["inference"] = std::move(steps);
    }
    return j;
}

ExplanationRequest request_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::Validation, "explanation request must be an object");
    ExplanationRequest r;
    r.user = codec::require_string(j, "user");
    if (j.contains("entity") && !j["entity"].is_null()) r.entity = codec::require_string(j, "entity");
    if (j.contains("action") && !j["action"].is_null()) r.action = codec::require_string(j, "action");
    if (j.contains("at") && !j["at"].is_null()) r.at = codec::require_time(j, "at");
    if (j.contains("lookback_minutes")) {
        const auto& m = j["lookback_minutes"];
        if (!m.is_number() || m.get<double>() <= 0)
            fail(ErrorCode::Validation, "lookback_minutes must be a positive number");
        r.lookback = Millis{static_cast<std::int64_t>(m.get<double>() * 60'000)};
    }
    if (j.contains("debug")) r.debug = j["debug"].get<bool>();
    if (j.contains("record")) r.record = j["record"].get<bool>();
    if (j.contains("context_overrides") && !j["context_overrides"].is_null()) {
        const auto& o = j["context_overrides"];
        if (!o.is_object()) fail(ErrorCode::Validation, "context_overrides must be an object");
        if (o.contains("userName")) r.overrides.user_name = codec::require_string(o, "userName");
        if (o.contains("userState"))
            r.overrides.user_state = parse_user_state(codec::require_string(o, "userState"));
        if (o.contains("occurrence"))
            r.overrides.occurrence = parse_occurrence(codec::require_string(o, "occurrence"));
        if (o.contains("technicality"))
            r.overrides.technicality = parse_technicality(codec::require_string(o, "technicality"));
        if (o.contains("role")) r.overrides.role = parse_role(codec::require_string(o, "role"));
    }
    return r;
}

ExplanationService::ExplanationService(Config config)
    : options_(config.options),
      policies_(config.policies ? std::move(*config.policies) : default_policies()),
      templates_(config.templates ? std::move(*config.templates) : default_templates()),
      clock_(config.clock ? std::move(config.clock) : std::function<Timestamp()>(now_utc)),
      data_dir_(std::move(config.data_dir)),
      log_(std::move(config.log)),
      history_(std::move(config.history)),
      provider_(std::move(config.state_provider)),
      runner_(config.options.automation) {
    if (data_dir_) std::filesystem::create_directories(*data_dir_);
    if (!log_) {
        log_ = data_dir_ ? std::make_unique<EventLog>(
                               std::make_unique<FileEventStore>(*data_dir_ / "events.ndjson"))
                         : std::make_unique<EventLog>();
    }
    if (!history_) {
        if (data_dir_)
            history_ = std::make_unique<FileHistoryStore>(*data_dir_ / "history.ndjson");
        else
            history_ = std::make_unique<MemoryHistoryStore>();
    }
    if (!provider_) {
        auto schedule = std::make_unique<ScheduleStateProvider>();
        schedule_ = schedule.get();
        provider_ = std::move(schedule);
    }
    context_ = std::make_unique<ContextManager>(users_, *history_, provider_.get());
    load_persisted();
}

void ExplanationService::load_persisted() {
    if (!data_dir_) return;
    if (auto rules = read_json_file(*data_dir_ / "rules.json")) rules_.load_history(*rules);
    if (auto users = read_json_file(*data_dir_ / "users.json")) {
        for (const auto& u : *users) {
            users_.put(profile_from_json(u));
            if (schedule_ && u.contains("schedule"))
                schedule_->replace(u["id"].get<std::string>(), schedule_from_json(u["schedule"]));
        }
    }
    if (auto devices = read_json_file(*data_dir_ / "devices.json"))
        for (const auto& d : *devices) devices_[d["id"].get<std::string>()] = codec::object_from_json(d);
}

void ExplanationService::persist_rules() const {
    if (data_dir_) write_atomically(*data_dir_ / "rules.json", rules_.history_json().dump(2));
}

void ExplanationService::persist_users() const {
    if (!data_dir_) return;
    json out = json::array();
    for (const auto& u : users()) {
        json j = profile_to_json(u.profile);
        j["schedule"] = schedule_to_json(u.schedule);
        out.push_back(std::move(j));
    }
    write_atomically(*data_dir_ / "users.json", out.dump(2));
}

PostResult ExplanationService::post_event(EventRecord record) {
    std::lock_guard lock(ingest_mutex_);
    PostResult out;
    const Timestamp t = record.ts;
    const bool property_change = record.kind == EventKind::PropertyChange;
    out.seq = log_->ingest(std::move(record));
    if (!options_.automate || !property_change) return out;

    const auto active = rules_.at(t);
    for (auto& firing : runner_.step(reader_for(*log_), active, t)) {
        for (auto& e : firing.emitted) {
            e.seq = log_->ingest(e);
            out.emitted.push_back(e);
        }
    }
    return out;
}

std::vector<EventRecord> ExplanationService::events(Timestamp from, Timestamp to) const {
    return log_->window(from, to).records;
}

RuleVersion ExplanationService::put_rule(const Rule& rule, std::optional<Timestamp> effective) {
    auto v = rules_.put(rule, effective.value_or(clock_()));
    persist_rules();
    return v;
}

void ExplanationService::delete_rule(const RuleId& id, std::optional<Timestamp> effective) {
    rules_.remove(id, effective.value_or(clock_()));
    runner_.forget(id);
    persist_rules();
}

std::vector<Rule> ExplanationService::rules() const { return rules_.active(); }

std::vector<RuleVersion> ExplanationService::rule_versions() const { return rules_.versions(); }

void ExplanationService::put_user(const UserProfile& profile,
                                  std::optional<std::vector<ScheduleEntry>> schedule) {
    if (profile.id.empty()) fail(ErrorCode::Validation, "user id must not be empty");
    users_.put(profile);
    if (schedule) {
        if (!schedule_)
            fail(ErrorCode::Validation, "schedules are managed by the external state provider");
        schedule_->replace(profile.id, std::move(*schedule));
    }
    persist_users();
}

std::vector<UserRecord> ExplanationService::users() const {
    std::vector<UserRecord> out;
    for (auto& p : users_.all())
        out.push_back({p, schedule_ ? schedule_->schedule(p.id) : std::vector<ScheduleEntry>{}});
    return out;
}

void ExplanationService::put_device(const SmartObject& device) {
    if (device.id.empty()) fail(ErrorCode::Validation, "device id must not be empty");
    {
        std::lock_guard lock(devices_mutex_);
        devices_[device.id] = device;
    }
    if (data_dir_) {
        json out = json::array();
        for (const auto& d : devices()) out.push_back(codec::object_to_json(d));
        write_atomically(*data_dir_ / "devices.json", out.dump(2));
    }
}

std::vector<SmartObject> ExplanationService::devices() const {
    std::lock_guard lock(devices_mutex_);
    std::vector<SmartObject> out;
    for (const auto& [id, d] : devices_) out.push_back(d);
    return out;
}

UserState ExplanationService::user_state(const UserId& user, Timestamp at) {
    return context_->fetch_user_state(user, at);
}

RenderContext ExplanationService::render_context() const {
    RenderContext ctx;
    ctx.user_name = [this](const UserId& id) {
        const auto p = users_.get(id);
        return p ? p->user_name : id;
    };
    ctx.entity_name = [this](const EntityId& id) {
        std::lock_guard lock(devices_mutex_);
        const auto it = devices_.find(id);
        return it == devices_.end() ? id : it->second.name;
    };
    ctx.display_action_names = options_.display_action_names;
    return ctx;
}

ExplanationResult ExplanationService::explain(const ExplanationRequest& request) {
    if (request.entity.has_value() != request.action.has_value())
        fail(ErrorCode::Validation, "entity and action must be given together");
    if (!request.overrides.empty() && !request.debug)
        fail(ErrorCode::Validation, "context overrides are only accepted in debug mode");
    if (!users_.get(request.user)) fail(ErrorCode::UnknownUser, "unknown user '" + request.user + "'");

    CausalOptions causal = options_.causal;
    if (request.lookback) causal.lookback = *request.lookback;
    const Timestamp at = request.at.value_or(clock_());
    const LogWindow window = log_->window(at - causal.lookback, at);

    ExplanationResult out;
    out.explanandum.requested_at = at;
    out.explanandum.explainee = request.user;
    if (request.entity) {
        out.explanandum.entity = *request.entity;
        out.explanandum.action = *request.action;
    } else {
        const Cause self = Cause::user(request.user);
        const EventRecord* latest = nullptr;
        for (auto it = window.records.rbegin(); it != window.records.rend(); ++it) {
            if (it->kind == EventKind::ActionExecuted && !(it->caused_by == self)) {
                latest = &*it;
                break;
            }
        }
        if (!latest)
            fail(ErrorCode::NothingToExplain, "no system action in the last " +
                                                  std::to_string(causal.lookback.count() / 60'000) +
                                                  " minutes");
        out.explanandum.entity = latest->entity;
        out.explanandum.action = latest->name;
    }

    const auto exec = locate_execution(window, out.explanandum.entity, out.explanandum.action, at,
                                       causal.lookback);
    if (!exec)
        fail(ErrorCode::ActionNotFound,
             "no execution of " + action_label(out.explanandum.entity, out.explanandum.action) +
                 " in the lookback window");
    out.execution = *exec;

    // Rules as they were when the action ran, so edits and deletes keep history explainable.
    const auto rules = rules_.at(exec->ts);
    out.path = find_cause_path(out.explanandum, rules, window, causal);

    const ExplanandumKey key{out.explanandum.entity, out.explanandum.action};
    const bool record = request.record && request.overrides.empty();
    std::lock_guard lock(explain_mutex_);
    const auto snap = context_->snapshot(request.user, key, at);
    out.context = snap.snapshot;
    out.degraded = snap.degraded;
    request.overrides.apply(out.context);

    const auto ctx = render_context();
    if (out.path) {
        out.psi = assemble_psi(*out.path, rules);
        out.inference = infer_view_traced(out.context, policies_);
        out.view = out.inference->view;
        out.projected = project_view(out.psi, *out.view);
        out.text = render(out.projected, *out.view, out.context, templates_, ctx);
    } else {
        out.text = render_no_cause(out.explanandum, out.context, templates_, ctx);
    }

    if (record) {
        context_->record_delivery(request.user, key, at);
        out.recorded = true;
    }
    return out;
}

} // namespace lucid

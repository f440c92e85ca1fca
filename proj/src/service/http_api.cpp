#include "lucid/http_api.hpp"

#include "lucid/codec.hpp"

#include <httplib.h>

namespace lucid {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Validation:
        case ErrorCode::Range:
        case ErrorCode::PolicyConfig:
        case ErrorCode::ScenarioValidation: return 400;
        case ErrorCode::UnknownRule:
        case ErrorCode::UnknownUser:
        case ErrorCode::ActionNotFound:
        case ErrorCode::NotFound: return 404;
        case ErrorCode::Conflict:
        case ErrorCode::AmbiguousCause: return 409;
        case ErrorCode::NothingToExplain: return 422;
        case ErrorCode::ProviderUnavailable: return 503;
        case ErrorCode::Storage:
        case ErrorCode::TemplateSlot: return 500;
    }
    return 500;
}

namespace {

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message,
                json extra = json::object()) {
    json body{{"code", std::string(code_name(code))}, {"message", message}};
    body.update(extra);
    send(res, http_status(code), body);
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
        try {
            h(req, res);
        } catch (const AmbiguousCauseError& e) {
            send_error(res, e.code(), e.what(), {{"candidates", e.candidates()}});
        } catch (const Error& e) {
            send_error(res, e.code(), e.what());
        } catch (const json::exception& e) {
            send_error(res, ErrorCode::Validation, e.what());
        } catch (const std::exception& e) {
            send(res, 500, {{"code", "INTERNAL"}, {"message", e.what()}});
        }
    };
}

json body_json(const httplib::Request& req) {
    return codec::parse_document(req.body, "request body");
}

json record_json(const EventRecord& r) {
    json j = codec::event_to_json(r);
    j["seq"] = r.seq;
    return j;
}

std::optional<Timestamp> time_param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    return parse_iso8601(req.get_param_value(name));
}

std::optional<Timestamp> time_field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name) || j[name].is_null()) return std::nullopt;
    return codec::require_time(j, name);
}

} // namespace

struct HttpServer::Impl {
    ExplanationService& service;
    httplib::Server server;

    explicit Impl(ExplanationService& s) : service(s) { routes(); }

    EventRecord event_body(json j) {
        if (j.is_object() && !j.contains("ts")) j["ts"] = format_iso8601(service.now());
        return codec::event_from_json(j);
    }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS"}});
        server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Get("/health", guarded([this](const auto&, auto& res) {
            send(res, 200, {{"status", "ok"},
                            {"events", service.log().size()},
                            {"rules", service.rules().size()},
                            {"users", service.users().size()},
                            {"policies", service.policies().name()}});
        }));

        server.Post("/events", guarded([this](const auto& req, auto& res) {
            const json body = body_json(req);
            std::vector<EventRecord> batch;
            if (body.is_array())
                for (const auto& e : body) batch.push_back(event_body(e));
            else
                batch.push_back(event_body(body));
            json accepted = json::array(), emitted = json::array();
            for (auto& e : batch) {
                const auto r = service.post_event(std::move(e));
                accepted.push_back(r.seq);
                for (const auto& x : r.emitted) emitted.push_back(record_json(x));
            }
            send(res, 201, {{"accepted", accepted}, {"emitted", emitted}});
        }));

        server.Get("/events", guarded([this](const auto& req, auto& res) {
            const auto from = time_param(req, "from").value_or(Timestamp::min());
            const auto to = time_param(req, "to").value_or(Timestamp::max());
            json out = json::array();
            for (const auto& r : service.events(from, to)) out.push_back(record_json(r));
            send(res, 200, out);
        }));

        server.Put("/rules", guarded([this](const auto& req, auto& res) {
            const json body = body_json(req);
            const auto effective = time_field(body, "valid_from");
            json out = json::array();
            auto put_one = [&](const json& j) {
                const auto v = service.put_rule(codec::rule_from_json(j), time_field(j, "valid_from").has_value()
                                                                                ? time_field(j, "valid_from")
                                                                                : effective);
                out.push_back({{"id", v.rule.id},
                               {"version", v.version},
                               {"valid_from", format_iso8601(v.valid_from)}});
            };
            if (body.is_object() && body.contains("rules")) {
                for (const auto& j : body["rules"]) put_one(j);
                send(res, 200, out);
            } else {
                put_one(body);
                send(res, 200, out.front());
            }
        }));

        server.Get("/rules", guarded([this](const auto& req, auto& res) {
            json rules = json::array();
            for (const auto& r : service.rules()) rules.push_back(codec::rule_to_json(r));
            json out{{"rules", rules}};
            if (req.has_param("history") && req.get_param_value("history") == "true") {
                json versions = json::array();
                for (const auto& v : service.rule_versions()) {
                    json j{{"rule", codec::rule_to_json(v.rule)},
                           {"version", v.version},
                           {"valid_from", format_iso8601(v.valid_from)}};
                    j["valid_to"] = v.valid_to ? json(format_iso8601(*v.valid_to)) : json();
                    versions.push_back(std::move(j));
                }
                out["versions"] = std::move(versions);
            }
            send(res, 200, out);
        }));

        server.Delete(R"(/rules/([^/]+))", guarded([this](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            service.delete_rule(id, time_param(req, "at"));
            send(res, 200, {{"deleted", id}});
        }));

        server.Put("/users", guarded([this](const auto& req, auto& res) {
            const json body = body_json(req);
            auto put_one = [&](const json& j) {
                std::optional<std::vector<ScheduleEntry>> schedule;
                if (j.contains("schedule")) schedule = schedule_from_json(j["schedule"]);
                service.put_user(profile_from_json(j), std::move(schedule));
            };
            std::size_t n = 0;
            if (body.is_array()) {
                for (const auto& j : body) put_one(j), ++n;
            } else {
                put_one(body);
                n = 1;
            }
            send(res, 200, {{"stored", n}});
        }));

        server.Get("/users", guarded([this](const auto&, auto& res) {
            json out = json::array();
            for (const auto& u : service.users()) {
                json j = profile_to_json(u.profile);
                j["schedule"] = schedule_to_json(u.schedule);
                out.push_back(std::move(j));
            }
            send(res, 200, out);
        }));

        server.Put("/devices", guarded([this](const auto& req, auto& res) {
            const json body = body_json(req);
            std::size_t n = 0;
            if (body.is_array()) {
                for (const auto& j : body) service.put_device(codec::object_from_json(j)), ++n;
            } else {
                service.put_device(codec::object_from_json(body));
                n = 1;
            }
            send(res, 200, {{"stored", n}});
        }));

        server.Get("/devices", guarded([this](const auto&, auto& res) {
            json out = json::array();
            for (const auto& d : service.devices()) out.push_back(codec::object_to_json(d));
            send(res, 200, out);
        }));

        server.Post("/explanations", guarded([this](const auto& req, auto& res) {
            const auto request = request_from_json(body_json(req));
            const auto result = service.explain(request);
            send(res, 200, result_to_json(result, request.debug));
        }));

        server.Get("/state", guarded([this](const auto& req, auto& res) {
            if (!req.has_param("user")) fail(ErrorCode::Validation, "missing 'user' parameter");
            const auto at = time_param(req, "at").value_or(service.now());
            const auto state = service.user_state(req.get_param_value("user"), at);
            send(res, 200, {{"state", std::string(to_string(state))}});
        }));

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.status == 404 && res.body.empty())
                send(res, 404, {{"code", std::string(code_name(ErrorCode::NotFound))},
                                {"message", "no such endpoint"}});
        });
    }
};

HttpServer::HttpServer(ExplanationService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

} // namespace lucid

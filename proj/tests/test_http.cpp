#include "lucid/codec.hpp"
#include "lucid/http_api.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>
#include <httplib.h>

#include <thread>

using namespace lucid;
using nlohmann::json;

namespace {

// A service on a free local port, served from a background thread.
struct Live {
    ExplanationService service;
    HttpServer server;
    int port = -1;
    std::thread thread;

    explicit Live(ExplanationService::Config config = {}) : service(std::move(config)), server(service) {
        port = server.bind("127.0.0.1", 0);
        REQUIRE(port > 0);
        thread = std::thread([this] { server.serve(); });
        while (!server.running()) std::this_thread::yield();
    }
    ~Live() {
        server.stop();
        thread.join();
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(5, 0);
        return c;
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

json body(const httplib::Result& r) {
    REQUIRE(r);
    return json::parse(r->body);
}

const char* kJson = "application/json";

json user_doc(const char* id, const char* name, const char* role) {
    return {{"id", id},
            {"name", name},
            {"technicality", "TECHNICAL"},
            {"role", role},
            {"schedule", {{{"from", "2024-03-12T12:00:00Z"}, {"to", "2024-03-12T13:00:00Z"}, {"state", "BREAK"}}}}};
}

void seed(httplib::Client& c) {
    REQUIRE(c.Put("/users", json::array({user_doc("bob", "Bob", "OWNER"), user_doc("alice", "Alice", "COWORKER"),
                                          user_doc("dana", "Dana", "GUEST")})
                                .dump(),
                  kJson)
                ->status == 200);
    json rule = codec::rule_to_json(fx::tv_rule());
    rule["valid_from"] = "2024-03-12T11:00:00Z";
    REQUIRE(c.Put("/rules", rule.dump(), kJson)->status == 200);
    json events = json::array({codec::event_to_json(fx::change("12:00", "room1", "meeting", true)),
                               codec::event_to_json(fx::change("12:01", "tv", "power", std::string("on"))),
                               codec::event_to_json(fx::action("12:01:00.100", "tv", "mute", Cause::rule("rule_2")))});
    REQUIRE(c.Post("/events", events.dump(), kJson)->status == 201);
}

json explain(httplib::Client& c, const json& req, int expected_status) {
    const auto r = c.Post("/explanations", req.dump(), kJson);
    REQUIRE(r);
    CHECK(r->status == expected_status);
    return json::parse(r->body);
}

} // namespace

TEST_SUITE("http") {

TEST_CASE("health and unknown endpoints") {
    Live live;
    auto c = live.client();
    const auto h = body(c.Get("/health"));
    CHECK(h["status"] == "ok");
    CHECK(h["events"] == 0);
    CHECK(h["policies"] == "role-first");

    const auto r = c.Get("/nowhere");
    REQUIRE(r);
    CHECK(r->status == 404);
    CHECK(json::parse(r->body)["code"] == "NOT_FOUND");
}

TEST_CASE("the scenario over HTTP") {
    Live live;
    auto c = live.client();
    seed(c);

    const json q{{"entity", "tv"}, {"action", "mute"}};
    auto bob = q, alice = q, dana = q;
    bob["user"] = "bob", bob["at"] = "2024-03-12T12:02:00Z";
    alice["user"] = "alice", alice["at"] = "2024-03-12T12:02:01Z";
    dana["user"] = "dana", dana["at"] = "2024-03-12T12:02:02Z";
    CHECK(explain(c, bob, 200)["text"] == fx::kBobText);
    const auto a = explain(c, alice, 200);
    CHECK(a["view"] == "FULL");
    CHECK(a["text"] == fx::kAliceText);
    CHECK_FALSE(a.contains("psi"));
    CHECK(explain(c, dana, 200)["view"] == "SIMPLIFIED");

    auto debug = alice;
    debug["debug"] = true;
    debug["record"] = false;
    debug["at"] = "2024-03-12T12:03:00Z";
    const auto d = explain(c, debug, 200);
    CHECK(d["psi"].size() == 6);
    CHECK(d["context"]["occurrence"] == "SECOND_TIME");
    CHECK(d["recorded"] == false);

    const auto events = body(c.Get("/events?from=2024-03-12T12:00:30Z&to=2024-03-12T12:05:00Z"));
    REQUIRE(events.size() == 2);
    CHECK(events[0]["seq"] == 2);
    CHECK(events[1]["caused_by"] == "rule:rule_2");

    const auto state = body(c.Get("/state?user=bob&at=2024-03-12T12:30:00Z"));
    CHECK(state["state"] == "BREAK");
    CHECK(body(c.Get("/state?user=bob&at=2024-03-12T13:00:00Z"))["state"] == "WORKING");
    CHECK(body(c.Get("/users")).size() == 3);
}

TEST_CASE("error bodies and status codes") {
    Live live;
    auto c = live.client();
    seed(c);

    auto status = [](const httplib::Result& r) { return r ? r->status : -1; };
    auto code = [](const httplib::Result& r) { return json::parse(r->body)["code"].get<std::string>(); };

    const auto nothing = c.Post("/explanations", json{{"user", "bob"}, {"at", "2024-03-12T15:00:00Z"}}.dump(), kJson);
    CHECK(status(nothing) == 422);
    CHECK(code(nothing) == "NOTHING_TO_EXPLAIN");

    const auto who = c.Post("/explanations", json{{"user", "eve"}}.dump(), kJson);
    CHECK(status(who) == 404);
    CHECK(code(who) == "UNKNOWN_USER");

    const auto missing = c.Post("/explanations",
                                json{{"user", "bob"}, {"entity", "tv"}, {"action", "unmute"},
                                     {"at", "2024-03-12T12:02:00Z"}}.dump(),
                                kJson);
    CHECK(status(missing) == 404);
    CHECK(code(missing) == "ACTION_NOT_FOUND");

    const auto overrides = c.Post("/explanations",
                                  json{{"user", "bob"}, {"context_overrides", {{"role", "GUEST"}}}}.dump(), kJson);
    CHECK(status(overrides) == 400);

    CHECK(status(c.Post("/events", "{not json", kJson)) == 400);
    CHECK(status(c.Post("/events", json{{"entity", "tv"}}.dump(), kJson)) == 400);
    CHECK(status(c.Get("/events?from=2024-03-12T13:00:00Z&to=2024-03-12T12:00:00Z")) == 400);

    json dup = codec::rule_to_json(fx::tv_rule());
    dup["id"] = "rule_9";
    const auto conflict = c.Put("/rules", dup.dump(), kJson);
    CHECK(status(conflict) == 409);
    CHECK(code(conflict) == "CONFLICT");

    CHECK(status(c.Delete("/rules/nope")) == 404);
    CHECK(status(c.Put("/users", json{{"id", "x"}}.dump(), kJson)) == 400);
    CHECK(status(c.Get("/state")) == 400);
}

TEST_CASE("rule lifecycle over HTTP") {
    Live live;
    auto c = live.client();
    json rule = codec::rule_to_json(fx::tv_rule());
    const auto put = body(c.Put("/rules", json{{"rules", {rule}}, {"valid_from", "2024-03-12T08:00:00Z"}}.dump(), kJson));
    REQUIRE(put.is_array());
    CHECK(put[0]["version"] == 1);
    CHECK(put[0]["valid_from"] == "2024-03-12T08:00:00.000Z");

    rule["name"] = "Rule_2b";
    rule["valid_from"] = "2024-03-12T09:00:00Z";
    CHECK(body(c.Put("/rules", rule.dump(), kJson))["version"] == 2);
    const auto listed = body(c.Get("/rules?history=true"));
    CHECK(listed["rules"].size() == 1);
    CHECK(listed["versions"].size() == 2);
    CHECK(listed["versions"][0]["valid_to"] == "2024-03-12T09:00:00.000Z");

    CHECK(c.Delete("/rules/rule_2?at=2024-03-12T10:00:00Z")->status == 200);
    CHECK(body(c.Get("/rules"))["rules"].empty());
}

TEST_CASE("devices round trip") {
    Live live;
    auto c = live.client();
    const json tv{{"id", "tv"}, {"name", "TV"}, {"properties", {"power", "mute"}}, {"actions", {"mute", "unmute"}}};
    CHECK(body(c.Put("/devices", tv.dump(), kJson))["stored"] == 1);
    const auto listed = body(c.Get("/devices"));
    REQUIRE(listed.size() == 1);
    CHECK(listed[0]["name"] == "TV");
}

TEST_CASE("live automation reports emitted records") {
    ExplanationService::Config config;
    config.options.automate = true;
    Live live(std::move(config));
    auto c = live.client();
    REQUIRE(c.Put("/rules", json{{"rules", {codec::rule_to_json(fx::tv_rule())}},
                                 {"valid_from", "2024-03-12T08:00:00Z"}}.dump(),
                  kJson)->status == 200);
    body(c.Post("/events", codec::event_to_json(fx::change("12:00", "room1", "meeting", true)).dump(), kJson));
    const auto r = body(c.Post("/events", codec::event_to_json(fx::change("12:01", "tv", "power", std::string("on"))).dump(), kJson));
    REQUIRE(r["emitted"].size() == 2);
    CHECK(r["emitted"][1]["name"] == "mute");
    CHECK(r["emitted"][1]["caused_by"] == "rule:rule_2");
}

TEST_CASE("one service can be another's state provider") {
    Live calendar;
    auto c = calendar.client();
    REQUIRE(c.Put("/users", user_doc("bob", "Bob", "OWNER").dump(), kJson)->status == 200);
    HttpStateProvider provider(calendar.url());
    CHECK(provider.fetch("bob", fx::at("12:15")) == UserState::Break);
    CHECK(provider.fetch("bob", fx::at("14:00")) == UserState::Working);
}

TEST_CASE("status mapping") {
    CHECK(http_status(ErrorCode::Validation) == 400);
    CHECK(http_status(ErrorCode::UnknownUser) == 404);
    CHECK(http_status(ErrorCode::Conflict) == 409);
    CHECK(http_status(ErrorCode::AmbiguousCause) == 409);
    CHECK(http_status(ErrorCode::NothingToExplain) == 422);
    CHECK(http_status(ErrorCode::ProviderUnavailable) == 503);
}

}

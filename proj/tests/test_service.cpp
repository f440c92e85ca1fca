#include "lucid/errors.hpp"
#include "lucid/service.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <filesystem>

#include <unistd.h>

using namespace lucid;

namespace {

struct Clock {
    Timestamp now = fx::at("12:00");
};

ExplanationService::Config config(Clock& clock, bool automate = false) {
    ExplanationService::Config c;
    c.options.automate = automate;
    c.clock = [&clock] { return clock.now; };
    return c;
}

void add_people(ExplanationService& s) {
    const std::vector<ScheduleEntry> lunch = {{fx::at("12:00"), fx::at("13:00"), UserState::Break}};
    s.put_user({"bob", "Bob", Technicality::Technical, Role::Owner}, lunch);
    s.put_user({"alice", "Alice", Technicality::Technical, Role::Coworker}, lunch);
    s.put_user({"dana", "Dana", Technicality::Technical, Role::Guest}, lunch);
}

void tv_trace(ExplanationService& s) {
    s.post_event(fx::change("12:00", "room1", "meeting", true));
    s.post_event(fx::change("12:01", "tv", "power", std::string("on")));
    s.post_event({fx::at("12:01"), "tv", EventKind::RuleFired, "rule_2", std::nullopt, Cause::rule("rule_2"), 0});
    s.post_event(fx::action("12:01:00.100", "tv", "mute", Cause::rule("rule_2")));
}

ExplanationRequest ask(UserId user, const std::string& clock) {
    ExplanationRequest r;
    r.user = std::move(user);
    r.entity = "tv";
    r.action = "mute";
    r.at = fx::at(clock);
    return r;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::Validation;
}

} // namespace

TEST_SUITE("service") {

TEST_CASE("the three users get their explanations") {
    Clock clock;
    ExplanationService s(config(clock));
    add_people(s);
    s.put_rule(fx::tv_rule(), fx::at("11:00"));
    tv_trace(s);

    const auto bob = s.explain(ask("bob", "12:02"));
    CHECK(bob.view == ViewKind::Fact);
    CHECK(bob.text == fx::kBobText);
    CHECK(bob.recorded);
    const auto alice = s.explain(ask("alice", "12:02:01"));
    CHECK(alice.view == ViewKind::Full);
    CHECK(alice.text == fx::kAliceText);
    const auto dana = s.explain(ask("dana", "12:02:02"));
    CHECK(dana.view == ViewKind::Simplified);
    CHECK(dana.text == fx::kDanaText);
    CHECK(s.history_size() == 3);

    // Asking again moves Alice to her second time.
    const auto again = s.explain(ask("alice", "12:05"));
    CHECK(again.context.occurrence == Occurrence::SecondTime);
    CHECK(again.view == ViewKind::Fact);
}

TEST_CASE("request errors") {
    Clock clock;
    ExplanationService s(config(clock));
    add_people(s);
    s.put_rule(fx::tv_rule(), fx::at("11:00"));

    ExplanationRequest latest;
    latest.user = "alice";
    latest.at = fx::at("12:02");
    CHECK(code_of([&] { s.explain(latest); }) == ErrorCode::NothingToExplain);
    CHECK(code_of([&] { s.explain(ask("eve", "12:02")); }) == ErrorCode::UnknownUser);
    CHECK(code_of([&] { s.explain(ask("alice", "12:02")); }) == ErrorCode::ActionNotFound);

    auto half = ask("alice", "12:02");
    half.action.reset();
    CHECK(code_of([&] { s.explain(half); }) == ErrorCode::Validation);

    auto sneaky = ask("alice", "12:02");
    sneaky.overrides.role = Role::Guest;
    CHECK(code_of([&] { s.explain(sneaky); }) == ErrorCode::Validation);
}

TEST_CASE("debug overrides change the view and are never recorded") {
    Clock clock;
    ExplanationService s(config(clock));
    add_people(s);
    s.put_rule(fx::tv_rule(), fx::at("11:00"));
    tv_trace(s);

    auto r = ask("alice", "12:02");
    r.debug = true;
    r.overrides.role = Role::Guest;
    const auto out = s.explain(r);
    CHECK(out.view == ViewKind::Simplified);
    CHECK_FALSE(out.recorded);
    CHECK(s.history_size() == 0);

    auto quiet = ask("alice", "12:02");
    quiet.record = false;
    CHECK_FALSE(s.explain(quiet).recorded);
    CHECK(s.history_size() == 0);
    CHECK(s.explain(ask("alice", "12:03")).context.occurrence == Occurrence::FirstTime);
}

TEST_CASE("latest mode picks the last system action, not the asker's own") {
    Clock clock;
    ExplanationService s(config(clock));
    add_people(s);
    s.put_rule(fx::tv_rule(), fx::at("11:00"));
    tv_trace(s);
    s.post_event(fx::action("12:01:30", "lamp", "on", Cause::user("alice")));

    ExplanationRequest r;
    r.user = "alice";
    r.at = fx::at("12:02");
    const auto out = s.explain(r);
    CHECK(out.explanandum.entity == "tv");
    CHECK(out.explanandum.action == "mute");
    CHECK(out.text == fx::kAliceText);

    r.user = "bob";
    r.record = false;
    const auto other = s.explain(r);
    CHECK(other.explanandum.entity == "lamp");
    CHECK_FALSE(other.view.has_value());
    CHECK(other.text == "Hi Bob, no automation rule caused lamp_on; it was triggered manually or externally.");
}

TEST_CASE("deleting a rule keeps earlier firings explainable") {
    Clock clock;
    ExplanationService s(config(clock));
    add_people(s);
    s.put_rule(fx::tv_rule(), fx::at("11:00"));
    tv_trace(s);
    s.delete_rule("rule_2", fx::at("12:01:30"));
    CHECK(s.rules().empty());
    CHECK(s.explain(ask("bob", "12:02")).text == fx::kBobText);

    s.post_event(fx::action("12:03", "tv", "mute", Cause::api()));
    const auto later = s.explain(ask("bob", "12:04"));
    CHECK_FALSE(later.path.has_value());
}

TEST_CASE("explanation JSON hides structure unless debugging") {
    Clock clock;
    ExplanationService s(config(clock));
    add_people(s);
    s.put_rule(fx::tv_rule(), fx::at("11:00"));
    tv_trace(s);
    const auto out = s.explain(ask("alice", "12:02"));
    const auto plain = result_to_json(out, false);
    CHECK(plain["view"] == "FULL");
    CHECK(plain["text"] == fx::kAliceText);
    CHECK_FALSE(plain.contains("psi"));
    const auto debug = result_to_json(out, true);
    CHECK(debug["psi"].size() == 6);
    CHECK(debug["cause_path"]["fired_rule"] == "rule_2");
    CHECK(debug["inference"].size() == 4);

    const auto parsed = request_from_json({{"user", "alice"},
                                           {"entity", "tv"},
                                           {"action", "mute"},
                                           {"at", "2024-03-12T12:02:00Z"},
                                           {"lookback_minutes", 5},
                                           {"debug", true},
                                           {"context_overrides", {{"userState", "MEETING"}}}});
    CHECK(parsed.lookback == Millis{300'000});
    CHECK(parsed.overrides.user_state == UserState::Meeting);
    CHECK(code_of([] { request_from_json({{"user", "a"}, {"lookback_minutes", 0}}); }) == ErrorCode::Validation);
}

TEST_CASE("automation fires the rule on live events") {
    Clock clock;
    ExplanationService s(config(clock, true));
    add_people(s);
    s.put_rule(fx::tv_rule(), fx::at("11:00"));
    CHECK(s.post_event(fx::change("12:00", "room1", "meeting", true)).emitted.empty());
    const auto r = s.post_event(fx::change("12:01", "tv", "power", std::string("on")));
    REQUIRE(r.emitted.size() == 2);
    CHECK(r.emitted[0].kind == EventKind::RuleFired);
    CHECK(r.emitted[1].ts == fx::at("12:01:00.100"));
    CHECK(r.emitted[1].caused_by == Cause::rule("rule_2"));
    // Still true: no second firing.
    CHECK(s.post_event(fx::change("12:01:10", "tv", "power", std::string("on"))).emitted.empty());
    CHECK(s.explain(ask("bob", "12:02")).text == fx::kBobText);
}

TEST_CASE("a data directory survives a restart") {
    const auto dir = std::filesystem::temp_directory_path() / ("lucid_service_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    Clock clock;
    {
        auto c = config(clock);
        c.data_dir = dir;
        ExplanationService s(std::move(c));
        add_people(s);
        s.put_rule(fx::tv_rule(), fx::at("11:00"));
        tv_trace(s);
        s.explain(ask("alice", "12:02"));
    }
    auto c = config(clock);
    c.data_dir = dir;
    ExplanationService s(std::move(c));
    CHECK(s.rules().size() == 1);
    CHECK(s.users().size() == 3);
    CHECK(s.log().size() == 4);
    CHECK(s.history_size() == 1);
    CHECK(s.explain(ask("alice", "12:03")).view == ViewKind::Fact);
    std::filesystem::remove_all(dir);
}

}

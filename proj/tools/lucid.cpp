// lucid: scenario runner and explanation server.
//
//   lucid run scenario.json [--engine embedded|http --url URL] [--json]
//   lucid validate scenario.json
//   lucid record scenario.json [-o events.ndjson]
//   lucid serve [--host H] [--port P] [--data-dir D] [--automate] ...

#include "lucid/codec.hpp"
#include "lucid/http_api.hpp"
#include "lucid/scenario.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace lucid;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct EngineFlags {
    std::string policies = "role-first";
    std::string templates;
    double lookback_minutes = 30;
    long epsilon_ms = 2000;
    long delay_ms = 100;
    bool strict_window = false;
    bool display_names = false;

    void attach(CLI::App* app) {
        app->add_option("--policies", policies, "role-first, state-first, or a policy file")
            ->capture_default_str();
        app->add_option("--templates", templates, "template file (default: shipped English)");
        app->add_option("--lookback-minutes", lookback_minutes, "cause-path lookback m")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app->add_option("--epsilon-ms", epsilon_ms, "simultaneity tolerance")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        app->add_option("--delay-ms", delay_ms, "action delay after a rule fires")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        app->add_flag("--strict-window", strict_window, "facts must be set inside the lookback window");
        app->add_flag("--display-names", display_names, "render device names instead of tv_mute style labels");
    }

    ServiceOptions service_options() const {
        ServiceOptions o;
        o.causal.lookback = Millis{static_cast<std::int64_t>(lookback_minutes * 60'000)};
        o.causal.simultaneity = Millis{epsilon_ms};
        o.causal.strict_window = strict_window;
        o.automation.action_delay = Millis{delay_ms};
        o.display_action_names = display_names;
        return o;
    }

    PolicySet policy_set() const {
        if (policies == "role-first") return default_policies();
        if (policies == "state-first") return state_first_policies();
        return load_policies_file(policies);
    }

    std::optional<TemplateSet> template_set() const {
        if (templates.empty()) return std::nullopt;
        return load_templates_file(templates);
    }
};

int report_error(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e))
        std::cerr << "error " << code_name(err->code()) << ": " << err->what() << "\n";
    else
        std::cerr << "error: " << e.what() << "\n";
    return 2;
}

int cmd_run(const std::string& path, const std::string& engine_name, const std::string& url, bool as_json,
            const EngineFlags& flags, const std::string& record_to) {
    const auto scenario = sim::load_scenario_file(path);
    std::unique_ptr<sim::Engine> engine;
    if (engine_name == "embedded") {
        engine = std::make_unique<sim::EmbeddedEngine>(flags.service_options(), flags.policy_set(),
                                                       flags.template_set());
    } else {
        if (url.empty()) throw Error(ErrorCode::Validation, "--engine http needs --url");
        engine = std::make_unique<sim::HttpEngine>(url);
    }
    sim::SimOptions sim_options;
    sim_options.automation.action_delay = Millis{flags.delay_ms};
    const auto report = sim::run(scenario, *engine, sim_options);

    if (!record_to.empty()) {
        std::ofstream file;
        std::ostream* out = &std::cout;
        if (record_to != "-") {
            file.open(record_to, std::ios::trunc);
            if (!file) throw Error(ErrorCode::Storage, "cannot write " + record_to);
            out = &file;
        }
        for (const auto& r : engine->events()) *out << codec::event_to_line(r) << "\n";
        if (record_to != "-") std::cerr << report.passed() << "/" << report.queries.size() << " queries passed\n";
    } else if (as_json) {
        std::cout << sim::report_to_json(report).dump(2) << "\n";
    } else {
        std::cout << sim::report_to_text(report);
    }
    return report.ok() ? 0 : 1;
}

int cmd_validate(const std::string& path) {
    const auto s = sim::load_scenario_file(path);
    std::size_t queries = 0;
    for (const auto& t : s.timeline) queries += t.is_query();
    std::cout << "ok: " << s.name << ": " << s.devices.size() << " devices, " << s.users.size() << " users, "
              << s.rules.size() << " rules, " << s.timeline.size() - queries << " events, " << queries
              << " queries\n";
    return 0;
}

struct ServeFlags {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir;
    std::string state_provider;
    std::string scenario;
    bool automate = false;
};

int cmd_serve(const ServeFlags& sf, const EngineFlags& flags) {
    ExplanationService::Config config;
    config.options = flags.service_options();
    config.options.automate = sf.automate;
    config.policies = flags.policy_set();
    config.templates = flags.template_set();
    if (!sf.data_dir.empty()) config.data_dir = sf.data_dir;
    if (!sf.state_provider.empty())
        config.state_provider = std::make_unique<HttpStateProvider>(sf.state_provider);
    ExplanationService service(std::move(config));

    if (!sf.scenario.empty()) {
        const auto s = sim::load_scenario_file(sf.scenario);
        for (const auto& d : s.devices) service.put_device(d);
        for (const auto& u : s.users)
            service.put_user(u.profile, sf.state_provider.empty()
                                            ? std::optional<std::vector<ScheduleEntry>>(u.schedule)
                                            : std::nullopt);
        const auto existing = service.rules();
        for (const auto& r : s.rules) {
            const bool known = std::any_of(existing.begin(), existing.end(),
                                           [&](const Rule& x) { return x.id == r.id; });
            if (!known) service.put_rule(r, Timestamp{});
        }
    }

    HttpServer server(service);
    const int port = server.bind(sf.host, sf.port);
    if (port < 0) {
        std::cerr << "error: cannot bind " << sf.host << ":" << sf.port << "\n";
        return 2;
    }
    std::cout << "listening on http://" << sf.host << ":" << port << std::endl;

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::thread watcher([&] {
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    });
    server.serve();
    g_stop = true;
    watcher.join();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Context-aware explanations for rule-based smart environments"};
    app.require_subcommand(1);

    std::string path, engine_name = "embedded", url, record_to;
    bool as_json = false;
    EngineFlags flags;

    auto* run = app.add_subcommand("run", "replay a scenario and check its expectations");
    run->add_option("scenario", path, "scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--engine", engine_name, "embedded or http")
        ->check(CLI::IsMember({"embedded", "http"}))
        ->capture_default_str();
    run->add_option("--url", url, "base URL of a running 'lucid serve' for --engine http");
    run->add_flag("--json", as_json, "emit the report as JSON");
    flags.attach(run);

    auto* validate = app.add_subcommand("validate", "check a scenario file without running it");
    validate->add_option("scenario", path, "scenario JSON file")->required()->check(CLI::ExistingFile);

    auto* record = app.add_subcommand("record", "replay a scenario and dump the resulting event log");
    record->add_option("scenario", path, "scenario JSON file")->required()->check(CLI::ExistingFile);
    record->add_option("-o,--output", record_to, "NDJSON output file ('-' for stdout)")
        ->capture_default_str();
    record->add_option("--engine", engine_name, "embedded or http")
        ->check(CLI::IsMember({"embedded", "http"}));
    record->add_option("--url", url, "base URL for --engine http");
    flags.attach(record);

    ServeFlags sf;
    auto* serve = app.add_subcommand("serve", "run the HTTP explanation service");
    serve->add_option("--host", sf.host)->capture_default_str();
    serve->add_option("--port", sf.port, "0 picks a free port and prints it")->capture_default_str();
    serve->add_option("--data-dir", sf.data_dir, "persist events, rules, users and history here");
    serve->add_option("--state-provider", sf.state_provider, "base URL of a remote user-state provider");
    serve->add_option("--scenario", sf.scenario, "preload devices, users and rules from a scenario")
        ->check(CLI::ExistingFile);
    serve->add_flag("--automate", sf.automate, "fire rules on ingested property changes");
    flags.attach(serve);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(path, engine_name, url, as_json, flags, "");
        if (*validate) return cmd_validate(path);
        if (*record) return cmd_run(path, engine_name, url, false, flags, record_to.empty() ? "-" : record_to);
        if (*serve) return cmd_serve(sf, flags);
    } catch (const std::exception& e) {
        return report_error(e);
    }
    return 0;
}

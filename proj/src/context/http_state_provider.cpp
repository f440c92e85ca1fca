#include "lucid/context.hpp"

#include "lucid/errors.hpp"

#include <httplib.h>

namespace lucid {

HttpStateProvider::HttpStateProvider(std::string base_url, Millis timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

UserState HttpStateProvider::fetch(const UserId& user, Timestamp at) {
    // Split "http://host:port/prefix" into the origin and an optional path prefix.
    std::string origin = base_url_, prefix;
    if (const auto scheme = base_url_.find("://"); scheme != std::string::npos) {
        if (const auto slash = base_url_.find('/', scheme + 3); slash != std::string::npos) {
            origin = base_url_.substr(0, slash);
            prefix = base_url_.substr(slash);
        }
    }
    httplib::Client client(origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());

    const httplib::Params params{{"user", user}, {"at", format_iso8601(at)}};
    const auto res = client.Get(prefix + "/state", params, httplib::Headers{});
    if (!res)
        fail(ErrorCode::ProviderUnavailable,
             "state provider " + base_url_ + " unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
        fail(ErrorCode::ProviderUnavailable,
             "state provider " + base_url_ + " answered HTTP " + std::to_string(res->status));
    try {
        const auto body = nlohmann::json::parse(res->body);
        return parse_user_state(body.at("state").get<std::string>());
    } catch (const std::exception& e) {
        fail(ErrorCode::ProviderUnavailable, std::string("malformed state response: ") + e.what());
    }
}

} // namespace lucid

#pragma once

#include "lucid/errors.hpp"
#include "lucid/service.hpp"

#include <memory>
#include <string>

namespace lucid {

// HTTP status used for each error code in {code, message} error bodies.
int http_status(ErrorCode code) noexcept;

// JSON-over-HTTP/1.1 front end of an ExplanationService.
//
//   POST   /events               one record or an array; ts defaults to now
//   GET    /events?from&to       records in [from, to], ascending
//   PUT    /rules                one rule (optional valid_from) or {"rules": [...]}
//   GET    /rules                active rules; ?history=true adds all versions
//   DELETE /rules/{id}
//   PUT    /users                one profile (optional schedule) or an array
//   GET    /users
//   PUT    /devices, GET /devices
//   POST   /explanations         ExplanationRequest + debug flag
//   GET    /state?user&at        user-state provider contract
//   GET    /health
class HttpServer {
public:
    explicit HttpServer(ExplanationService& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    bool serve();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace lucid

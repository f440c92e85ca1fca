#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lucid {

enum class ErrorCode {
    Validation,
    Storage,
    Range,
    UnknownRule,
    UnknownUser,
    ActionNotFound,
    AmbiguousCause,
    ProviderUnavailable,
    PolicyConfig,
    TemplateSlot,
    NothingToExplain,
    Conflict,
    ScenarioValidation,
    NotFound,
};

// Stable machine-readable name, used in HTTP error bodies and reports.
std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// More than one rule explains the same action. Candidates are sorted by rule id.
class AmbiguousCauseError : public Error {
public:
    explicit AmbiguousCauseError(std::vector<std::string> candidates);

    const std::vector<std::string>& candidates() const noexcept { return candidates_; }

private:
    std::vector<std::string> candidates_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace lucid

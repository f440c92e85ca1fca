#include "lucid/errors.hpp"

namespace lucid {

std::string_view code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Validation: return "VALIDATION_ERROR";
        case ErrorCode::Storage: return "STORAGE_ERROR";
        case ErrorCode::Range: return "RANGE_ERROR";
        case ErrorCode::UnknownRule: return "UNKNOWN_RULE";
        case ErrorCode::UnknownUser: return "UNKNOWN_USER";
        case ErrorCode::ActionNotFound: return "ACTION_NOT_FOUND";
        case ErrorCode::AmbiguousCause: return "AMBIGUOUS_CAUSE";
        case ErrorCode::ProviderUnavailable: return "PROVIDER_UNAVAILABLE";
        case ErrorCode::PolicyConfig: return "POLICY_CONFIG_ERROR";
        case ErrorCode::TemplateSlot: return "TEMPLATE_SLOT_ERROR";
        case ErrorCode::NothingToExplain: return "NOTHING_TO_EXPLAIN";
        case ErrorCode::Conflict: return "CONFLICT";
        case ErrorCode::ScenarioValidation: return "SCENARIO_VALIDATION_ERROR";
        case ErrorCode::NotFound: return "NOT_FOUND";
    }
    return "UNKNOWN";
}

namespace {

std::string ambiguous_message(const std::vector<std::string>& candidates) {
    std::string msg = "more than one rule explains the action:";
    for (const auto& c : candidates) msg += " " + c;
    return msg;
}

} // namespace

AmbiguousCauseError::AmbiguousCauseError(std::vector<std::string> candidates)
    : Error(ErrorCode::AmbiguousCause, ambiguous_message(candidates)),
      candidates_(std::move(candidates)) {}

} // namespace lucid

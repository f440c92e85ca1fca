#pragma once

#include <string_view>

// Repository resource files compiled into the library.
namespace lucid::resources {

std::string_view default_policies_json();
std::string_view state_first_policies_json();
std::string_view english_templates_json();
std::string_view tv_mute_scenario_json();

} // namespace lucid::resources

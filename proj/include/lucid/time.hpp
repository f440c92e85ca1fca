#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace lucid {

using Millis = std::chrono::milliseconds;
using Timestamp = std::chrono::sys_time<Millis>;

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]" followed by "Z" or "+00:00".
// Fractional digits beyond milliseconds are truncated. Throws Error(Validation).
Timestamp parse_iso8601(std::string_view text);

// Always emits "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string format_iso8601(Timestamp t);

inline Timestamp from_unix_millis(std::int64_t ms) { return Timestamp{Millis{ms}}; }
inline std::int64_t to_unix_millis(Timestamp t) { return t.time_since_epoch().count(); }

inline Timestamp now_utc() {
    return std::chrono::time_point_cast<Millis>(std::chrono::system_clock::now());
}

} // namespace lucid

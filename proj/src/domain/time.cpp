#include "lucid/time.hpp"

#include "lucid/errors.hpp"

#include <charconv>
#include <cstdio>

namespace lucid {
namespace {

// Proleptic Gregorian day count (H. Hinnant's days_from_civil).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2);
}

[[noreturn]] void bad(std::string_view text) {
    fail(ErrorCode::Validation, "invalid ISO-8601 UTC timestamp: '" + std::string(text) + "'");
}

int digits(std::string_view text, std::size_t pos, std::size_t count, std::string_view whole) {
    if (pos + count > text.size()) bad(whole);
    int v = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') bad(whole);
        v = v * 10 + (c - '0');
    }
    return v;
}

void expect(std::string_view text, std::size_t pos, char c) {
    if (pos >= text.size() || text[pos] != c) bad(text);
}

} // namespace

Timestamp parse_iso8601(std::string_view text) {
    const int year = digits(text, 0, 4, text);
    expect(text, 4, '-');
    const int month = digits(text, 5, 2, text);
    expect(text, 7, '-');
    const int day = digits(text, 8, 2, text);
    if (text.size() <= 10 || (text[10] != 'T' && text[10] != 't' && text[10] != ' ')) bad(text);
    const int hour = digits(text, 11, 2, text);
    expect(text, 13, ':');
    const int minute = digits(text, 14, 2, text);
    expect(text, 16, ':');
    const int second = digits(text, 17, 2, text);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        bad(text);

    std::size_t pos = 19;
    int millis = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        int scale = 100;
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            millis += (text[pos] - '0') * scale;
            scale /= 10;
            ++pos;
        }
        if (pos == start) bad(text);
    }
    const std::string_view zone = text.substr(pos);
    if (zone != "Z" && zone != "z" && zone != "+00:00" && zone != "-00:00") bad(text);

    const std::int64_t days = days_from_civil(year, month, day);
    const std::int64_t ms =
        ((days * 24 + hour) * 60 + minute) * 60'000LL + second * 1000LL + millis;
    return from_unix_millis(ms);
}

std::string format_iso8601(Timestamp t) {
    const std::int64_t ms = to_unix_millis(t);
    std::int64_t days = ms / 86'400'000;
    std::int64_t rem = ms % 86'400'000;
    if (rem < 0) {
        rem += 86'400'000;
        --days;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    const int hh = static_cast<int>(rem / 3'600'000);
    const int mm = static_cast<int>(rem / 60'000 % 60);
    const int ss = static_cast<int>(rem / 1000 % 60);
    const int fff = static_cast<int>(rem % 1000);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d.%03dZ",
                  static_cast<long long>(y), m, d, hh, mm, ss, fff);
    return buf;
}

} // namespace lucid

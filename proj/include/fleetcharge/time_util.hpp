#ifndef FLEETCHARGE_TIME_UTIL_HPP
#define FLEETCHARGE_TIME_UTIL_HPP

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace fleetcharge {

/// Wall-clock instant with one-second resolution. All timestamps are treated as UTC.
using Instant = std::chrono::sys_seconds;

constexpr std::int64_t SECONDS_PER_HOUR = 3600;

/// Parses `YYYY-MM-DDTHH:MM[:SS][Z]` (a space may replace the `T`).
/// Throws std::invalid_argument on anything else.
Instant parse_iso8601(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(Instant t);

inline Instant floor_to_hour(Instant t) {
    return std::chrono::floor<std::chrono::hours>(t);
}

inline double hours_between(Instant a, Instant b) {
    return static_cast<double>((b - a).count()) / SECONDS_PER_HOUR;
}

inline Instant add_hours(Instant t, std::int64_t h) {
    return t + std::chrono::hours{h};
}

/// First instant of the calendar month `YYYY-MM` and of the month after it.
std::pair<Instant, Instant> month_bounds(std::string_view month_id);

/// `YYYY-MM` label of the month containing `t`.
std::string month_label(Instant t);

/// 0 = Sunday ... 6 = Saturday.
unsigned weekday_of(Instant t);

} // namespace fleetcharge

#endif // FLEETCHARGE_TIME_UTIL_HPP

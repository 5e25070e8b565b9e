#include "fleetcharge/time_util.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace fleetcharge {

namespace {

int parse_field(std::string_view text, std::size_t pos, std::size_t len) {
    if (pos + len > text.size()) {
        throw std::invalid_argument("truncated timestamp: '" + std::string(text) + "'");
    }
    int value = 0;
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw std::invalid_argument("malformed timestamp: '" + std::string(text) + "'");
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, std::string_view allowed) {
    if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
        throw std::invalid_argument("malformed timestamp: '" + std::string(text) + "'");
    }
}

} // namespace

Instant parse_iso8601(std::string_view text) {
    using namespace std::chrono;
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    while (!text.empty() && text.front() == ' ') {
        text.remove_prefix(1);
    }
    const int y = parse_field(text, 0, 4);
    expect_char(text, 4, "-");
    const int mo = parse_field(text, 5, 2);
    expect_char(text, 7, "-");
    const int d = parse_field(text, 8, 2);
    expect_char(text, 10, "T ");
    const int hh = parse_field(text, 11, 2);
    expect_char(text, 13, ":");
    const int mm = parse_field(text, 14, 2);
    int ss = 0;
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        ss = parse_field(text, 17, 2);
        pos = 19;
    }
    if (pos < text.size()) {
        auto rest = text.substr(pos);
        if (rest != "Z" && rest != "+00:00") {
            throw std::invalid_argument("unsupported timezone suffix in '" + std::string(text) + "'");
        }
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
        throw std::invalid_argument("invalid calendar value in '" + std::string(text) + "'");
    }
    return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_iso8601(Instant t) {
    using namespace std::chrono;
    const auto day_start = floor<days>(t);
    const year_month_day ymd{day_start};
    const auto secs = (t - day_start).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                  static_cast<long long>(secs % 60));
    return buf;
}

std::pair<Instant, Instant> month_bounds(std::string_view month_id) {
    using namespace std::chrono;
    if (month_id.size() != 7 || month_id[4] != '-') {
        throw std::invalid_argument("month id must be YYYY-MM, got '" + std::string(month_id) + "'");
    }
    const int y = parse_field(month_id, 0, 4);
    const int m = parse_field(month_id, 5, 2);
    if (m < 1 || m > 12) {
        throw std::invalid_argument("month out of range in '" + std::string(month_id) + "'");
    }
    const year_month first{year{y}, month{static_cast<unsigned>(m)}};
    const year_month next = first + months{1};
    return {sys_seconds{sys_days{first / 1}}, sys_seconds{sys_days{next / 1}}};
}

std::string month_label(Instant t) {
    using namespace std::chrono;
    const year_month_day ymd{floor<days>(t)};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()));
    return buf;
}

unsigned weekday_of(Instant t) {
    using namespace std::chrono;
    return weekday{floor<days>(t)}.c_encoding();
}

} // namespace fleetcharge

#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace sq {

using timestamp = std::chrono::sys_seconds;

namespace detail {

inline bool read_int(std::string_view s, std::size_t& pos, int width, int& out)
{
    if (pos + width > s.size()) return false;
    int v = 0;
    for (int i = 0; i < width; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    pos += width;
    out = v;
    return true;
}

}  // namespace detail

/// Parses `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS[.frac]]` with an optional `Z`
/// or `±HH:MM` offset (a space may replace the `T`). Result is UTC; fractional
/// seconds are truncated.
inline std::optional<timestamp> parse_timestamp(std::string_view s)
{
    using namespace std::chrono;
    std::size_t p = 0;
    int y, mo, d, hh = 0, mm = 0, ss = 0;
    if (!detail::read_int(s, p, 4, y) || p >= s.size() || s[p++] != '-') return std::nullopt;
    if (!detail::read_int(s, p, 2, mo) || p >= s.size() || s[p++] != '-') return std::nullopt;
    if (!detail::read_int(s, p, 2, d)) return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    int offset_minutes = 0;
    if (p < s.size()) {
        if (s[p] != 'T' && s[p] != ' ') return std::nullopt;
        ++p;
        if (!detail::read_int(s, p, 2, hh) || p >= s.size() || s[p++] != ':') return std::nullopt;
        if (!detail::read_int(s, p, 2, mm)) return std::nullopt;
        if (p < s.size() && s[p] == ':') {
            ++p;
            if (!detail::read_int(s, p, 2, ss)) return std::nullopt;
            if (p < s.size() && s[p] == '.') {
                ++p;
                std::size_t start = p;
                while (p < s.size() && s[p] >= '0' && s[p] <= '9') ++p;
                if (p == start) return std::nullopt;
            }
        }
        if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
        if (p < s.size()) {
            if (s[p] == 'Z') {
                ++p;
            } else if (s[p] == '+' || s[p] == '-') {
                int sign = s[p] == '+' ? 1 : -1;
                ++p;
                int oh, om;
                if (!detail::read_int(s, p, 2, oh)) return std::nullopt;
                if (p < s.size() && s[p] == ':') ++p;
                if (!detail::read_int(s, p, 2, om)) return std::nullopt;
                offset_minutes = sign * (oh * 60 + om);
            } else {
                return std::nullopt;
            }
        }
        if (p != s.size()) return std::nullopt;
    }
    auto tp = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} - minutes{offset_minutes};
    return time_point_cast<seconds>(tp);
}

/// ISO-8601 UTC rendering, `YYYY-MM-DDTHH:MM:SSZ`.
inline std::string format_timestamp(timestamp t)
{
    using namespace std::chrono;
    auto dp = floor<days>(t);
    year_month_day ymd{dp};
    hh_mm_ss hms{t - dp};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

}  // namespace sq

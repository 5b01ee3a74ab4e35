#include "barriernet/date.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "barriernet/errors.hpp"

namespace barriernet {

namespace {

std::chrono::year_month_day to_ymd(std::int32_t serial) {
    return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{serial}}};
}

}  // namespace

Date::Date(int year, int month, int day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                                    std::chrono::day{unsigned(day)}};
    if (!ymd.ok())
        throw ValidationError("invalid calendar date " + std::to_string(year) + "-" +
                              std::to_string(month) + "-" + std::to_string(day));
    days_ = std::int32_t(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

std::optional<Date> Date::parse(std::string_view iso) {
    // Strict YYYY-MM-DD.
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    auto number = [](std::string_view s, int& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    int y = 0, m = 0, d = 0;
    if (!number(iso.substr(0, 4), y) || !number(iso.substr(5, 2), m) || !number(iso.substr(8, 2), d))
        return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                    std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) return std::nullopt;
    return from_serial(std::int32_t(std::chrono::sys_days{ymd}.time_since_epoch().count()));
}

int Date::year() const { return int(to_ymd(days_).year()); }
int Date::month() const { return int(unsigned(to_ymd(days_).month())); }
int Date::day() const { return int(unsigned(to_ymd(days_).day())); }

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year(), month(), day());
    return buf;
}

bool Date::is_weekend() const {
    std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{days_}}};
    return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

Date Date::next_weekday() const {
    Date d = from_serial(days_ + 1);
    while (d.is_weekend()) d = from_serial(d.days_ + 1);
    return d;
}

}  // namespace barriernet

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace barriernet {

// Calendar day, stored as days since 1970-01-01. Cheap to copy and compare.
class Date {
public:
    Date() = default;
    Date(int year, int month, int day);  // throws ValidationError on an invalid date

    // Parses "YYYY-MM-DD". Returns nullopt on malformed or invalid input.
    static std::optional<Date> parse(std::string_view iso);

    static Date from_serial(std::int32_t days) {
        Date d;
        d.days_ = days;
        return d;
    }

    std::int32_t serial() const { return days_; }

    int year() const;
    int month() const;
    int day() const;

    std::string to_string() const;  // "YYYY-MM-DD"

    bool is_weekend() const;
    Date next_weekday() const;  // the following Mon-Fri day

    auto operator<=>(const Date&) const = default;

private:
    std::int32_t days_ = 0;
};

// Inclusive date interval.
struct DateRange {
    Date begin;
    Date end;

    bool contains(Date d) const { return begin <= d && d <= end; }
    bool valid() const { return begin <= end; }
};

}  // namespace barriernet

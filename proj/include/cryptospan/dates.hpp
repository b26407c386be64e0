#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cryptospan {

/// Calendar date (proleptic Gregorian). All date arithmetic happens in date
/// space; no epoch floats anywhere.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    // days since civil epoch 1970-01-01, Howard Hinnant's algorithm
    std::int64_t serial() const;
    static Date from_serial(std::int64_t days);

    int weekday() const;  // 0 = Sunday .. 6 = Saturday

    Date plus_days(std::int64_t n) const { return from_serial(serial() + n); }

    std::string iso() const;
    static Date parse(const std::string& iso);  // strict YYYY-MM-DD
};

bool is_valid_date(int y, int m, int d);

/// The Friday at or after `d` (identity when d is a Friday).
Date next_friday(const Date& d);

}  // namespace cryptospan

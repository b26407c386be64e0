#include "cryptospan/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace cryptospan {

namespace {

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> len = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
    if (m == 2 && leap(y)) return 29;
    return len[m - 1];
}

}  // namespace

bool is_valid_date(int y, int m, int d) {
    return m >= 1 && m <= 12 && d >= 1 && d <= days_in_month(y, m);
}

std::int64_t Date::serial() const {
    std::int64_t y = year;
    unsigned m = static_cast<unsigned>(month);
    unsigned d = static_cast<unsigned>(day);
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::from_serial(std::int64_t days) {
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                static_cast<int>(d)};
}

int Date::weekday() const {
    std::int64_t s = serial();
    return static_cast<int>(((s % 7) + 11) % 7);  // 1970-01-01 was a Thursday
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(const std::string& iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw std::invalid_argument("bad date format (want YYYY-MM-DD): " + iso);
    auto num = [&](int from, int to) {
        int v = 0;
        auto res = std::from_chars(iso.data() + from, iso.data() + to, v);
        if (res.ec != std::errc{} || res.ptr != iso.data() + to)
            throw std::invalid_argument("bad date format (want YYYY-MM-DD): " + iso);
        return v;
    };
    int y = num(0, 4), m = num(5, 7), d = num(8, 10);
    if (!is_valid_date(y, m, d))
        throw std::invalid_argument("invalid calendar date: " + iso);
    return Date{y, m, d};
}

Date next_friday(const Date& d) {
    int wd = d.weekday();
    int shift = (5 - wd + 7) % 7;
    return d.plus_days(shift);
}

}  // namespace cryptospan

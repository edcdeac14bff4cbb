#include "evofda/dates.hpp"

#include <chrono>
#include <charconv>
#include <stdexcept>

namespace evofda {

namespace {

int parse_int_field(std::string_view s, const char* what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument(std::string("bad date ") + what + ": '" + std::string(s) + "'");
    return value;
}

} // namespace

Date Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw std::invalid_argument("date not in YYYY-MM-DD form: '" + std::string(text) + "'");
    const int y = parse_int_field(text.substr(0, 4), "year");
    const int m = parse_int_field(text.substr(5, 2), "month");
    const int d = parse_int_field(text.substr(8, 2), "day");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                          std::chrono::day{unsigned(d)}};
    if (!ymd.ok())
        throw std::invalid_argument("impossible calendar date: '" + std::string(text) + "'");
    return Date(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

std::string Date::to_iso() const {
    const std::chrono::sys_days sd{std::chrono::days{days_}};
    const std::chrono::year_month_day ymd{sd};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

} // namespace evofda

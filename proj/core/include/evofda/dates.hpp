#pragma once

#include <string>
#include <string_view>

namespace evofda {

/// Calendar date stored as a count of days since 1970-01-01.
/// Only the arithmetic needed for release histories: parse, format, subtract.
class Date {
public:
    Date() = default;
    explicit Date(long days_since_epoch) : days_(days_since_epoch) {}

    /// Parses strict ISO-8601 "YYYY-MM-DD". Throws std::invalid_argument on
    /// malformed text or an impossible calendar date (e.g. 2003-02-30).
    static Date parse(std::string_view text);

    long days_since_epoch() const { return days_; }
    std::string to_iso() const;

    friend long operator-(Date a, Date b) { return a.days_ - b.days_; }
    Date operator+(long days) const { return Date(days_ + days); }
    auto operator<=>(const Date&) const = default;

private:
    long days_ = 0;
};

} // namespace evofda

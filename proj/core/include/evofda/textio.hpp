#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evofda {

/// Error carrying the 1-based line number of the offending input line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

/// Shortest round-trip decimal form of a double (std::to_chars). Used for all
/// data files so identical runs emit identical bytes.
std::string format_double(double v);

double parse_double(std::string_view s, std::size_t line);
long parse_long(std::string_view s, std::size_t line);

/// Splits text into lines; accepts \n and \r\n, no trailing phantom line.
std::vector<std::string_view> split_lines(std::string_view text);

/// Splits a CSV record on commas. Fields are taken verbatim; the formats used
/// here never contain quoted fields.
std::vector<std::string_view> split_csv(std::string_view line);

std::string_view trim(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace evofda

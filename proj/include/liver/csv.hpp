#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace liver::csv {

/// Shortest representation that parses back to the identical double.
std::string format(double v);

std::vector<std::string> split(std::string_view line, char sep = ',');

double to_double(const std::string& field, std::string_view what);
std::int64_t to_int(const std::string& field, std::string_view what);

/// Header-checked row reader. Blank lines are skipped; every error message
/// carries the 1-based line number.
class Reader {
public:
    Reader(std::istream& in, std::vector<std::string> expected_header);

    /// False at end of input.
    bool next();
    const std::string& operator[](std::size_t column) const { return row_.at(column); }
    double real(std::size_t column) const;
    std::int64_t integer(std::size_t column) const;
    std::size_t line() const { return line_; }
    [[noreturn]] void fail(const std::string& message) const;

private:
    std::istream& in_;
    std::vector<std::string> header_;
    std::vector<std::string> row_;
    std::size_t columns_ = 0;
    std::size_t line_ = 0;
};

} // namespace liver::csv

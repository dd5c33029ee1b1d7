#include "liver/csv.hpp"

#include <charconv>
#include <istream>
#include <system_error>

#include "liver/common.hpp"

namespace liver::csv {

std::string format(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double to_double(const std::string& field, std::string_view what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw Error("invalid number '" + field + "' for " + std::string(what));
    return v;
}

std::int64_t to_int(const std::string& field, std::string_view what) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw Error("invalid integer '" + field + "' for " + std::string(what));
    return v;
}

namespace {

bool read_line(std::istream& in, std::string& line, std::size_t& counter) {
    while (std::getline(in, line)) {
        ++counter;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return true;
    }
    return false;
}

} // namespace

Reader::Reader(std::istream& in, std::vector<std::string> expected_header)
    : in_(in), header_(expected_header), columns_(expected_header.size()) {
    std::string line;
    if (!read_line(in_, line, line_)) throw Error("empty CSV: expected header '" + expected_header.front() + ",...'");
    const auto header = split(line);
    for (std::size_t i = 0; i < expected_header.size(); ++i) {
        if (i >= header.size()) fail("header is missing column '" + expected_header[i] + "'");
        if (header[i] != expected_header[i])
            fail("header mismatch in column " + std::to_string(i + 1) + ": expected '" + expected_header[i] +
                 "', found '" + header[i] + "'");
    }
    if (header.size() != expected_header.size()) fail("header has unexpected extra column '" + header[columns_] + "'");
}

bool Reader::next() {
    std::string line;
    if (!read_line(in_, line, line_)) return false;
    row_ = split(line);
    if (row_.size() != columns_)
        fail("expected " + std::to_string(columns_) + " fields, found " + std::to_string(row_.size()));
    return true;
}

double Reader::real(std::size_t column) const {
    try {
        return to_double(row_.at(column), header_.at(column));
    } catch (const Error& e) {
        fail(e.what());
    }
}

std::int64_t Reader::integer(std::size_t column) const {
    try {
        return to_int(row_.at(column), header_.at(column));
    } catch (const Error& e) {
        fail(e.what());
    }
}

void Reader::fail(const std::string& message) const { throw Error("line " + std::to_string(line_) + ": " + message); }

} // namespace liver::csv

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "merplan/errors.hpp"

namespace merplan::csv {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view line, char delim = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == delim) {
            out.emplace_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !s.empty();
}

inline bool parse_int(std::string_view s, long long& out) {
    s = trim(s);
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !s.empty();
}

inline double require_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    if (!parse_double(s, v)) {
        throw ParseError(context + ": expected a number, got '" + std::string(s) + "'");
    }
    return v;
}

inline long long require_int(std::string_view s, const std::string& context) {
    long long v = 0;
    if (!parse_int(s, v)) {
        throw ParseError(context + ": expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

/// Shortest round-trip decimal representation. Used for all numeric file
/// output so artifacts are byte-stable and parse back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

/// Rows of a delimited file, with blank lines and '#' comments removed.
/// Each entry is (1-based line number, cells).
inline std::vector<std::pair<int, std::vector<std::string>>> read_rows(std::istream& in) {
    std::vector<std::pair<int, std::vector<std::string>>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        rows.emplace_back(lineno, split(sv));
    }
    return rows;
}

inline std::vector<std::pair<int, std::vector<std::string>>> read_rows_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    return read_rows(in);
}

}  // namespace merplan::csv

#pragma once

#include <charconv>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bldgsim::core {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;   // 1-based source line of each row
    std::string source;

    /// Index of `name` in the header or npos.
    std::size_t column(std::string_view name) const;
    /// Like column() but throws ParseError naming the file.
    std::size_t require_column(std::string_view name) const;
    /// Parses a finite double; errors name file, line and column.
    double number(std::size_t row, std::size_t col) const;
};

/// Plain comma separated values, first line a header. Blank lines and lines
/// starting with '#' are skipped. No quoting.
CsvTable read_csv(std::istream& in, std::string source = "<stream>");
CsvTable read_csv_file(const std::string& path);

/// Shortest representation that round-trips to the same double.
std::string format_double(double v);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

} // namespace bldgsim::core

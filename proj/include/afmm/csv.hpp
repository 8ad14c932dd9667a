#pragma once

// Minimal CSV reading/writing shared by all emitters. Values never contain
// commas or quotes, so no quoting layer; readers validate headers and report
// 1-based line numbers in errors.

#include <string>
#include <vector>
#include <iosfwd>

namespace afmm {

// Shortest round-trip decimal form (std::to_chars); "nan" for NaN.
std::string format_double(double value);

// strtod with full-consumption check; throws DataError with context on failure.
double parse_double(const std::string& field, const std::string& context);

long parse_long(const std::string& field, const std::string& context);

std::vector<std::string> split_csv_line(const std::string& line);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const; // -1 if absent
};

// Reads all rows; requires a header line; rows must match header width.
CsvTable read_csv(std::istream& in, const std::string& source_name);
CsvTable read_csv_file(const std::string& path);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

} // namespace afmm

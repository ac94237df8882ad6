#pragma once

#include <string>
#include <vector>

namespace csdflow::textio {

// 17 significant digits, round-trippable.
std::string format_double(double x);
// Whole-string parse; throws ConfigParse naming `what` on failure.
double parse_double(const std::string& text, const std::string& what);
long parse_long(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text, const std::string& what);

std::string trim(const std::string& s);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

// Reads a numeric CSV whose header must start with `expected` (extra trailing
// columns allowed). Failures throw DataFormat with the file name.
CsvTable read_csv(const std::string& path, const std::vector<std::string>& expected);

// Formats one CSV row. Empty optional cells are written as "".
std::string csv_row(const std::vector<double>& values);

} // namespace csdflow::textio

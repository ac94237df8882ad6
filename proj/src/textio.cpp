#include "csdflow/textio.hpp"

#include "csdflow/errors.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace csdflow::textio {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

namespace {

bool to_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* begin = t.data();
    const char* end = begin + t.size();
    if (*begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

} // namespace

double parse_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    if (!to_double(text, v)) fail(ErrorKind::ConfigParse, "cannot parse " + what + " from '" + text + "'");
    return v;
}

long parse_long(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        fail(ErrorKind::ConfigParse, "cannot parse integer " + what + " from '" + text + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item, what));
    if (out.empty()) fail(ErrorKind::ConfigParse, "empty list for " + what);
    return out;
}

CsvTable read_csv(const std::string& path, const std::vector<std::string>& expected) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::DataFormat, path + ": cannot open file");
    auto bad = [&](std::size_t line, const std::string& msg) {
        fail(ErrorKind::DataFormat, path + ":" + std::to_string(line) + ": " + msg);
    };
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) bad(1, "missing header");
    ++lineno;
    {
        std::stringstream ss(trim(line));
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(trim(cell));
    }
    if (table.header.size() < expected.size()) bad(1, "header has too few columns");
    for (std::size_t j = 0; j < expected.size(); ++j)
        if (table.header[j] != expected[j]) bad(1, "expected column '" + expected[j] + "', found '" + table.header[j] + "'");
    table.columns.resize(table.header.size());
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t j = 0;
        while (std::getline(ss, cell, ',')) {
            if (j >= table.columns.size()) bad(lineno, "too many columns");
            double v = 0.0;
            if (trim(cell).empty()) v = std::nan("");
            else if (!to_double(cell, v)) bad(lineno, "non-numeric value '" + trim(cell) + "'");
            table.columns[j++].push_back(v);
        }
        if (j < expected.size()) bad(lineno, "too few columns");
        for (; j < table.columns.size(); ++j) table.columns[j].push_back(std::nan(""));
    }
    for (std::size_t j = 0; j < expected.size(); ++j)
        for (std::size_t i = 0; i < table.columns[j].size(); ++i)
            if (!std::isfinite(table.columns[j][i])) bad(i + 2, "non-finite value in column '" + expected[j] + "'");
    return table;
}

std::string csv_row(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        if (!std::isnan(values[i])) out += format_double(values[i]);
    }
    return out;
}

} // namespace csdflow::textio

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cotrack/errors.hpp"

namespace cotrack {

/// 17 significant digits: enough for a bit-exact double round trip through
/// decimal text.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": expected a number, got '" + s + "'");
    }
}

inline long long parse_int(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": expected an integer, got '" + s + "'");
    }
}

/// Split one CSV line; supports double-quoted fields (used by the active-AP
/// column that embeds commas).
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows; // data rows, header excluded
};

/// Read a CSV file and check its header against `expected_header`
/// (exact order, exact names) and every row's field count.
inline CsvTable read_csv(const std::string& path,
                         const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": missing header row");
    table.header = split_csv_line(line);
    if (table.header != expected_header) {
        std::string want;
        for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
        throw ParseError(path + ": header mismatch, expected '" + want + "'");
    }
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != expected_header.size())
            throw ParseError(path + ": row " + std::to_string(row) + ": expected " +
                             std::to_string(expected_header.size()) + " columns, got " +
                             std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    return table;
}

inline std::string csv_context(const std::string& path, int row, const std::string& col) {
    return path + ": row " + std::to_string(row) + ", column " + col;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace cotrack

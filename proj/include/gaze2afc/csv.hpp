#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gaze2afc/error.hpp"

namespace gaze2afc {

/// A parsed CSV file: one header row plus data rows, all as raw strings.
struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // 1-based source line per data row

    /// Index of a header column, or -1 when absent.
    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }

    /// Index of a required header column.
    int require_column(const std::string& name) const {
        const int i = column(name);
        if (i < 0) throw Error(path + ": missing required column '" + name + "'");
        return i;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

} // namespace detail

/// Reads a whole CSV file. Blank lines are skipped; fields are comma-split
/// and whitespace-trimmed. Quoting is not supported; none of the pipeline
/// formats need it.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    CsvTable table;
    table.path = path;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        auto fields = detail::split_csv_line(t);
        if (table.header.empty()) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size())
                throw MalformedRow(path, line_no, "expected " + std::to_string(table.header.size()) +
                                                      " fields, got " + std::to_string(fields.size()));
            table.rows.push_back(std::move(fields));
            table.line_numbers.push_back(line_no);
        }
    }
    if (table.header.empty()) throw Error(path + ": empty file");
    return table;
}

/// Strict double parse; the whole field must be consumed.
inline double parse_double_field(const CsvTable& t, std::size_t row, int col) {
    const std::string& s = t.rows[row][static_cast<std::size_t>(col)];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw MalformedRow(t.path, t.line_numbers[row], "not a number: '" + s + "'");
    return v;
}

inline long parse_int_field(const CsvTable& t, std::size_t row, int col) {
    const std::string& s = t.rows[row][static_cast<std::size_t>(col)];
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw MalformedRow(t.path, t.line_numbers[row], "not an integer: '" + s + "'");
    return v;
}

/// Fixed-precision decimal formatting so emitted files are byte-stable.
inline std::string fmt_fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

/// Line-oriented CSV writer.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path), path_(path) {
        if (!out_) throw Error("cannot write " + path);
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    const std::string& path() const { return path_; }

  private:
    std::ofstream out_;
    std::string path_;
};

} // namespace gaze2afc

#pragma once

// Plain-text persistence: numeric CSV tables and small file helpers.
// Floats serialize at 17 significant digits so a write/read round trip is
// bit-exact. CSV files are comma-separated, one header row, LF line endings,
// and end with a trailing newline.

#include <Eigen/Dense>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdemap {

using Eigen::MatrixXd;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Rectangular table of doubles with named columns; values(i, j) is row i of
// column columns[j].
struct CsvTable {
    std::vector<std::string> columns;
    MatrixXd values;

    long rows() const { return values.rows(); }
    long cols() const { return static_cast<long>(columns.size()); }

    long column_index(const std::string& name) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == name) return static_cast<long>(j);
        throw IoError("missing column: " + name);
    }

    Eigen::VectorXd column(const std::string& name) const {
        return values.col(column_index(name));
    }
};

inline std::string to_csv_text(const CsvTable& table) {
    if (table.columns.empty()) throw IoError("a table needs at least one column");
    if (table.values.cols() != static_cast<long>(table.columns.size()))
        throw IoError("table width does not match the header");
    std::string out;
    out.reserve(static_cast<std::size_t>((table.values.rows() + 1) * table.values.cols() * 20));
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out += ',';
        out += table.columns[j];
    }
    out += '\n';
    for (long i = 0; i < table.values.rows(); ++i) {
        for (long j = 0; j < table.values.cols(); ++j) {
            if (j) out += ',';
            out += format_g17(table.values(i, j));
        }
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace detail

inline CsvTable parse_csv_text(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw IoError("empty CSV");

    CsvTable table;
    table.columns = detail::split_fields(lines[0]);
    const long width = static_cast<long>(table.columns.size());
    table.values.resize(static_cast<long>(lines.size()) - 1, width);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = detail::split_fields(lines[i]);
        if (static_cast<long>(fields.size()) != width)
            throw IoError("CSV row " + std::to_string(i) + " has " + std::to_string(fields.size())
                          + " fields, expected " + std::to_string(width));
        for (long j = 0; j < width; ++j) {
            const std::string& f = fields[static_cast<std::size_t>(j)];
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || (end && *end != '\0'))
                throw IoError("CSV row " + std::to_string(i) + ", column " + table.columns[j]
                              + ": not a number: '" + f + "'");
            table.values(static_cast<long>(i) - 1, j) = v;
        }
    }
    return table;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return content;
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    write_text_file(path, to_csv_text(table));
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    try {
        return parse_csv_text(read_text_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace sdemap

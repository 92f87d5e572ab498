#include "pnmf/csv.hpp"

#include "pnmf/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pnmf::io {

namespace {

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line,
                              const std::string& what) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": " + what);
}

bool skippable(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;   // blank
}

double parse_double(std::string_view field, const std::filesystem::path& path,
                    std::size_t line) {
    // Trim surrounding whitespace; from_chars is locale-independent.
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
        field.remove_prefix(1);
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
        field.remove_suffix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        parse_error(path, line, "not a number: '" + std::string(field) + "'");
    if (!std::isfinite(value))
        parse_error(path, line, "non-finite value");
    return value;
}

std::vector<std::vector<double>> read_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (skippable(line)) continue;

        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view field(line.data() + start,
                                         (comma == std::string::npos ? line.size() : comma) -
                                             start);
            row.push_back(parse_double(field, path, lineno));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            parse_error(path, lineno,
                        "expected " + std::to_string(rows.front().size()) + " fields, got " +
                            std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw IoError(path.string() + ": no data rows");
    return rows;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    return out;
}

void write_comment(std::ofstream& out, const std::string& comment) {
    if (comment.empty()) return;
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
}

void check_stream(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out)
        throw IoError("write failed: " + path.string());
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
    const auto rows = read_rows(path);
    DenseMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m,
                      const std::string& comment) {
    std::ofstream out = open_out(path);
    write_comment(out, comment);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    check_stream(out, path);
}

std::vector<int> read_labels_csv(const std::filesystem::path& path) {
    const auto rows = read_rows(path);
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 1)
            throw IoError(path.string() + ": labels must be a single column");
        const double v = rows[i][0];
        if (v != std::floor(v) || std::abs(v) > 2147483647.0)
            throw IoError(path.string() + ": label is not an integer: " + format_double(v));
        labels.push_back(static_cast<int>(v));
    }
    return labels;
}

void write_labels_csv(const std::filesystem::path& path, std::span<const int> labels,
                      const std::string& comment) {
    std::ofstream out = open_out(path);
    write_comment(out, comment);
    for (int v : labels) out << v << '\n';
    check_stream(out, path);
}

std::vector<double> read_vector_csv(const std::filesystem::path& path) {
    const auto rows = read_rows(path);
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& row : rows) {
        if (row.size() != 1)
            throw IoError(path.string() + ": expected a single column");
        values.push_back(row[0]);
    }
    return values;
}

void write_vector_csv(const std::filesystem::path& path, std::span<const double> values,
                      const std::string& comment) {
    std::ofstream out = open_out(path);
    write_comment(out, comment);
    for (double v : values) out << format_double(v) << '\n';
    check_stream(out, path);
}

} // namespace pnmf::io

#pragma once

#include "pnmf/matrix.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pnmf::io {

/// Comma-separated numeric matrix: no header, '.' decimal, one row per line.
/// Lines starting with '#' and blank lines are skipped on read. Values are
/// written with 17 significant digits, so write-then-read round-trips doubles
/// exactly. Parse failures throw IoError naming the file and line.
DenseMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m,
                      const std::string& comment = {});

/// Single-column integer labels.
std::vector<int> read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, std::span<const int> labels,
                      const std::string& comment = {});

/// Single-column doubles (scales, traces, ...).
std::vector<double> read_vector_csv(const std::filesystem::path& path);
void write_vector_csv(const std::filesystem::path& path, std::span<const double> values,
                      const std::string& comment = {});

std::string format_double(double v);   ///< %.17g

} // namespace pnmf::io

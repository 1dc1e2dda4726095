#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nsbfm::csv {

/// 17 significant digits, which parses back to the identical double.
std::string format_double(double v);

/// Strict parse of a whole field; throws ParseError citing (row, col).
double parse_double(std::string_view field, std::size_t row, std::size_t col);

std::vector<std::string_view> split_fields(std::string_view line);

/// Reads all lines of a text file; a trailing newline does not add an empty
/// row. Throws IoError when the file cannot be opened.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Headerless numeric matrix, one row per line. Rows must all have the same
/// width; a file of empty lines is a matrix with zero columns.
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Writes a header line followed by rows. Throws IoError on failure.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

}  // namespace nsbfm::csv

#include "nsbfm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nsbfm/error.hpp"

namespace nsbfm::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path);
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed", path);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, std::size_t row, std::size_t col) {
  const std::string_view f = trim(field);
  if (f == "nan" || f == "NaN") return std::nan("");
  double v = 0.0;
  const char* first = f.data();
  if (!f.empty() && f.front() == '+') ++first;
  const auto res = std::from_chars(first, f.data() + f.size(), v);
  if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size()) {
    throw ParseError("not a number '" + std::string(f) + "' at row " + std::to_string(row) + ", col " +
                         std::to_string(col),
                     row, col);
  }
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  line = trim(line);
  if (line.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size());
  std::size_t width = 0;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r]);
    if (r == 0) width = fields.size();
    if (fields.size() != width) {
      throw ParseError(path.string() + ": row " + std::to_string(r + 1) + " has " +
                           std::to_string(fields.size()) + " fields, expected " + std::to_string(width),
                       r + 1, std::min(fields.size(), width) + 1);
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) row[c] = parse_double(fields[c], r + 1, c + 1);
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_for_write(path);
  std::string line;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) line += ',';
      line += format_double(m(r, c));
    }
    line += '\n';
    out << line;
  }
  finish(out, path);
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  auto out = open_for_write(path);
  auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << fields[i];
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  finish(out, path);
}

}  // namespace nsbfm::csv

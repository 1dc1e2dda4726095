#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace nsbfm {

/// Malformed input data. Row and column are 1-based file positions; 0 means
/// "not applicable".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t col = 0)
      : std::runtime_error(what), row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::filesystem::path path)
      : std::runtime_error(what + ": " + path.string()), path_(std::move(path)) {}
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// A computation that cannot proceed on the given numbers (rank deficiency,
/// too few observations for a statistic).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nsbfm

#include "config_file.hpp"

#include "nsbfm/csv.hpp"
#include "nsbfm/error.hpp"

namespace nsbfm::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto lines = csv::read_lines(path);
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::string_view line = lines[r];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(path.string() + ": line " + std::to_string(r + 1) + " is not key=value", r + 1, 1);
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty()) throw ParseError(path.string() + ": empty key on line " + std::to_string(r + 1), r + 1, 1);
    out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace nsbfm::cli

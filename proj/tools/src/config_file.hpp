#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace nsbfm::cli {

/// `key=value` lines; `#` starts a comment, blank lines are ignored, keys and
/// values are trimmed. Throws ParseError on a line without '='.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

}  // namespace nsbfm::cli

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chainhash {

// One entry per line, UTF-8. A trailing '\r' is dropped and blank lines are
// skipped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string> split_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace chainhash

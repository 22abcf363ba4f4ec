#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mwlab {

// Shortest round-trip decimal form of a double ("0.1", "1e-05", "nan").
std::string format_number(double v);

// Reads all lines of a text file; throws IoError naming the path when the
// file cannot be opened.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes `content` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace mwlab

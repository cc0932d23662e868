#pragma once

#include <filesystem>
#include <string>

namespace disent {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace disent

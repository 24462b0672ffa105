#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace zskg {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames over the target, so readers never
// observe a partial file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string strip(std::string_view s);
std::string rstrip(std::string_view s);

}  // namespace zskg

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dpa {

// Writes `content` to a sibling temp file and renames it over `path`, so a
// reader never observes a partially written artifact. Creates parent dirs.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace dpa

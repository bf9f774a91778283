#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sgmlab::io {

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Throws DomainError naming the path when it cannot be read.
std::string read_file(const std::filesystem::path& path);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string digest(std::string_view bytes);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace sgmlab::io

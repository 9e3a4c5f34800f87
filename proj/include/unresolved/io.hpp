#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace unresolved {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// 64-bit FNV-1a, rendered as 16 hex digits. Used for manifest digests only.
std::string fnv1a_hex(std::string_view bytes);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

// Minimal CSV: no quoting (all our fields are numeric or bare words).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace unresolved

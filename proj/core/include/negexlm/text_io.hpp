#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace negexlm {

/// Lines of text without their terminators. A trailing newline does not
/// produce an empty final line.
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
/// Splits on runs of spaces/tabs, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string_view trim(std::string_view s);

/// Whole-file I/O; failures throw std::runtime_error naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace negexlm

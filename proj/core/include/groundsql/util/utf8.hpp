#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace groundsql::util {

// Offsets exposed through the API count Unicode code points, not bytes.
std::size_t codepoint_count(std::string_view text);

/// Byte offset of code point `cp` (clamped to text.size()).
std::size_t byte_offset(std::string_view text, std::size_t cp);

std::string substr_codepoints(std::string_view text, std::size_t start, std::size_t end);

std::u32string decode(std::string_view text);

}  // namespace groundsql::util

#include "groundsql/util/utf8.hpp"

namespace groundsql::util {

namespace {

bool continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

}  // namespace

std::size_t codepoint_count(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) n += continuation(static_cast<unsigned char>(c)) ? 0 : 1;
  return n;
}

std::size_t byte_offset(std::string_view text, std::size_t cp) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (continuation(static_cast<unsigned char>(text[i]))) continue;
    if (seen == cp) return i;
    ++seen;
  }
  return text.size();
}

std::string substr_codepoints(std::string_view text, std::size_t start, std::size_t end) {
  const std::size_t b = byte_offset(text, start);
  const std::size_t e = byte_offset(text, end);
  if (e <= b) return {};
  return std::string(text.substr(b, e - b));
}

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = c;
    if (c >= 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if (c >= 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    }
    ++i;
    for (int k = 0; k < extra && i < text.size() && continuation(static_cast<unsigned char>(text[i])); ++k, ++i) {
      cp = (cp << 6) | (static_cast<unsigned char>(text[i]) & 0x3F);
    }
    out.push_back(cp);
  }
  return out;
}

}  // namespace groundsql::util

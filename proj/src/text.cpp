#include "propdet/text.hpp"

namespace propdet {

namespace {

[[noreturn]] void fail_at(std::size_t pos, const char* what) {
  throw Utf8Error("invalid UTF-8 at byte " + std::to_string(pos) + ": " + what);
}

}  // namespace

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const unsigned char b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2; cp = b0 & 0x1F; min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3; cp = b0 & 0x0F; min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4; cp = b0 & 0x07; min = 0x10000;
    } else {
      fail_at(i, "invalid lead byte");
    }
    if (i + static_cast<std::size_t>(len) > bytes.size()) {
      fail_at(i, "truncated sequence");
    }
    for (int k = 1; k < len; ++k) {
      const unsigned char b = static_cast<unsigned char>(bytes[i + k]);
      if ((b & 0xC0) != 0x80) fail_at(i + k, "missing continuation byte");
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min) fail_at(i, "overlong encoding");
    if (cp > 0x10FFFF) fail_at(i, "code point above U+10FFFF");
    if (cp >= 0xD800 && cp <= 0xDFFF) fail_at(i, "surrogate code point");
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) out += encode_utf8(cp);
  return out;
}

std::size_t codepoint_length(std::string_view bytes) {
  return decode_utf8(bytes).size();
}

std::string codepoint_slice(std::string_view bytes, std::size_t begin,
                            std::size_t end) {
  const std::u32string text = decode_utf8(bytes);
  if (begin > end || end > text.size()) {
    throw std::out_of_range("codepoint_slice: [" + std::to_string(begin) +
                            ", " + std::to_string(end) +
                            ") out of range for length " +
                            std::to_string(text.size()));
  }
  return encode_utf8(
      std::u32string_view(text).substr(begin, end - begin));
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace propdet

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace propdet {

struct Utf8Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Strict decoder: rejects truncated sequences, overlong encodings,
// surrogates and code points above U+10FFFF.
std::u32string decode_utf8(std::string_view bytes);

std::string encode_utf8(std::u32string_view text);
std::string encode_utf8(char32_t cp);

// Number of code points. All span offsets in this codebase count code
// points, never bytes.
std::size_t codepoint_length(std::string_view bytes);

// Slice [begin, end) in code-point offsets, re-encoded as UTF-8.
// Throws std::out_of_range when end exceeds the text length.
std::string codepoint_slice(std::string_view bytes, std::size_t begin,
                            std::size_t end);

// ASCII-only lowering; non-ASCII bytes pass through untouched.
std::string ascii_lower(std::string_view s);

}  // namespace propdet

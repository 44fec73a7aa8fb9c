#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fact5w::text {

/// Minimal UTF-8 / codepoint utilities.
///
/// Classification tables cover ASCII, Latin-1, Latin Extended-A/B, Greek and
/// Cyrillic; codepoints outside those ranges are treated as plain word
/// characters (not letters, not punctuation). The dataset this library
/// targets is English, so the tables are intentionally small and fully
/// documented here rather than pulled from ICU.

inline constexpr char32_t kReplacementChar = 0xFFFD;

/// Decodes the codepoint starting at byte offset `i`, advancing `i` past it.
/// Invalid sequences decode to U+FFFD and consume exactly one byte.
char32_t decode_utf8(std::string_view s, std::size_t& i);

/// Full decode; invalid bytes become U+FFFD.
std::u32string decode_utf8(std::string_view s);

/// Appends `cp` to `out` as UTF-8.
void append_utf8(std::string& out, char32_t cp);

bool is_space(char32_t cp);
bool is_digit(char32_t cp);
bool is_punct(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
bool is_alpha(char32_t cp);

char32_t to_lower(char32_t cp);

/// UTF-8 aware lowercase over the covered ranges; other codepoints unchanged.
std::string lower_copy(std::string_view s);

/// Number of codepoints (invalid bytes count as one replacement char each).
std::size_t codepoint_count(std::string_view s);

} // namespace fact5w::text

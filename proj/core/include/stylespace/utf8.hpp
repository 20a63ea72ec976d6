#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace stylespace::utf8 {

/// Decodes UTF-8 into Unicode scalar values. Returns nullopt on malformed
/// input (overlongs, surrogates, truncated sequences).
std::optional<std::u32string> decode(std::string_view bytes);

std::string encode(std::u32string_view text);
std::string encode(char32_t c);

bool is_letter(char32_t c);
bool is_digit(char32_t c);
bool is_space(char32_t c);
bool is_apostrophe(char32_t c);

/// Simple case mapping covering Basic Latin, Latin-1, Latin Extended-A,
/// Greek and Cyrillic. Other code points map to themselves.
char32_t to_lower(char32_t c);
bool is_upper(char32_t c);

std::u32string to_lower(std::u32string_view text);

/// Trims ASCII and Unicode whitespace from both ends.
std::u32string_view trim(std::u32string_view text);

}  // namespace stylespace::utf8

/// @file text.hpp
/// @brief UTF-8 helpers: NFC normalization, lowercasing and whitespace tokenization.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vizpod::text {

/// NFC-normalizes UTF-8 input. Invalid sequences are replaced with U+FFFD.
std::string nfc(std::string_view utf8);

/// Full Unicode lowercase (root locale).
std::string lowercase(std::string_view utf8);

/// Splits on runs of Unicode White_Space. Tokens keep attached punctuation.
std::vector<std::string> tokenize(std::string_view utf8);

/// Number of tokens tokenize() would return, without allocating them.
std::size_t count_tokens(std::string_view utf8);

/// Collapses whitespace runs to a single ASCII space and trims both ends.
std::string collapse_whitespace(std::string_view utf8);

/// Removes "(...)" and "[...]" spans, e.g. "(laughs)" or "[laughter]".
std::string strip_stage_directions(std::string_view utf8);

std::string trim(std::string_view s);

}  // namespace vizpod::text

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by parsers, scoring and token estimation.
namespace context_drift::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

/// Whitespace-delimited tokens.
std::vector<std::string_view> split_ws(std::string_view s);
std::size_t count_ws_tokens(std::string_view s) noexcept;

std::vector<std::string_view> split_lines(std::string_view s);

/// Splits prose into sentences at '.', '?', '!' and line breaks. The
/// terminator is kept with its sentence; empty pieces are dropped.
std::vector<std::string_view> split_sentences(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool is_word_char(char c) noexcept;

/// Replaces whole-word occurrences of `word` (bounded by non-word characters
/// or the string ends) with `replacement`.
std::string replace_whole_word(std::string_view s, std::string_view word, std::string_view replacement);

bool contains_whole_word(std::string_view s, std::string_view word) noexcept;

}  // namespace context_drift::text

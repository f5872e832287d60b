#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace audsem::text {

bool is_space(char c) noexcept;

std::string_view trim_view(std::string_view s) noexcept;
std::string trim(std::string_view s);

std::string to_lower(std::string_view s);

// Maximal runs of non-whitespace characters.
std::vector<std::string_view> split_words(std::string_view s);

// Number of maximal non-whitespace runs. This is the word count used for
// thinking budgets and caption length bounds.
std::size_t word_count(std::string_view s) noexcept;

// Runs of ASCII alphanumerics, lowercased.
std::vector<std::string> alnum_tokens(std::string_view s);

// Shortest round-trip decimal for a double, always with a fractional part
// ("3.0", "7.5", "0.125").
std::string format_seconds(double value);

// Fixed-point formatting with the given number of decimals.
std::string format_fixed(double value, int decimals);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

bool starts_with(std::string_view s, std::string_view prefix) noexcept;

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string base64_encode(std::string_view bytes);

}  // namespace audsem::text

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qvpn {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

double parse_double(std::string_view token, std::string_view what, std::size_t line = 0);
long long parse_int(std::string_view token, std::string_view what, std::size_t line = 0);
std::uint64_t parse_u64(std::string_view token, std::string_view what, std::size_t line = 0);

/// Whitespace tokenization with `#` starting a comment.
std::vector<std::string> tokenize_line(std::string_view line);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

}  // namespace qvpn

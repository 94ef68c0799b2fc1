#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit::utf8 {

bool is_valid(std::string_view bytes);

/// Replaces every invalid byte sequence with U+FFFD.
std::string replace_invalid(std::string_view bytes);

/// Byte offset of each Unicode scalar value plus a final sentinel equal to
/// the byte length, so offsets.size() == scalar count + 1. Input must be
/// valid UTF-8.
std::vector<std::size_t> codepoint_offsets(std::string_view text);

/// Number of Unicode scalar values in valid UTF-8.
std::size_t length(std::string_view text);

/// First max_chars scalar values of valid UTF-8 text.
std::string truncate(std::string_view text, std::size_t max_chars);

}  // namespace ragkit::utf8

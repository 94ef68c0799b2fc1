#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit::util {

/// 64-bit FNV-1a over raw bytes. Used for chunk identifiers, the mock
/// embedding, checkpoint fingerprints, and the manifest checksum.
std::uint64_t fnv1a64(std::string_view bytes);

/// Lowercase hex rendering, no leading zeros stripped (16 digits).
std::string hex64(std::uint64_t value);

std::string ascii_lower(std::string_view s);

std::string_view trim(std::string_view s);

/// Whitespace-delimited tokens (ASCII whitespace).
std::vector<std::string> whitespace_tokens(std::string_view s);

/// Current time as "YYYY-MM-DDTHH:MM:SSZ".
std::string now_utc_iso8601();

/// Compact variant for directory names: "YYYYMMDDTHHMMSSZ".
std::string now_utc_compact();

/// Random RFC-4122 version-4 UUID.
std::string uuid4();

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Debug logging to stderr, enabled by RAGKIT_DEBUG=1.
bool debug_enabled();
void log_debug(const std::string& message);

}  // namespace ragkit::util

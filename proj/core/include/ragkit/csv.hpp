#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ragkit::csv {

/// RFC-4180 parse of a whole document: quoted fields, escaped quotes,
/// embedded commas and line breaks. CRLF and LF both accepted. A trailing
/// newline does not produce an empty record.
std::vector<std::vector<std::string>> parse(std::string_view text);

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape_field(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

}  // namespace ragkit::csv

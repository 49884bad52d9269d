#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cardnet::detail {

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines. CRLF and LF line endings are both accepted.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);

}  // namespace cardnet::detail

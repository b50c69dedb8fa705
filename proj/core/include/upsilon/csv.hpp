#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace upsilon::csv {

using Record = std::vector<std::string>;

// RFC-4180 style: comma separated, double-quote escaping, CRLF or LF line
// ends. Blank lines are skipped.
std::vector<Record> parse(std::string_view text);

std::string format_field(std::string_view field);
std::string format_record(const Record& r);

}  // namespace upsilon::csv

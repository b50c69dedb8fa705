#include "upsilon/csv.hpp"

#include "upsilon/error.hpp"

namespace upsilon::csv {

std::vector<Record> parse(std::string_view text) {
  std::vector<Record> out;
  Record current;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_record = [&] {
    if (field_started || !current.empty()) {
      current.push_back(std::move(field));
      out.push_back(std::move(current));
    }
    current.clear();
    field.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) {
          throw Error(ErrorCode::MalformedCsv, "stray quote on line " + std::to_string(line));
        }
        quoted = true;
        field_started = true;
        break;
      case ',':
        current.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw Error(ErrorCode::MalformedCsv, "unterminated quote");
  end_record();
  return out;
}

std::string format_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_record(const Record& r) {
  std::string out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) out += ',';
    out += format_field(r[i]);
  }
  return out;
}

}  // namespace upsilon::csv

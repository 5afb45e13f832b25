#include "exceed/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "exceed/error.hpp"

namespace exceed::csv {

long Table::column(std::string_view name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<long>(i);
  return -1;
}

Table read(std::istream& in, const std::string& source) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const auto fail = [&](long line, const std::string& what) -> Error {
    return Error(Errc::ParseError, source + ":" + std::to_string(line) + ": " + what);
  };

  std::vector<std::vector<std::string>> records;
  std::vector<long> starts;
  std::vector<std::string> record;
  std::string field;
  long line = 1;
  long record_start = 1;
  bool in_quotes = false;
  bool field_quoted = false;
  bool any = false;

  const auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_quoted = false;
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      records.push_back(std::move(record));
      starts.push_back(record_start);
    }
    record.clear();
    any = false;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!any) {
      record_start = line;
      any = true;
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_quoted) throw fail(line, "unexpected quote inside field");
        in_quotes = true;
        field_quoted = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_quoted = false;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field += c;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field_quoted) throw fail(line, "characters after closing quote");
        field += c;
    }
  }
  if (in_quotes) throw fail(line, "unterminated quoted field");
  if (any) end_record();

  if (records.empty()) throw fail(1, "missing header");
  Table table;
  table.header = std::move(records.front());
  if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0)
    table.header[0].erase(0, 3);
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw fail(starts[r], "expected " + std::to_string(table.header.size()) + " fields, found " +
                                std::to_string(records[r].size()));
    table.rows.push_back(std::move(records[r]));
    table.line_numbers.push_back(starts[r]);
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  return read(in, path);
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const std::string& context) {
  std::string_view s = field;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(value))
    throw Error(Errc::ParseError, context + ": '" + std::string(field) + "' is not a finite number");
  return value;
}

void Writer::row(const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out_ << f;
      continue;
    }
    out_ << '"';
    for (char c : f) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }
  out_ << "\r\n";
}

}  // namespace exceed::csv

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace exceed::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long> line_numbers;  // 1-based source line where each row starts

  /// Index of a header column, or -1.
  long column(std::string_view name) const;
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
/// Every row must have as many fields as the header. Throws ParseError
/// naming `source` and the line.
Table read(std::istream& in, const std::string& source);
Table read_file(const std::string& path);

/// Locale-independent shortest representation that parses back to the
/// same double.
std::string format_double(double value);
/// Parses a full decimal field; throws ParseError mentioning `context`.
double parse_double(std::string_view field, const std::string& context);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

}  // namespace exceed::csv

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "korteweg/grid.hpp"

namespace korteweg::io {

/// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" for
/// non-finite values). Used for every number written to CSV.
std::string format_double(double v);

/// RFC 4180 field quoting: fields containing a comma, quote, CR or LF are
/// wrapped in double quotes with inner quotes doubled.
std::string csv_escape(std::string_view field);

/// Writes CRLF-terminated RFC 4180 records.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  std::size_t columns() const { return columns_; }

 private:
  void write(const std::vector<std::string>& fields);
  std::ostream& out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Column index by header name; throws std::out_of_range.
  std::size_t column(std::string_view name) const;
};

/// Parses RFC 4180 text (CRLF or LF line ends, quoted fields).
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(std::istream& in);

/// Snapshot file: header line "FIELD name nx ny h t", an optional comment line
/// starting with '#', then nx * ny little-endian float64 values, row-major
/// with x fastest.
struct FieldFile {
  std::string name;
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  double t = 0.0;
  std::string comment;
  std::vector<double> values;
};

void write_field(std::ostream& out, const FieldFile& field);
void write_field(std::ostream& out, std::string_view name, const CellField& f, double t,
                 std::string_view comment = {});
/// Throws std::runtime_error on a malformed header or a payload whose length
/// does not match the header.
FieldFile read_field(std::istream& in);

/// Hex SHA-1 of "blob <size>\0<content>", i.e. the git object id of content.
std::string git_blob_sha1(std::string_view content);

}  // namespace korteweg::io

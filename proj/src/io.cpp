#include "korteweg/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace korteweg::io {

static_assert(std::endian::native == std::endian::little, "FIELD payloads are written as little-endian float64");

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  write(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::invalid_argument("CSV row width does not match the header");
  write(fields);
}

void CsvWriter::write(const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out_ << ',';
    out_ << csv_escape(fields[k]);
  }
  out_ << "\r\n";
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  throw std::out_of_range("no CSV column named " + std::string(name));
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw std::runtime_error("unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) throw std::runtime_error("CSV input has no header");
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      std::ostringstream msg;
      msg << "CSV row " << r << " has " << records[r].size() << " fields, header has " << table.header.size();
      throw std::runtime_error(msg.str());
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_csv(text);
}

void write_field(std::ostream& out, const FieldFile& field) {
  if (field.name.empty() || field.name.find_first_of(" \t\r\n") != std::string::npos)
    throw std::invalid_argument("FIELD name must be a non-empty token without whitespace");
  if (field.values.size() != static_cast<std::size_t>(field.nx) * field.ny)
    throw std::invalid_argument("FIELD payload size does not match nx * ny");
  if (field.comment.find_first_of("\r\n") != std::string::npos)
    throw std::invalid_argument("FIELD comment must be a single line");
  out << "FIELD " << field.name << ' ' << field.nx << ' ' << field.ny << ' ' << format_double(field.h) << ' '
      << format_double(field.t) << '\n';
  if (!field.comment.empty()) out << "# " << field.comment << '\n';
  out.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
}

void write_field(std::ostream& out, std::string_view name, const CellField& f, double t, std::string_view comment) {
  FieldFile ff{std::string(name), f.grid().nx, f.grid().ny, f.grid().h, t, std::string(comment), f.raw()};
  write_field(out, ff);
}

FieldFile read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing FIELD header");
  std::istringstream hs(line);
  std::string tag;
  FieldFile f;
  std::string hstr, tstr;
  if (!(hs >> tag >> f.name >> f.nx >> f.ny >> hstr >> tstr) || tag != "FIELD")
    throw std::runtime_error("malformed FIELD header: " + line);
  f.h = std::stod(hstr);
  f.t = std::stod(tstr);
  if (f.nx <= 0 || f.ny <= 0) throw std::runtime_error("FIELD dimensions must be positive");
  if (in.peek() == '#') {
    std::getline(in, line);
    f.comment = line.size() >= 2 && line[1] == ' ' ? line.substr(2) : line.substr(1);
  }
  const std::size_t n = static_cast<std::size_t>(f.nx) * f.ny;
  f.values.resize(n);
  in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double))
    throw std::runtime_error("FIELD payload shorter than nx * ny values");
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("FIELD payload longer than nx * ny values");
  return f;
}

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("cannot allocate a digest context");
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  return hex.str();
}

}  // namespace korteweg::io

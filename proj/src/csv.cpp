#include "seqloc/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "seqloc/error.hpp"

namespace seqloc {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

CsvRows read_csv(const std::filesystem::path& path, std::string_view expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseErrorKind::io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(ParseErrorKind::empty_input, path.string() + ": empty file");
  strip_cr(line);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  if (line != expected_header) {
    throw ParseError(ParseErrorKind::malformed_header,
                     path.string() + ": expected header '" + std::string(expected_header) + "', got '" +
                         line + "'");
  }
  const std::size_t columns = split_line(std::string(expected_header)).size();
  CsvRows rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != columns) {
      throw ParseError(ParseErrorKind::malformed_record,
                       path.string() + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(columns) + " fields");
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

long long parse_int_field(const std::string& field, const std::string& context) {
  if (field.empty()) throw ParseError(ParseErrorKind::malformed_record, context + ": empty integer field");
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (errno != 0 || end != field.c_str() + field.size()) {
    throw ParseError(ParseErrorKind::malformed_record, context + ": bad integer '" + field + "'");
  }
  return v;
}

double parse_real_field(const std::string& field, const std::string& context) {
  if (field.empty()) throw ParseError(ParseErrorKind::malformed_record, context + ": empty real field");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(field.c_str(), &end);
  if (errno == ERANGE && v != 0.0) {
    throw ParseError(ParseErrorKind::malformed_record, context + ": real out of range '" + field + "'");
  }
  if (end != field.c_str() + field.size()) {
    throw ParseError(ParseErrorKind::malformed_record, context + ": bad real '" + field + "'");
  }
  return v;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError(ParseErrorKind::io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ParseError(ParseErrorKind::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace seqloc

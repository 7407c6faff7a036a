#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace seqloc {

/// Nine significant digits; the one numeric format used by every CSV output.
std::string format_real(double v);

/// Parsed CSV body. The header row is checked and dropped; CRLF is accepted.
using CsvRows = std::vector<std::vector<std::string>>;
CsvRows read_csv(const std::filesystem::path& path, std::string_view expected_header);

long long parse_int_field(const std::string& field, const std::string& context);
double parse_real_field(const std::string& field, const std::string& context);

/// Writes via a temporary file and rename so readers never see partial output.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace seqloc

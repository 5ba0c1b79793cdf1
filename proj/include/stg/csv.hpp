#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stg::csv {

// Shortest text that round-trips a double exactly (17 significant digits).
std::string format_double(double v);

double parse_double(std::string_view field);
long long parse_int(std::string_view field);

std::vector<std::string> split(std::string_view line, char delim = ',');
std::string trim(std::string_view s);

using Row = std::vector<std::string>;

// Non-empty lines, CRLF-tolerant. Throws io on open failure.
std::vector<Row> read_rows(const std::filesystem::path& path);

// Writes rows joined by ',' with '\n' line endings. Throws io on failure.
void write_rows(const std::filesystem::path& path, const std::vector<Row>& rows);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace stg::csv

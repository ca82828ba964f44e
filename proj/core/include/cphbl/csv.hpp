#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cphbl::csv {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

double parse_double(std::string_view text);
std::uint64_t parse_u64(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Header plus rows of raw cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

Table read_file(const std::filesystem::path& path);
/// Writes `content` to `path`, creating parent directories. IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace cphbl::csv

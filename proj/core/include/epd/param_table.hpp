#pragma once

#include "epd/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace epd {

/// Rows of parameter vectors with a named header; the on-disk form of truth
/// records and accepted samples.
struct ParamTable
{
  std::vector<std::string> names;
  std::vector<ParamVector> rows;

  /// Values of one parameter across all rows.
  std::vector<double> column(std::size_t j) const;
};

/// CSV with header = names, one row per vector, 17 significant digits.
void write_param_table(const std::filesystem::path& path, const ParamTable& table);

ParamTable read_param_table(const std::filesystem::path& path);

/// Shortest text that reads back to exactly `v` (at most 17 significant digits).
std::string format_double(double v);

/// Parses a whole field as a double; throws ParseError(line) on junk.
double parse_double(std::string_view text, std::size_t line);

/// Splits one CSV line on commas and trims surrounding whitespace. No quoting.
std::vector<std::string_view> split_csv_line(std::string_view line);

} // namespace epd

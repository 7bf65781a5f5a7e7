#include "epd/param_table.hpp"

#include "epd/errors.hpp"

#include <charconv>
#include <fstream>

namespace epd {

std::vector<double> ParamTable::column(std::size_t j) const
{
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back(r.at(j));
  }
  return out;
}

std::string format_double(double v)
{
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    throw std::runtime_error("failed to format value");
  }
  return std::string(buf, end);
}

double parse_double(std::string_view text, std::size_t line)
{
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') {
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ParseError("expected a number, got '" + std::string(text) + "'", line);
  }
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line)
{
  auto trim = [](std::string_view s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
      return std::string_view{};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

void write_param_table(const std::filesystem::path& path, const ParamTable& table)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  for (std::size_t j = 0; j < table.names.size(); ++j) {
    out << (j ? "," : "") << table.names[j];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      out << (j ? "," : "") << format_double(row[j]);
    }
    out << '\n';
  }
}

ParamTable read_param_table(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open '" + path.string() + "'", 0);
  }
  ParamTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") {
      continue;
    }
    auto fields = split_csv_line(line);
    if (table.names.empty()) {
      for (auto f : fields) {
        if (f.empty()) {
          throw ParseError("empty column name in header", lineno);
        }
        table.names.emplace_back(f);
      }
      continue;
    }
    if (fields.size() != table.names.size()) {
      throw ParseError("expected " + std::to_string(table.names.size()) + " fields, got " +
                         std::to_string(fields.size()),
                       lineno);
    }
    ParamVector row;
    row.reserve(fields.size());
    for (auto f : fields) {
      row.push_back(parse_double(f, lineno));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.names.empty()) {
    throw ParseError("'" + path.string() + "' has no header", 0);
  }
  return table;
}

} // namespace epd

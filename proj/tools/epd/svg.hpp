#pragma once

#include <filesystem>
#include <span>
#include <string>

namespace epd::cli {

void write_histogram_svg(const std::filesystem::path& path,
                         std::span<const double> values,
                         const std::string& label,
                         std::size_t bins = 50);

void write_scatter_svg(const std::filesystem::path& path,
                       std::span<const double> x,
                       std::span<const double> y,
                       const std::string& x_label,
                       const std::string& y_label);

} // namespace epd::cli

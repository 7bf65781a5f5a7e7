#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace epd::cli {

namespace {

constexpr double kWidth = 480.0;
constexpr double kHeight = 360.0;
constexpr double kMargin = 48.0;

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string px(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::ofstream open_svg(const std::filesystem::path& path)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out;
}

void axes(std::ofstream& out, double x0, double x1, double y0, double y1,
          const std::string& x_label, const std::string& y_label)
{
  const double left = kMargin, right = kWidth - kMargin / 2;
  const double top = kMargin / 2, bottom = kHeight - kMargin;
  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << left << "\" y=\"" << bottom + 14 << "\">" << num(x0) << "</text>\n"
      << "<text x=\"" << right << "\" y=\"" << bottom + 14 << "\" text-anchor=\"end\">" << num(x1)
      << "</text>\n"
      << "<text x=\"" << left - 4 << "\" y=\"" << bottom << "\" text-anchor=\"end\">" << num(y0)
      << "</text>\n"
      << "<text x=\"" << left - 4 << "\" y=\"" << top + 8 << "\" text-anchor=\"end\">" << num(y1)
      << "</text>\n"
      << "<text x=\"" << (left + right) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n"
      << "<text x=\"14\" y=\"" << (top + bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << (top + bottom) / 2 << ")\">" << y_label << "</text>\n";
}

std::pair<double, double> padded_range(std::span<const double> v)
{
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double a = *lo, b = *hi;
  if (a == b) {
    const double pad = a == 0.0 ? 0.5 : std::abs(a) * 0.05;
    a -= pad;
    b += pad;
  }
  return {a, b};
}

} // namespace

void write_histogram_svg(const std::filesystem::path& path,
                         std::span<const double> values,
                         const std::string& label,
                         std::size_t bins)
{
  auto out = open_svg(path);
  if (values.empty() || bins == 0) {
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\">no samples</text>\n</svg>\n";
    return;
  }
  const auto [lo, hi] = padded_range(values);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    counts[std::min(b, bins - 1)]++;
  }
  const double peak = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  const double left = kMargin, right = kWidth - kMargin / 2;
  const double top = kMargin / 2, bottom = kHeight - kMargin;
  const double bw = (right - left) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double h = (bottom - top) * static_cast<double>(counts[b]) / peak;
    out << "<rect x=\"" << px(left + bw * static_cast<double>(b)) << "\" y=\"" << px(bottom - h)
        << "\" width=\"" << px(bw) << "\" height=\"" << px(h)
        << "\" fill=\"steelblue\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  axes(out, lo, hi, 0.0, peak, label, "count");
  out << "</svg>\n";
}

void write_scatter_svg(const std::filesystem::path& path,
                       std::span<const double> x,
                       std::span<const double> y,
                       const std::string& x_label,
                       const std::string& y_label)
{
  auto out = open_svg(path);
  if (x.empty() || x.size() != y.size()) {
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\">no samples</text>\n</svg>\n";
    return;
  }
  const auto [x0, x1] = padded_range(x);
  const auto [y0, y1] = padded_range(y);
  const double left = kMargin, right = kWidth - kMargin / 2;
  const double top = kMargin / 2, bottom = kHeight - kMargin;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cx = left + (x[i] - x0) / (x1 - x0) * (right - left);
    const double cy = bottom - (y[i] - y0) / (y1 - y0) * (bottom - top);
    out << "<circle cx=\"" << px(cx) << "\" cy=\"" << px(cy)
        << "\" r=\"2\" fill=\"steelblue\" fill-opacity=\"0.5\"/>\n";
  }
  axes(out, x0, x1, y0, y1, x_label, y_label);
  out << "</svg>\n";
}

} // namespace epd::cli

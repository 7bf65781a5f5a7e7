#include "epd/metrics.hpp"

#include "epd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace epd {

namespace {

std::vector<double> sorted_copy(std::span<const double> x, const char* what)
{
  if (x.empty()) {
    throw ConfigError(std::string(what) + ": samples must be nonempty");
  }
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return s;
}

// Linear-interpolation quantile of a sorted sample.
double quantile(const std::vector<double>& s, double q)
{
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

} // namespace

double wasserstein1(std::span<const double> a, std::span<const double> b)
{
  const auto sa = sorted_copy(a, "wasserstein1");
  const auto sb = sorted_copy(b, "wasserstein1");
  if (sa.size() == sb.size()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
      sum += std::abs(sa[i] - sb[i]);
    }
    return sum / static_cast<double>(sa.size());
  }
  // Integral of |F_a - F_b| over the merged support.
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double x_prev = std::min(sa.front(), sb.front());
  double total = 0.0;
  while (i < sa.size() || j < sb.size()) {
    const double x = (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) ? sa[i] : sb[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (x - x_prev);
    while (i < sa.size() && sa[i] == x) {
      ++i;
    }
    while (j < sb.size() && sb[j] == x) {
      ++j;
    }
    x_prev = x;
  }
  return total;
}

double ks_statistic(std::span<const double> a, std::span<const double> b)
{
  const auto sa = sorted_copy(a, "ks_statistic");
  const auto sb = sorted_copy(b, "ks_statistic");
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() || j < sb.size()) {
    const double x = (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) ? sa[i] : sb[j];
    while (i < sa.size() && sa[i] == x) {
      ++i;
    }
    while (j < sb.size() && sb[j] == x) {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double silverman_bandwidth(std::span<const double> sample)
{
  const auto s = sorted_copy(sample, "silverman_bandwidth");
  const double n = static_cast<double>(s.size());
  if (s.size() < 2) {
    return 0.0;
  }
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s) {
    ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = (quantile(s, 0.75) - quantile(s, 0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (!(spread > 0.0)) {
    spread = std::max(sd, iqr);
  }
  return 0.9 * spread * std::pow(n, -0.2);
}

ModeSummary count_modes(std::span<const double> sample, std::optional<double> bandwidth)
{
  if (sample.size() < 5) {
    throw ConfigError("count_modes needs at least 5 samples");
  }
  const auto [mn_it, mx_it] = std::minmax_element(sample.begin(), sample.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mn == mx) {
    return {1, {mn}};
  }
  const double h = bandwidth.value_or(silverman_bandwidth(sample));
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError("KDE bandwidth must be positive");
  }

  constexpr std::size_t kGrid = 512;
  const double lo = mn - 3.0 * h;
  const double hi = mx + 3.0 * h;
  const double dx = (hi - lo) / static_cast<double>(kGrid - 1);
  std::vector<double> grid(kGrid), dens(kGrid, 0.0);
  for (std::size_t g = 0; g < kGrid; ++g) {
    grid[g] = lo + dx * static_cast<double>(g);
    double sum = 0.0;
    for (double x : sample) {
      const double z = (grid[g] - x) / h;
      sum += std::exp(-0.5 * z * z);
    }
    dens[g] = sum;
  }
  const double peak = *std::max_element(dens.begin(), dens.end());

  ModeSummary out;
  for (std::size_t g = 1; g + 1 < kGrid; ++g) {
    if (dens[g] > dens[g - 1] && dens[g] > dens[g + 1] && dens[g] >= 0.05 * peak) {
      out.locations.push_back(grid[g]);
    }
  }
  out.count = out.locations.size();
  return out;
}

std::vector<MarginalSummary> summarize(const ParamTable& accepted, const ParamTable& truth)
{
  if (accepted.names != truth.names) {
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& n : v) {
        s += (s.empty() ? "" : ",") + n;
      }
      return "[" + s + "]";
    };
    throw ConfigError("parameter sets differ: estimate has " + join(accepted.names) +
                      ", truth has " + join(truth.names));
  }
  if (accepted.rows.empty()) {
    throw EstimationError("no accepted parameters");
  }
  if (truth.rows.empty()) {
    throw ConfigError("truth record is empty");
  }
  std::vector<MarginalSummary> out;
  for (std::size_t j = 0; j < accepted.names.size(); ++j) {
    const auto est = accepted.column(j);
    const auto tru = truth.column(j);
    MarginalSummary m;
    m.param_name = accepted.names[j];
    m.wasserstein1 = wasserstein1(est, tru);
    m.ks_stat = ks_statistic(est, tru);
    if (est.size() >= 5) {
      auto modes = count_modes(est);
      m.mode_count = modes.count;
      m.mode_locations = std::move(modes.locations);
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<MarginalSummary> summarize(const DistributionEstimate& estimate,
                                       const TruthRecord& truth)
{
  return summarize(ParamTable{estimate.param_names, estimate.accepted_params},
                   ParamTable{estimate.param_names, truth.params});
}

} // namespace epd

#pragma once

#include "epd/accept.hpp"
#include "epd/param_table.hpp"
#include "epd/rcs_data.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace epd {

/// 1-D earth mover's distance between two empirical distributions.
double wasserstein1(std::span<const double> a, std::span<const double> b);

/// Largest vertical gap between the two empirical CDFs.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5); falls back to the nonzero spread
/// measure when one of them vanishes. Zero only for a constant sample.
double silverman_bandwidth(std::span<const double> sample);

struct ModeSummary
{
  std::size_t count = 0;
  std::vector<double> locations;
};

/// Number of modes of a Gaussian KDE evaluated on 512 points over
/// [min - 3h, max + 3h]: strict interior local maxima at least 5% as high as the
/// global maximum. A constant sample has one mode at its value. Needs n >= 5.
ModeSummary count_modes(std::span<const double> sample,
                        std::optional<double> bandwidth = std::nullopt);

struct MarginalSummary
{
  std::string param_name;
  double wasserstein1 = 0.0;
  double ks_stat = 0.0;
  /// 0 (with no locations) when fewer than five samples were accepted.
  std::size_t mode_count = 0;
  std::vector<double> mode_locations;
};

/// Per-parameter comparison of accepted samples with the true samples.
/// Throws ConfigError when the parameter names differ, EstimationError when
/// nothing was accepted.
std::vector<MarginalSummary> summarize(const ParamTable& accepted, const ParamTable& truth);

std::vector<MarginalSummary> summarize(const DistributionEstimate& estimate,
                                       const TruthRecord& truth);

} // namespace epd

#pragma once

#include "run_config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace epd::cli {

/// Command-line overrides applied on top of the config file.
struct Overrides
{
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<Method> method;
  std::optional<unsigned> jobs;
};

/// Loads the config, applies overrides and fills any missing seed.
RunConfig prepare_config(const std::filesystem::path& config_path, const Overrides& ov);

/// Writes data.csv, truth.csv and resolved_config.json.
void cmd_generate(const RunConfig& cfg, std::ostream& log);

/// Writes accepted_params.csv, acceptance_records.csv, summary.json and
/// resolved_config.json, plus SVG plots when enabled. Returns the accepted count.
std::size_t cmd_estimate(const RunConfig& cfg, std::ostream& log);

/// One fit batch, gated once per C. Writes sweep.csv and accept_probs_C<c>.csv.
void cmd_sweep_c(const RunConfig& cfg, const std::vector<double>& c_values, std::ostream& log);

/// Compares an accepted-params CSV with a truth CSV; writes metrics.json.
void cmd_metrics(const std::filesystem::path& estimate_csv,
                 const std::filesystem::path& truth_csv,
                 const std::filesystem::path& out_dir,
                 std::ostream& log);

} // namespace epd::cli

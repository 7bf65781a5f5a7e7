#pragma once

#include <epd/accept.hpp>
#include <epd/fit.hpp>
#include <epd/integrate.hpp>
#include <epd/model.hpp>
#include <epd/rcs_data.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace epd::cli {

enum class Method { epd, ap, mean };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct SyntheticSource
{
  std::vector<ParamVector> centers;
  /// Explicit per-center widths; when empty, relative_half_width * |center| is used.
  std::vector<ParamVector> half_widths;
  double relative_half_width = 0.1;
  std::size_t samples_per_center = 12;
  std::vector<double> times;
  double noise_level = 0.0;
};

struct Seeds
{
  std::optional<std::uint64_t> data;
  std::optional<std::uint64_t> resample;
  std::optional<std::uint64_t> gate;
  std::optional<std::uint64_t> fit;
};

/// Everything needed to reproduce one run. Parsed from and written back to JSON.
struct RunConfig
{
  std::string model;
  /// Observed component names; empty keeps the model default.
  std::vector<std::string> observed;
  std::map<std::string, Bounds> bounds;
  StateVector initial_state;

  std::optional<std::filesystem::path> csv;
  std::optional<SyntheticSource> synthetic;

  Method method = Method::epd;
  std::size_t n_trajectories = 1000;
  double C = 100.0;
  std::vector<double> sweep_c;

  FitConfig fit;
  IntegratorConfig integrator;
  Seeds seeds;

  std::filesystem::path output_dir = "epd_out";
  bool plots = false;
  unsigned jobs = 1;

  /// Model with observed mask and bound overrides applied.
  ModelSpec build_model() const;
  SyntheticSpec synthetic_spec(const ModelSpec& model) const;
  EpdConfig epd_config() const;

  /// Fills every missing seed from std::random_device.
  void resolve_seeds();
  /// Sets data/resample/gate/fit seeds to base, base+1, base+2, base+3.
  void override_seeds(std::uint64_t base);

  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const std::filesystem::path& path, const RunConfig& cfg);

} // namespace epd::cli

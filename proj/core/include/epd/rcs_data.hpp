#pragma once

#include "epd/integrate.hpp"
#include "epd/model.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace epd {

/// Values of the observed components for one sampled individual at one time.
using Observation = std::vector<double>;

/// Repeated cross-sectional data: at each time an unlinked pool of observations.
struct RcsDataset
{
  std::vector<double> times;
  /// pools[i] holds the J_i observations recorded at times[i].
  std::vector<std::vector<Observation>> pools;
  /// Mirrors ModelSpec::observed_mask; each Observation has one entry per true flag.
  std::vector<bool> observed_mask;
  std::string units;

  std::size_t n_times() const { return times.size(); }
  std::size_t n_observed() const;
  std::size_t pool_size(std::size_t i) const { return pools[i].size(); }

  /// Throws ConfigError if any invariant is violated.
  void validate() const;
};

/// One observation per time point, plus where each came from.
struct ArtificialTrajectory
{
  /// Marks a value that was not drawn from a pool (e.g. a pool mean).
  static constexpr std::int64_t kSynthetic = -1;

  std::vector<double> times;
  /// values[i] has one entry per observed component.
  std::vector<Observation> values;
  std::vector<std::int64_t> source_indices;
};

/// Clusters of true parameters around which synthetic individuals are drawn.
struct SyntheticSpec
{
  ModelSpec model;
  std::vector<ParamVector> centers;
  /// Per-center, per-parameter half widths of the uniform sampling box.
  std::vector<ParamVector> half_widths;
  std::size_t samples_per_center = 12;
  std::vector<double> times;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  /// Empty selects the model's default initial state.
  StateVector initial_state;
  IntegratorConfig integrator;

  void validate() const;
};

/// Ground truth kept apart from the dataset so estimators cannot use linkage.
struct TruthRecord
{
  std::vector<ParamVector> params;
  /// Noise-free trajectories in sampling order, one per entry of params.
  std::vector<Trajectory> trajectories;
};

struct SyntheticData
{
  RcsDataset data;
  TruthRecord truth;
};

/// Half widths equal to `fraction` of |center| for every parameter.
std::vector<ParamVector> relative_half_widths(const std::vector<ParamVector>& centers,
                                              double fraction);

/// Draws H*S parameter sets, integrates each, applies noise and shuffles every
/// pool independently. Deterministic in spec.seed.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// y -> max(0, y * (1 + eta)), eta ~ Normal(0, level^2), independent per value.
RcsDataset apply_multiplicative_noise(const RcsDataset& data, double level, std::uint64_t seed);

/// Reads `time,component,value[,replicate_id]` rows. Components must name
/// states of `model`; the observed mask is the set of components present.
RcsDataset load_rcs_csv(const std::filesystem::path& path, const ModelSpec& model);

/// Writes the format read by load_rcs_csv, values at 17 significant digits.
void write_rcs_csv(const std::filesystem::path& path, const RcsDataset& data,
                   const ModelSpec& model);

/// Component-wise mean of every pool.
ArtificialTrajectory mean_trajectory(const RcsDataset& data);

} // namespace epd

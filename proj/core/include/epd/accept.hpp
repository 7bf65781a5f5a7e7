#pragma once

#include "epd/fit.hpp"
#include "epd/integrate.hpp"
#include "epd/model.hpp"
#include "epd/rcs_data.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epd {

/// a = 2 - 2 / (1 + exp(-C * s)) with s the min-max normalised loss over the
/// finite entries. Non-finite losses get a = 0; if every finite loss is equal,
/// s = 0 and a = 1. Throws EstimationError when no loss is finite.
std::vector<double> accept_probabilities(std::span<const double> losses, double C);

/// The uniforms u_n in [0, 1) used by gate(); u_n depends only on (seed, n).
std::vector<double> gate_uniforms(std::size_t n, std::uint64_t seed);

/// accepted[n] = probs[n] > u_n.
std::vector<bool> gate(std::span<const double> probs, std::uint64_t seed);

struct AcceptanceRecord
{
  std::size_t trajectory_index = 0;
  double loss = 0.0;
  double accept_prob = 0.0;
  double u = 0.0;
  bool accepted = false;
  bool converged = false;
};

struct EpdConfig
{
  std::size_t n_trajectories = 1000;
  /// Scaling factor of the acceptance transform; 0 accepts every converged fit.
  double C = 100.0;
  std::uint64_t resample_seed = 0;
  std::uint64_t gate_seed = 0;
  FitConfig fit;
  IntegratorConfig integrator;
  /// Empty selects the model's default initial state.
  StateVector initial_state;
  /// Worker threads for the fit stage; 0 picks hardware concurrency.
  unsigned jobs = 1;
  /// Called from the coordinating thread as fits complete (optional).
  std::function<void(std::size_t done, std::size_t total)> progress;
  /// Receives one line per tolerated fit failure (optional).
  std::function<void(std::string_view)> log;

  void validate() const;
};

struct DistributionEstimate
{
  std::string model_name;
  std::vector<std::string> param_names;
  std::size_t n_trajectories = 0;
  double C = 0.0;
  std::uint64_t resample_seed = 0;
  std::uint64_t gate_seed = 0;
  FitConfig fit_config;

  std::vector<FitResult> fits;
  std::vector<AcceptanceRecord> records;
  std::vector<ParamVector> accepted_params;

  std::size_t n_converged() const;
};

/// Fits every trajectory, concurrently when cfg.jobs != 1. fits[k] always
/// belongs to trajectories[k] regardless of completion order.
std::vector<FitResult> fit_batch(const ModelSpec& model,
                                 const std::vector<ArtificialTrajectory>& trajectories,
                                 const EpdConfig& cfg);

/// Acceptance stage over an existing batch of fits: probabilities, gate and
/// collection. Non-converged fits are treated as infinite loss.
DistributionEstimate accept_fits(const ModelSpec& model,
                                 std::vector<FitResult> fits,
                                 double C,
                                 std::uint64_t gate_seed);

/// Resample -> fit -> accept. With C = 0 this is the all-possible-combinations baseline.
DistributionEstimate run_epd(const RcsDataset& data, const ModelSpec& model, const EpdConfig& cfg);

/// Fits the single pool-mean trajectory.
FitResult fit_mean_baseline(const RcsDataset& data, const ModelSpec& model, const EpdConfig& cfg);

} // namespace epd

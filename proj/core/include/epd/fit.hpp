#pragma once

#include "epd/integrate.hpp"
#include "epd/model.hpp"
#include "epd/rcs_data.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace epd {

struct FitConfig
{
  std::size_t max_iterations = 200;
  double param_tol = 1e-8;
  double loss_tol = 1e-8;
  /// Relative forward-difference step for the Jacobian.
  double finite_difference_step = 1e-6;
  std::size_t n_multistart = 1;
  /// Seeds the extra random starts; start set for trajectory k uses substream(seed, k).
  std::uint64_t seed = 0;

  void validate() const;
};

struct FitResult
{
  ParamVector params;
  /// Log-space sum of squares at params; +infinity when no start produced a finite value.
  double loss = 0.0;
  bool converged = false;
  std::size_t n_evals = 0;
  std::size_t trajectory_index = 0;
};

/// Per-time, per-observed-component residuals log10(model + 1) - log10(data + 1),
/// time-major. Throws IntegrationFailure when the model cannot be solved.
std::vector<double> residuals(const ModelSpec& model,
                              std::span<const double> p,
                              const ArtificialTrajectory& traj,
                              std::span<const double> y0,
                              const IntegratorConfig& icfg = {});

/// Sum of squared residuals; +infinity if integration fails.
double objective(const ModelSpec& model,
                 std::span<const double> p,
                 const ArtificialTrajectory& traj,
                 std::span<const double> y0,
                 const IntegratorConfig& icfg = {});

/// Forward-difference Jacobian of residuals() with respect to the model
/// parameters. Column j uses step fd_step * max(|p_j|, 1e-3 * bound width), taken
/// backwards when a forward step would leave the parameter bounds.
/// Returned column-major: jac[j] is the column for parameter j.
std::vector<std::vector<double>> residual_jacobian(const ModelSpec& model,
                                                   std::span<const double> p,
                                                   const ArtificialTrajectory& traj,
                                                   std::span<const double> y0,
                                                   double fd_step,
                                                   const IntegratorConfig& icfg = {});

/// Geometric midpoint for strictly positive bounds, arithmetic otherwise.
ParamVector initial_guess(std::span<const Bounds> bounds);

/// Bounded Levenberg-Marquardt fit of the model to one artificial trajectory,
/// using the bounds in model.param_bounds. Never returns params outside them.
FitResult fit_trajectory(const ModelSpec& model,
                         const ArtificialTrajectory& traj,
                         std::span<const double> y0,
                         const FitConfig& cfg = {},
                         const IntegratorConfig& icfg = {},
                         std::size_t trajectory_index = 0);

} // namespace epd

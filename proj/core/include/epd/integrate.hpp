#pragma once

#include "epd/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace epd {

struct IntegratorConfig
{
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  std::size_t max_steps = 1'000'000;
  /// Smallest admissible step; 0 means "limited only by floating-point resolution of t".
  double min_step = 0.0;

  void validate() const;
};

/// Model states sampled at a strictly increasing set of times.
struct Trajectory
{
  std::vector<double> times;
  /// states[i] is the full state vector at times[i].
  std::vector<StateVector> states;

  std::size_t size() const { return times.size(); }
};

/// Solves y' = f(y, p, t), y(0) = y0 with an adaptive Dormand-Prince 5(4) scheme
/// and evaluates the solution at `times` through the method's continuous extension.
///
/// Integration always starts at t = 0. An output component below
/// -(abs_tol + rel_tol * its largest magnitude along the solution) raises
/// IntegrationFailure; smaller negative excursions are clamped to zero.
Trajectory solve_ivp(const ModelSpec& model,
                     std::span<const double> p,
                     std::span<const double> y0,
                     std::span<const double> times,
                     const IntegratorConfig& cfg = {});

} // namespace epd

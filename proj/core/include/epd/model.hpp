#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epd {

using StateVector = std::vector<double>;
using ParamVector = std::vector<double>;

/// Right-hand side f(y, p, t) of y' = f. Writes dim_state values into `dydt`.
/// Must be pure and reentrant; non-finite outputs are reported by the caller.
using RhsFunction = std::function<void(std::span<const double> y,
                                       std::span<const double> p,
                                       double t,
                                       std::span<double> dydt)>;

struct Bounds
{
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool contains(double v) const { return v >= lower && v <= upper; }
};

/// An ODE system together with the metadata needed to fit it to data.
struct ModelSpec
{
  std::string name;
  std::vector<std::string> state_names;
  std::vector<std::string> param_names;
  RhsFunction rhs;
  StateVector default_initial_state;
  std::vector<bool> observed_mask;
  /// Default fitting bounds, one pair per parameter.
  std::vector<Bounds> param_bounds;
  /// True where the parameter must stay nonnegative (synthetic sampling checks this).
  std::vector<bool> nonnegative_params;

  std::size_t dim_state() const { return state_names.size(); }
  std::size_t n_params() const { return param_names.size(); }
  std::size_t n_observed() const;
  /// Indices of state components flagged in observed_mask, ascending.
  std::vector<std::size_t> observed_indices() const;
  /// Index of a state component by name; throws ConfigError if absent.
  std::size_t state_index(std::string_view component) const;
  std::size_t param_index(std::string_view param) const;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// The builtin names accepted by make_builtin.
const std::vector<std::string>& builtin_model_names();

/// exponential, logistic or target_cell_limited. Unknown names throw ConfigError.
ModelSpec make_builtin(std::string_view name);

/// Registers a user-defined model so make_model() can find it by name.
/// Replaces an earlier registration with the same name. Thread-safe.
void register_model(ModelSpec spec);

/// Builtins first, then registered models.
ModelSpec make_model(std::string_view name);

/// Evaluates the right-hand side with length and finiteness checks.
StateVector eval_rhs(const ModelSpec& model,
                     std::span<const double> y,
                     std::span<const double> p,
                     double t);

/// Parameter-center presets used by the synthetic benchmarks, one entry per
/// cluster. `modality` is 1, 2 or 3.
std::vector<ParamVector> benchmark_centers(std::string_view model, int modality);

/// Default observation grid for a builtin benchmark.
std::vector<double> benchmark_times(std::string_view model);

} // namespace epd

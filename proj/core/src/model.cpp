#include "epd/model.hpp"

#include "epd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace epd {

std::size_t ModelSpec::n_observed() const
{
  return static_cast<std::size_t>(std::count(observed_mask.begin(), observed_mask.end(), true));
}

std::vector<std::size_t> ModelSpec::observed_indices() const
{
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < observed_mask.size(); ++i) {
    if (observed_mask[i]) {
      idx.push_back(i);
    }
  }
  return idx;
}

std::size_t ModelSpec::state_index(std::string_view component) const
{
  auto it = std::find(state_names.begin(), state_names.end(), component);
  if (it == state_names.end()) {
    throw ConfigError("model '" + name + "' has no state component '" + std::string(component) + "'");
  }
  return static_cast<std::size_t>(it - state_names.begin());
}

std::size_t ModelSpec::param_index(std::string_view param) const
{
  auto it = std::find(param_names.begin(), param_names.end(), param);
  if (it == param_names.end()) {
    throw ConfigError("model '" + name + "' has no parameter '" + std::string(param) + "'");
  }
  return static_cast<std::size_t>(it - param_names.begin());
}

void ModelSpec::validate() const
{
  auto fail = [this](const std::string& msg) { throw ConfigError("model '" + name + "': " + msg); };
  if (name.empty()) {
    throw ConfigError("model name must not be empty");
  }
  if (state_names.empty()) {
    fail("dim_state must be at least 1");
  }
  if (param_names.empty()) {
    fail("at least one parameter is required");
  }
  if (!rhs) {
    fail("missing right-hand side");
  }
  if (default_initial_state.size() != dim_state()) {
    fail("default_initial_state has " + std::to_string(default_initial_state.size()) +
         " entries, expected " + std::to_string(dim_state()));
  }
  for (double v : default_initial_state) {
    if (!std::isfinite(v) || v < 0.0) {
      fail("default_initial_state must be finite and nonnegative");
    }
  }
  if (observed_mask.size() != dim_state()) {
    fail("observed_mask length must equal dim_state");
  }
  if (n_observed() == 0) {
    fail("observed_mask must flag at least one component");
  }
  if (param_bounds.size() != n_params()) {
    fail("param_bounds must have one entry per parameter");
  }
  for (std::size_t i = 0; i < param_bounds.size(); ++i) {
    const auto& b = param_bounds[i];
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || b.lower > b.upper) {
      fail("invalid bounds for parameter '" + param_names[i] + "'");
    }
  }
  if (!nonnegative_params.empty() && nonnegative_params.size() != n_params()) {
    fail("nonnegative_params must be empty or have one entry per parameter");
  }
}

namespace {

ModelSpec exponential_model()
{
  ModelSpec m;
  m.name = "exponential";
  m.state_names = {"y"};
  m.param_names = {"a"};
  m.rhs = [](std::span<const double> y, std::span<const double> p, double, std::span<double> dy) {
    dy[0] = p[0] * y[0];
  };
  m.default_initial_state = {1.0};
  m.observed_mask = {true};
  m.param_bounds = {{0.1, 5.0}};
  m.nonnegative_params = {true};
  return m;
}

ModelSpec logistic_model()
{
  ModelSpec m;
  m.name = "logistic";
  m.state_names = {"y"};
  m.param_names = {"r", "K"};
  m.rhs = [](std::span<const double> y, std::span<const double> p, double, std::span<double> dy) {
    dy[0] = p[0] * y[0] * (1.0 - y[0] / p[1]);
  };
  m.default_initial_state = {1e-4};
  m.observed_mask = {true};
  m.param_bounds = {{0.5, 6.0}, {0.3, 2.0}};
  m.nonnegative_params = {true, true};
  return m;
}

// Unimodal row of the viral-kinetics benchmark, order [beta, p, c, kappa, delta, K_delta].
constexpr double kTargetCellCenter[6] = {2.40e-4, 1.60, 13.0, 4.00, 1.60e6, 4.50e4};

ModelSpec target_cell_model()
{
  ModelSpec m;
  m.name = "target_cell_limited";
  m.state_names = {"T", "I1", "I2", "V"};
  m.param_names = {"beta", "p", "c", "kappa", "delta", "K_delta"};
  m.rhs = [](std::span<const double> y, std::span<const double> p, double, std::span<double> dy) {
    const double T = y[0], I1 = y[1], I2 = y[2], V = y[3];
    const double beta = p[0], prod = p[1], clear = p[2], kappa = p[3], delta = p[4], k_delta = p[5];
    const double infection = beta * T * V;
    dy[0] = -infection;
    dy[1] = infection - kappa * I1;
    dy[2] = kappa * I1 - delta * I2 / (k_delta + I2);
    dy[3] = prod * I2 - clear * V;
  };
  m.default_initial_state = {1e7, 75.0, 0.0, 0.0};
  m.observed_mask = {true, true, true, true};
  for (double c : kTargetCellCenter) {
    m.param_bounds.push_back({c / 10.0, c * 10.0});
  }
  m.nonnegative_params.assign(6, true);
  return m;
}

std::mutex& registry_mutex()
{
  static std::mutex mu;
  return mu;
}

std::map<std::string, ModelSpec, std::less<>>& registry()
{
  static std::map<std::string, ModelSpec, std::less<>> models;
  return models;
}

[[noreturn]] void unknown_model(std::string_view name)
{
  std::string valid;
  for (const auto& n : builtin_model_names()) {
    valid += (valid.empty() ? "" : ", ") + n;
  }
  throw ConfigError("unknown model '" + std::string(name) + "'; valid builtins are: " + valid);
}

} // namespace

const std::vector<std::string>& builtin_model_names()
{
  static const std::vector<std::string> names = {"exponential", "logistic", "target_cell_limited"};
  return names;
}

ModelSpec make_builtin(std::string_view name)
{
  if (name == "exponential") {
    return exponential_model();
  }
  if (name == "logistic") {
    return logistic_model();
  }
  if (name == "target_cell_limited") {
    return target_cell_model();
  }
  unknown_model(name);
}

void register_model(ModelSpec spec)
{
  spec.validate();
  for (const auto& n : builtin_model_names()) {
    if (spec.name == n) {
      throw ConfigError("cannot re-register builtin model '" + n + "'");
    }
  }
  std::lock_guard lock(registry_mutex());
  auto key = spec.name;
  registry().insert_or_assign(std::move(key), std::move(spec));
}

ModelSpec make_model(std::string_view name)
{
  const auto& builtins = builtin_model_names();
  if (std::find(builtins.begin(), builtins.end(), name) != builtins.end()) {
    return make_builtin(name);
  }
  std::lock_guard lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) {
    unknown_model(name);
  }
  return it->second;
}

StateVector eval_rhs(const ModelSpec& model,
                     std::span<const double> y,
                     std::span<const double> p,
                     double t)
{
  if (y.size() != model.dim_state()) {
    throw EvaluationError("state has " + std::to_string(y.size()) + " entries, model '" +
                          model.name + "' expects " + std::to_string(model.dim_state()));
  }
  if (p.size() != model.n_params()) {
    throw EvaluationError("parameter vector has " + std::to_string(p.size()) + " entries, model '" +
                          model.name + "' expects " + std::to_string(model.n_params()));
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(y.begin(), y.end(), finite) || !std::all_of(p.begin(), p.end(), finite) ||
      !std::isfinite(t)) {
    throw EvaluationError("non-finite input to model '" + model.name + "'");
  }
  StateVector dydt(model.dim_state());
  model.rhs(y, p, t, dydt);
  if (!std::all_of(dydt.begin(), dydt.end(), finite)) {
    throw EvaluationError("model '" + model.name + "' produced a non-finite derivative at t=" +
                          std::to_string(t));
  }
  return dydt;
}

std::vector<ParamVector> benchmark_centers(std::string_view model, int modality)
{
  if (modality < 1 || modality > 3) {
    throw ConfigError("benchmark modality must be 1, 2 or 3");
  }
  if (model == "exponential") {
    static const std::vector<ParamVector> sets[3] = {
      {{2.0}},
      {{1.0}, {3.0}},
      {{1.0}, {2.5}, {4.0}},
    };
    return sets[modality - 1];
  }
  if (model == "logistic") {
    static const std::vector<ParamVector> sets[3] = {
      {{2.8, 1.0}},
      {{4.0, 0.6}, {1.6, 1.4}},
      {{1.6, 0.6}, {4.0, 0.9}, {2.0, 1.3}},
    };
    return sets[modality - 1];
  }
  if (model == "target_cell_limited") {
    static const std::vector<ParamVector> sets[3] = {
      {{2.40e-4, 1.60, 13.0, 4.00, 1.60e6, 4.50e4}},
      {{2.88e-4, 1.44, 18.2, 5.20, 1.28e6, 3.15e4}, {2.16e-4, 2.08, 9.1, 3.20, 1.76e6, 4.95e4}},
      {{2.88e-4, 1.12, 15.6, 4.00, 1.44e6, 4.50e4},
       {1.68e-4, 2.24, 18.2, 5.60, 1.60e6, 7.20e4},
       {2.16e-4, 2.08, 7.8, 2.40, 1.92e6, 2.25e4}},
    };
    return sets[modality - 1];
  }
  unknown_model(model);
}

std::vector<double> benchmark_times(std::string_view model)
{
  if (model == "exponential") {
    return {0.0, 0.25, 0.5, 0.75, 1.0};
  }
  if (model == "logistic") {
    return {5.0, 10.0, 15.0, 20.0};
  }
  if (model == "target_cell_limited") {
    std::vector<double> days(13);
    for (std::size_t i = 0; i < days.size(); ++i) {
      days[i] = static_cast<double>(i);
    }
    return days;
  }
  unknown_model(model);
}

} // namespace epd

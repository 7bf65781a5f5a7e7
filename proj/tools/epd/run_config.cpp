#include "run_config.hpp"

#include <epd/errors.hpp>

#include <fstream>
#include <random>
#include <set>

namespace epd::cli {

using nlohmann::json;

Method parse_method(const std::string& name)
{
  if (name == "epd") {
    return Method::epd;
  }
  if (name == "ap") {
    return Method::ap;
  }
  if (name == "mean") {
    return Method::mean;
  }
  throw ConfigError("method: expected one of epd, ap, mean; got '" + name + "'");
}

std::string method_name(Method m)
{
  switch (m) {
  case Method::epd:
    return "epd";
  case Method::ap:
    return "ap";
  case Method::mean:
    return "mean";
  }
  return "epd";
}

namespace {

// Typed access to a JSON object that reports failures by field path and
// rejects keys it was never asked about.
class Node
{
public:
  Node(const json& j, std::string path)
    : j_(j)
    , path_(std::move(path))
  {
    if (!j_.is_object()) {
      fail("expected an object");
    }
  }

  [[noreturn]] void fail(const std::string& msg) const
  {
    throw ConfigError((path_.empty() ? "<root>" : path_) + ": " + msg);
  }

  std::string child_path(const std::string& key) const
  {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key)
  {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key)
  {
    seen_.insert(key);
    return j_.at(key);
  }

  Node object(const std::string& key) { return Node(raw(key), child_path(key)); }

  template <class T>
  T get(const std::string& key)
  {
    const auto& v = raw(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(child_path(key) + ": wrong type");
    }
  }

  template <class T>
  void maybe(const std::string& key, T& out)
  {
    if (has(key)) {
      out = get<T>(key);
    }
  }

  void maybe_seed(const std::string& key, std::optional<std::uint64_t>& out)
  {
    if (has(key)) {
      const auto& v = raw(key);
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError(child_path(key) + ": seeds must be nonnegative integers");
      }
      out = v.get<std::uint64_t>();
    }
  }

  void finish() const
  {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError(child_path(it.key()) + ": unknown field");
      }
    }
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<ParamVector> matrix_field(Node& node, const std::string& key)
{
  const auto& v = node.raw(key);
  if (!v.is_array() || v.empty()) {
    node.fail(key + ": expected a nonempty array of arrays");
  }
  std::vector<ParamVector> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array()) {
      throw ConfigError(node.child_path(key) + "[" + std::to_string(i) + "]: expected an array");
    }
    ParamVector row;
    for (const auto& x : v[i]) {
      if (!x.is_number()) {
        throw ConfigError(node.child_path(key) + "[" + std::to_string(i) + "]: expected numbers");
      }
      row.push_back(x.get<double>());
    }
    out.push_back(std::move(row));
  }
  return out;
}

} // namespace

ModelSpec RunConfig::build_model() const
{
  ModelSpec m = make_model(model);
  if (!observed.empty()) {
    m.observed_mask.assign(m.dim_state(), false);
    for (const auto& name : observed) {
      try {
        m.observed_mask[m.state_index(name)] = true;
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("observed: ") + e.what());
      }
    }
  }
  for (const auto& [name, b] : bounds) {
    std::size_t j = 0;
    try {
      j = m.param_index(name);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("bounds: ") + e.what());
    }
    if (!(b.lower < b.upper)) {
      throw ConfigError("bounds." + name + ": lower must be below upper");
    }
    m.param_bounds[j] = b;
  }
  if (!initial_state.empty() && initial_state.size() != m.dim_state()) {
    throw ConfigError("initial_state: expected " + std::to_string(m.dim_state()) + " values");
  }
  m.validate();
  return m;
}

SyntheticSpec RunConfig::synthetic_spec(const ModelSpec& m) const
{
  if (!synthetic) {
    throw ConfigError("dataset.synthetic: required for this command");
  }
  SyntheticSpec s;
  s.model = m;
  s.centers = synthetic->centers;
  s.half_widths = synthetic->half_widths.empty()
                    ? relative_half_widths(synthetic->centers, synthetic->relative_half_width)
                    : synthetic->half_widths;
  s.samples_per_center = synthetic->samples_per_center;
  s.times = synthetic->times.empty() ? benchmark_times(model) : synthetic->times;
  s.noise_level = synthetic->noise_level;
  s.seed = seeds.data.value_or(0);
  s.initial_state = initial_state;
  s.integrator = integrator;
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("dataset.synthetic: ") + e.what());
  }
  return s;
}

EpdConfig RunConfig::epd_config() const
{
  EpdConfig c;
  c.n_trajectories = n_trajectories;
  c.C = method == Method::ap ? 0.0 : C;
  c.resample_seed = seeds.resample.value_or(0);
  c.gate_seed = seeds.gate.value_or(0);
  c.fit = fit;
  c.fit.seed = seeds.fit.value_or(0);
  c.integrator = integrator;
  c.initial_state = initial_state;
  c.jobs = jobs;
  c.validate();
  return c;
}

void RunConfig::resolve_seeds()
{
  std::random_device rd;
  auto fill = [&](std::optional<std::uint64_t>& s) {
    if (!s) {
      // Keep seeds within 53 bits so JSON readers that use doubles stay exact.
      s = ((static_cast<std::uint64_t>(rd()) << 32) | rd()) & ((1ULL << 53) - 1);
    }
  };
  fill(seeds.data);
  fill(seeds.resample);
  fill(seeds.gate);
  fill(seeds.fit);
}

void RunConfig::override_seeds(std::uint64_t base)
{
  seeds.data = base;
  seeds.resample = base + 1;
  seeds.gate = base + 2;
  seeds.fit = base + 3;
}

nlohmann::ordered_json RunConfig::to_json() const
{
  nlohmann::ordered_json j;
  j["model"] = model;
  if (!observed.empty()) {
    j["observed"] = observed;
  }
  if (!bounds.empty()) {
    nlohmann::ordered_json b;
    for (const auto& [name, v] : bounds) {
      b[name] = {v.lower, v.upper};
    }
    j["bounds"] = b;
  }
  if (!initial_state.empty()) {
    j["initial_state"] = initial_state;
  }

  nlohmann::ordered_json ds;
  if (csv) {
    ds["csv"] = csv->string();
  }
  if (synthetic) {
    nlohmann::ordered_json s;
    s["centers"] = synthetic->centers;
    if (!synthetic->half_widths.empty()) {
      s["half_widths"] = synthetic->half_widths;
    } else {
      s["relative_half_width"] = synthetic->relative_half_width;
    }
    s["samples_per_center"] = synthetic->samples_per_center;
    if (!synthetic->times.empty()) {
      s["times"] = synthetic->times;
    }
    s["noise_level"] = synthetic->noise_level;
    ds["synthetic"] = s;
  }
  j["dataset"] = ds;

  nlohmann::ordered_json est;
  est["method"] = method_name(method);
  est["n_trajectories"] = n_trajectories;
  est["C"] = C;
  if (!sweep_c.empty()) {
    est["sweep_c"] = sweep_c;
  }
  j["estimate"] = est;

  j["fit"] = {{"max_iterations", fit.max_iterations},
              {"param_tol", fit.param_tol},
              {"loss_tol", fit.loss_tol},
              {"finite_difference_step", fit.finite_difference_step},
              {"n_multistart", fit.n_multistart}};
  j["integrator"] = {{"rel_tol", integrator.rel_tol},
                     {"abs_tol", integrator.abs_tol},
                     {"max_steps", integrator.max_steps},
                     {"min_step", integrator.min_step}};

  nlohmann::ordered_json seeds_j;
  auto put = [&](const char* key, const std::optional<std::uint64_t>& s) {
    if (s) {
      seeds_j[key] = *s;
    }
  };
  put("data", seeds.data);
  put("resample", seeds.resample);
  put("gate", seeds.gate);
  put("fit", seeds.fit);
  j["seeds"] = seeds_j;

  j["output"] = {{"dir", output_dir.string()}, {"plots", plots}, {"jobs", jobs}};
  return j;
}

RunConfig RunConfig::from_json(const json& j)
{
  RunConfig c;
  Node root(j, "");
  if (!root.has("model")) {
    root.fail("missing required field 'model'");
  }
  c.model = root.get<std::string>("model");
  root.maybe("observed", c.observed);
  root.maybe("initial_state", c.initial_state);
  if (root.has("bounds")) {
    const auto& b = root.raw("bounds");
    if (!b.is_object()) {
      throw ConfigError("bounds: expected an object of name -> [lower, upper]");
    }
    for (auto it = b.begin(); it != b.end(); ++it) {
      const auto& v = it.value();
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError("bounds." + it.key() + ": expected [lower, upper]");
      }
      c.bounds[it.key()] = Bounds{v[0].get<double>(), v[1].get<double>()};
    }
  }

  if (!root.has("dataset")) {
    root.fail("missing required field 'dataset'");
  }
  {
    Node ds = root.object("dataset");
    const bool has_csv = ds.has("csv");
    const bool has_syn = ds.has("synthetic");
    if (has_csv == has_syn) {
      ds.fail("exactly one of 'csv' or 'synthetic' is required");
    }
    if (has_csv) {
      const auto path = ds.get<std::string>("csv");
      if (path.empty()) {
        throw ConfigError("dataset.csv: path is empty (fill in the data file)");
      }
      c.csv = path;
    } else {
      Node s = ds.object("synthetic");
      SyntheticSource src;
      if (!s.has("centers")) {
        s.fail("missing required field 'centers'");
      }
      src.centers = matrix_field(s, "centers");
      if (s.has("half_widths")) {
        src.half_widths = matrix_field(s, "half_widths");
      }
      s.maybe("relative_half_width", src.relative_half_width);
      s.maybe("samples_per_center", src.samples_per_center);
      s.maybe("times", src.times);
      s.maybe("noise_level", src.noise_level);
      s.finish();
      c.synthetic = std::move(src);
    }
    ds.finish();
  }

  if (root.has("estimate")) {
    Node e = root.object("estimate");
    if (e.has("method")) {
      c.method = parse_method(e.get<std::string>("method"));
    }
    e.maybe("n_trajectories", c.n_trajectories);
    e.maybe("C", c.C);
    e.maybe("sweep_c", c.sweep_c);
    e.finish();
  }
  if (root.has("fit")) {
    Node f = root.object("fit");
    f.maybe("max_iterations", c.fit.max_iterations);
    f.maybe("param_tol", c.fit.param_tol);
    f.maybe("loss_tol", c.fit.loss_tol);
    f.maybe("finite_difference_step", c.fit.finite_difference_step);
    f.maybe("n_multistart", c.fit.n_multistart);
    f.finish();
  }
  if (root.has("integrator")) {
    Node in = root.object("integrator");
    in.maybe("rel_tol", c.integrator.rel_tol);
    in.maybe("abs_tol", c.integrator.abs_tol);
    in.maybe("max_steps", c.integrator.max_steps);
    in.maybe("min_step", c.integrator.min_step);
    in.finish();
  }
  if (root.has("seeds")) {
    Node s = root.object("seeds");
    s.maybe_seed("data", c.seeds.data);
    s.maybe_seed("resample", c.seeds.resample);
    s.maybe_seed("gate", c.seeds.gate);
    s.maybe_seed("fit", c.seeds.fit);
    s.finish();
  }
  if (root.has("output")) {
    Node o = root.object("output");
    if (o.has("dir")) {
      c.output_dir = o.get<std::string>("dir");
    }
    o.maybe("plots", c.plots);
    o.maybe("jobs", c.jobs);
    o.finish();
  }
  root.finish();

  if (c.n_trajectories < 1) {
    throw ConfigError("estimate.n_trajectories: must be at least 1");
  }
  if (!(c.C >= 0.0)) {
    throw ConfigError("estimate.C: must be nonnegative");
  }
  for (double v : c.sweep_c) {
    if (!(v >= 0.0)) {
      throw ConfigError("estimate.sweep_c: values must be nonnegative");
    }
  }
  try {
    c.fit.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("fit: ") + e.what());
  }
  try {
    c.integrator.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("integrator: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config '" + path.string() + "'");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return RunConfig::from_json(j);
}

void save_run_config(const std::filesystem::path& path, const RunConfig& cfg)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  out << cfg.to_json().dump(2) << '\n';
}

} // namespace epd::cli

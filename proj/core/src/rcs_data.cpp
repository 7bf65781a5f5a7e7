#include "epd/rcs_data.hpp"

#include "epd/errors.hpp"
#include "epd/param_table.hpp"
#include "epd/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

namespace epd {

std::size_t RcsDataset::n_observed() const
{
  return static_cast<std::size_t>(std::count(observed_mask.begin(), observed_mask.end(), true));
}

void RcsDataset::validate() const
{
  if (times.size() < 2) {
    throw ConfigError("RCS dataset needs at least two time points");
  }
  if (pools.size() != times.size()) {
    throw ConfigError("RCS dataset has " + std::to_string(pools.size()) + " pools for " +
                      std::to_string(times.size()) + " times");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0) {
      throw ConfigError("RCS times must be finite and nonnegative");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ConfigError("RCS times must be strictly increasing");
    }
  }
  const std::size_t n_obs = n_observed();
  if (n_obs == 0) {
    throw ConfigError("RCS dataset observes no component");
  }
  for (std::size_t i = 0; i < pools.size(); ++i) {
    if (pools[i].empty()) {
      throw ConfigError("empty observation pool at t=" + format_double(times[i]));
    }
    for (const auto& obs : pools[i]) {
      if (obs.size() != n_obs) {
        throw ConfigError("observation at t=" + format_double(times[i]) + " has " +
                          std::to_string(obs.size()) + " values, expected " +
                          std::to_string(n_obs));
      }
      for (double v : obs) {
        if (!std::isfinite(v) || v < 0.0) {
          throw ConfigError("observation values must be finite and nonnegative (t=" +
                            format_double(times[i]) + ")");
        }
      }
    }
  }
}

void SyntheticSpec::validate() const
{
  model.validate();
  integrator.validate();
  const std::size_t np = model.n_params();
  if (centers.empty()) {
    throw ConfigError("synthetic spec needs at least one center");
  }
  if (half_widths.size() != centers.size()) {
    throw ConfigError("synthetic spec needs one half-width vector per center");
  }
  if (samples_per_center < 1) {
    throw ConfigError("samples_per_center must be at least 1");
  }
  for (std::size_t h = 0; h < centers.size(); ++h) {
    if (centers[h].size() != np || half_widths[h].size() != np) {
      throw ConfigError("center " + std::to_string(h) + " must have " + std::to_string(np) +
                        " parameters");
    }
    for (std::size_t j = 0; j < np; ++j) {
      const double c = centers[h][j];
      const double w = half_widths[h][j];
      if (!std::isfinite(c) || !std::isfinite(w) || w < 0.0) {
        throw ConfigError("center " + std::to_string(h) + ", parameter '" + model.param_names[j] +
                          "': values must be finite and widths nonnegative");
      }
      if (!model.nonnegative_params.empty() && model.nonnegative_params[j] && c - w < 0.0) {
        throw ConfigError("center " + std::to_string(h) + ", parameter '" + model.param_names[j] +
                          "': sampling box extends below zero");
      }
    }
  }
  if (times.size() < 2) {
    throw ConfigError("synthetic spec needs at least two observation times");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0 || (i > 0 && !(times[i] > times[i - 1]))) {
      throw ConfigError("synthetic times must be nonnegative and strictly increasing");
    }
  }
  if (!std::isfinite(noise_level) || noise_level < 0.0) {
    throw ConfigError("noise_level must be finite and nonnegative");
  }
  if (!initial_state.empty() && initial_state.size() != model.dim_state()) {
    throw ConfigError("initial_state must have " + std::to_string(model.dim_state()) + " entries");
  }
}

std::vector<ParamVector> relative_half_widths(const std::vector<ParamVector>& centers,
                                              double fraction)
{
  std::vector<ParamVector> widths;
  widths.reserve(centers.size());
  for (const auto& c : centers) {
    ParamVector w(c.size());
    std::transform(c.begin(), c.end(), w.begin(), [&](double v) { return std::abs(v) * fraction; });
    widths.push_back(std::move(w));
  }
  return widths;
}

namespace {

std::string describe(const ParamVector& p)
{
  std::string s = "[";
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += (i ? ", " : "") + format_double(p[i]);
  }
  return s + "]";
}

// Stream indices under the synthetic seed.
enum SyntheticStream : std::uint64_t { kDraws = 0, kNoise = 1, kShuffle = 2 };

} // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec)
{
  spec.validate();
  const auto& model = spec.model;
  const StateVector y0 = spec.initial_state.empty() ? model.default_initial_state : spec.initial_state;
  const auto observed = model.observed_indices();

  SyntheticData out;
  auto draws = substream(spec.seed, kDraws);
  for (std::size_t h = 0; h < spec.centers.size(); ++h) {
    for (std::size_t s = 0; s < spec.samples_per_center; ++s) {
      ParamVector p(model.n_params());
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double lo = spec.centers[h][j] - spec.half_widths[h][j];
        const double hi = spec.centers[h][j] + spec.half_widths[h][j];
        p[j] = lo + (hi - lo) * uniform01(draws);
      }
      out.truth.params.push_back(std::move(p));
    }
  }

  for (const auto& p : out.truth.params) {
    try {
      out.truth.trajectories.push_back(solve_ivp(model, p, y0, spec.times, spec.integrator));
    } catch (const IntegrationFailure& e) {
      throw EstimationError("synthetic generation failed at parameters " + describe(p) + ": " +
                            e.what());
    }
  }

  RcsDataset& data = out.data;
  data.times = spec.times;
  data.observed_mask = model.observed_mask;
  data.pools.resize(spec.times.size());
  for (const auto& traj : out.truth.trajectories) {
    for (std::size_t i = 0; i < traj.size(); ++i) {
      Observation obs;
      obs.reserve(observed.size());
      for (auto c : observed) {
        obs.push_back(traj.states[i][c]);
      }
      data.pools[i].push_back(std::move(obs));
    }
  }

  if (spec.noise_level > 0.0) {
    auto noise_rng = substream(spec.seed, kNoise);
    data = apply_multiplicative_noise(data, spec.noise_level, noise_rng());
  }

  auto shuffle_rng = substream(spec.seed, kShuffle);
  for (auto& pool : data.pools) {
    std::shuffle(pool.begin(), pool.end(), shuffle_rng);
  }
  data.validate();
  return out;
}

RcsDataset apply_multiplicative_noise(const RcsDataset& data, double level, std::uint64_t seed)
{
  if (!std::isfinite(level) || level < 0.0) {
    throw ConfigError("noise level must be finite and nonnegative");
  }
  RcsDataset out = data;
  if (level == 0.0) {
    return out;
  }
  auto rng = substream(seed, 0);
  std::normal_distribution<double> eta(0.0, level);
  for (auto& pool : out.pools) {
    for (auto& obs : pool) {
      for (double& v : obs) {
        v = std::max(0.0, v * (1.0 + eta(rng)));
      }
    }
  }
  return out;
}

namespace {

struct CsvRow
{
  double time;
  std::size_t component;
  double value;
  std::size_t line;
};

} // namespace

RcsDataset load_rcs_csv(const std::filesystem::path& path, const ModelSpec& model)
{
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open '" + path.string() + "'", 0);
  }

  RcsDataset data;
  bool have_header = false;
  bool has_replicate = false;
  std::string line;
  std::size_t lineno = 0;
  std::vector<CsvRow> rows;
  std::vector<std::string> replicate_of_row;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line.front() == '#') {
      constexpr std::string_view tag = "# units:";
      if (std::string_view(line).substr(0, tag.size()) == tag) {
        auto rest = std::string_view(line).substr(tag.size());
        data.units = std::string(rest.substr(std::min(rest.find_first_not_of(' '), rest.size())));
      }
      continue;
    }
    auto fields = split_csv_line(line);
    if (!have_header) {
      const bool ok3 = fields.size() >= 3 && fields[0] == "time" && fields[1] == "component" &&
                       fields[2] == "value";
      if (!ok3 || fields.size() > 4 || (fields.size() == 4 && fields[3] != "replicate_id")) {
        throw ParseError("expected header 'time,component,value[,replicate_id]'", lineno);
      }
      has_replicate = fields.size() == 4;
      have_header = true;
      continue;
    }
    const std::size_t expected = has_replicate ? 4 : 3;
    if (fields.size() != expected) {
      throw ParseError("expected " + std::to_string(expected) + " fields, got " +
                         std::to_string(fields.size()),
                       lineno);
    }
    CsvRow row{};
    row.line = lineno;
    row.time = parse_double(fields[0], lineno);
    if (!std::isfinite(row.time) || row.time < 0.0) {
      throw ParseError("time must be finite and nonnegative", lineno);
    }
    auto it = std::find(model.state_names.begin(), model.state_names.end(), fields[1]);
    if (it == model.state_names.end()) {
      throw ParseError("unknown component '" + std::string(fields[1]) + "' for model '" +
                         model.name + "'",
                       lineno);
    }
    row.component = static_cast<std::size_t>(it - model.state_names.begin());
    row.value = parse_double(fields[2], lineno);
    if (!std::isfinite(row.value) || row.value < 0.0) {
      throw ParseError("value must be finite and nonnegative", lineno);
    }
    if (has_replicate) {
      if (fields[3].empty()) {
        throw ParseError("empty replicate_id", lineno);
      }
      replicate_of_row.emplace_back(fields[3]);
    }
    rows.push_back(row);
  }
  if (!have_header) {
    throw ParseError("'" + path.string() + "' has no header", 0);
  }
  if (rows.empty()) {
    throw ParseError("'" + path.string() + "' has no data rows", 0);
  }

  data.observed_mask.assign(model.dim_state(), false);
  for (const auto& r : rows) {
    data.observed_mask[r.component] = true;
  }
  std::vector<std::size_t> slot(model.dim_state(), 0);
  std::size_t n_obs = 0;
  for (std::size_t c = 0; c < model.dim_state(); ++c) {
    if (data.observed_mask[c]) {
      slot[c] = n_obs++;
    }
  }

  // Per time, group rows into observations keyed by replicate (or by per-component
  // occurrence order when no replicate column exists). Groups keep first-seen order.
  struct Group
  {
    Observation values;
    std::vector<bool> filled;
    std::size_t first_line;
  };
  std::map<double, std::vector<Group>> by_time;
  std::map<double, std::map<std::string, std::size_t>> replicate_index;
  std::map<double, std::vector<std::size_t>> occurrence;

  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    auto& groups = by_time[r.time];
    std::size_t g = 0;
    if (has_replicate) {
      auto& index = replicate_index[r.time];
      auto [it, inserted] = index.try_emplace(replicate_of_row[k], groups.size());
      g = it->second;
    } else {
      auto& occ = occurrence[r.time];
      occ.resize(model.dim_state(), 0);
      g = occ[r.component]++;
    }
    if (g == groups.size()) {
      groups.push_back({Observation(n_obs, 0.0), std::vector<bool>(n_obs, false), r.line});
    }
    auto& group = groups[g];
    const std::size_t s = slot[r.component];
    if (group.filled[s]) {
      throw ParseError("duplicate value for component '" + model.state_names[r.component] +
                         "' in the same observation",
                       r.line);
    }
    group.values[s] = r.value;
    group.filled[s] = true;
  }

  for (auto& [t, groups] : by_time) {
    data.times.push_back(t);
    std::vector<Observation> pool;
    for (auto& g : groups) {
      if (std::find(g.filled.begin(), g.filled.end(), false) != g.filled.end()) {
        throw ParseError("observation at t=" + format_double(t) +
                           " is missing an observed component",
                         g.first_line);
      }
      pool.push_back(std::move(g.values));
    }
    data.pools.push_back(std::move(pool));
  }

  try {
    data.validate();
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), 0);
  }
  return data;
}

void write_rcs_csv(const std::filesystem::path& path, const RcsDataset& data,
                   const ModelSpec& model)
{
  data.validate();
  if (data.observed_mask.size() != model.dim_state()) {
    throw ConfigError("dataset mask does not match model '" + model.name + "'");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  if (!data.units.empty()) {
    out << "# units: " << data.units << '\n';
  }
  out << "time,component,value,replicate_id\n";
  std::vector<std::size_t> observed;
  for (std::size_t c = 0; c < data.observed_mask.size(); ++c) {
    if (data.observed_mask[c]) {
      observed.push_back(c);
    }
  }
  for (std::size_t i = 0; i < data.times.size(); ++i) {
    const std::string t = format_double(data.times[i]);
    for (std::size_t j = 0; j < data.pools[i].size(); ++j) {
      for (std::size_t s = 0; s < observed.size(); ++s) {
        out << t << ',' << model.state_names[observed[s]] << ','
            << format_double(data.pools[i][j][s]) << ',' << j << '\n';
      }
    }
  }
}

ArtificialTrajectory mean_trajectory(const RcsDataset& data)
{
  data.validate();
  ArtificialTrajectory traj;
  traj.times = data.times;
  const std::size_t n_obs = data.n_observed();
  for (const auto& pool : data.pools) {
    Observation mean(n_obs, 0.0);
    for (const auto& obs : pool) {
      for (std::size_t s = 0; s < n_obs; ++s) {
        mean[s] += obs[s];
      }
    }
    for (double& m : mean) {
      m /= static_cast<double>(pool.size());
    }
    traj.values.push_back(std::move(mean));
    traj.source_indices.push_back(ArtificialTrajectory::kSynthetic);
  }
  return traj;
}

} // namespace epd

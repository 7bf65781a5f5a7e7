#include "commands.hpp"

#include "svg.hpp"

#include <epd/accept.hpp>
#include <epd/errors.hpp>
#include <epd/metrics.hpp>
#include <epd/param_table.hpp>
#include <epd/resample.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace epd::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct LoadedData
{
  RcsDataset data;
  std::optional<TruthRecord> truth;
};

LoadedData load_data(const RunConfig& cfg, const ModelSpec& model)
{
  if (cfg.csv) {
    if (!fs::exists(*cfg.csv)) {
      throw ConfigError("dataset.csv: file '" + cfg.csv->string() + "' does not exist");
    }
    auto data = load_rcs_csv(*cfg.csv, model);
    if (data.observed_mask != model.observed_mask) {
      throw ConfigError("dataset.csv: observed components in the file do not match 'observed'");
    }
    return {std::move(data), std::nullopt};
  }
  auto syn = generate_synthetic(cfg.synthetic_spec(model));
  return {std::move(syn.data), std::move(syn.truth)};
}

void ensure_dir(const fs::path& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  }
}

std::ofstream open_out(const fs::path& path)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  return out;
}

void write_json(const fs::path& path, const ojson& j)
{
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::vector<double> finite_sorted(const std::vector<FitResult>& fits)
{
  std::vector<double> v;
  for (const auto& f : fits) {
    if (std::isfinite(f.loss)) {
      v.push_back(f.loss);
    }
  }
  std::sort(v.begin(), v.end());
  return v;
}

ojson loss_quantiles(const std::vector<FitResult>& fits)
{
  const auto v = finite_sorted(fits);
  ojson q;
  q["n_finite"] = v.size();
  if (v.empty()) {
    return q;
  }
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  q["min"] = v.front();
  q["q25"] = at(0.25);
  q["median"] = at(0.5);
  q["q75"] = at(0.75);
  q["max"] = v.back();
  return q;
}

std::string quantile_text(const std::vector<FitResult>& fits)
{
  const auto q = loss_quantiles(fits);
  if (q["n_finite"].get<std::size_t>() == 0) {
    return "no finite losses";
  }
  return "loss quantiles min=" + format_double(q["min"]) + " q25=" + format_double(q["q25"]) +
         " median=" + format_double(q["median"]) + " q75=" + format_double(q["q75"]) +
         " max=" + format_double(q["max"]);
}

void write_records(const fs::path& path, const std::vector<AcceptanceRecord>& records)
{
  auto out = open_out(path);
  out << "trajectory_index,loss,accept_prob,u,converged,accepted\n";
  for (const auto& r : records) {
    out << r.trajectory_index << ',' << format_double(r.loss) << ',' << format_double(r.accept_prob)
        << ',' << format_double(r.u) << ',' << (r.converged ? 1 : 0) << ',' << (r.accepted ? 1 : 0)
        << '\n';
  }
}

ojson marginals_json(const std::vector<MarginalSummary>& ms)
{
  ojson arr = ojson::array();
  for (const auto& m : ms) {
    arr.push_back({{"param", m.param_name},
                   {"wasserstein1", m.wasserstein1},
                   {"ks_stat", m.ks_stat},
                   {"mode_count", m.mode_count},
                   {"mode_locations", m.mode_locations}});
  }
  return arr;
}

void write_plots(const fs::path& dir, const ParamTable& table)
{
  const auto plot_dir = dir / "plots";
  ensure_dir(plot_dir);
  const std::size_t np = table.names.size();
  std::vector<std::vector<double>> cols(np);
  for (std::size_t j = 0; j < np; ++j) {
    cols[j] = table.column(j);
    write_histogram_svg(plot_dir / ("hist_" + table.names[j] + ".svg"), cols[j], table.names[j]);
  }
  for (std::size_t a = 0; a < np; ++a) {
    for (std::size_t b = a + 1; b < np; ++b) {
      write_scatter_svg(plot_dir / ("scatter_" + table.names[a] + "_" + table.names[b] + ".svg"),
                        cols[a], cols[b], table.names[a], table.names[b]);
    }
  }
}

EpdConfig with_reporting(EpdConfig ec, std::ostream& log)
{
  ec.progress = [&log, last = std::size_t{0}](std::size_t done, std::size_t total) mutable {
    const std::size_t pct = done * 10 / total;
    if (pct != last) {
      log << "fitted " << done << "/" << total << '\n';
      last = pct;
    }
  };
  ec.log = [&log](std::string_view line) { log << line << '\n'; };
  return ec;
}

ojson seeds_json(const RunConfig& cfg)
{
  return {{"data", cfg.seeds.data.value_or(0)},
          {"resample", cfg.seeds.resample.value_or(0)},
          {"gate", cfg.seeds.gate.value_or(0)},
          {"fit", cfg.seeds.fit.value_or(0)}};
}

} // namespace

RunConfig prepare_config(const fs::path& config_path, const Overrides& ov)
{
  if (!fs::exists(config_path)) {
    throw ConfigError("config file '" + config_path.string() + "' does not exist");
  }
  RunConfig cfg = load_run_config(config_path);
  if (ov.out) {
    cfg.output_dir = *ov.out;
  }
  if (ov.seed) {
    cfg.override_seeds(*ov.seed);
  }
  if (ov.method) {
    cfg.method = *ov.method;
  }
  if (ov.jobs) {
    cfg.jobs = *ov.jobs;
  }
  cfg.resolve_seeds();
  return cfg;
}

void cmd_generate(const RunConfig& cfg, std::ostream& log)
{
  const ModelSpec model = cfg.build_model();
  const auto spec = cfg.synthetic_spec(model);
  const auto syn = generate_synthetic(spec);
  ensure_dir(cfg.output_dir);
  write_rcs_csv(cfg.output_dir / "data.csv", syn.data, model);
  write_param_table(cfg.output_dir / "truth.csv", ParamTable{model.param_names, syn.truth.params});
  save_run_config(cfg.output_dir / "resolved_config.json", cfg);
  log << "generated " << syn.truth.params.size() << " individuals at " << syn.data.n_times()
      << " times into " << cfg.output_dir.string() << '\n';
}

std::size_t cmd_estimate(const RunConfig& cfg, std::ostream& log)
{
  const ModelSpec model = cfg.build_model();
  const auto loaded = load_data(cfg, model);
  const EpdConfig ec = with_reporting(cfg.epd_config(), log);
  ensure_dir(cfg.output_dir);
  save_run_config(cfg.output_dir / "resolved_config.json", cfg);

  ParamTable accepted{model.param_names, {}};
  std::vector<FitResult> fits;
  std::vector<AcceptanceRecord> records;
  std::size_t n_converged = 0;

  if (cfg.method == Method::mean) {
    auto fit = fit_mean_baseline(loaded.data, model, ec);
    if (!std::isfinite(fit.loss)) {
      throw EstimationError("mean-trajectory fit failed");
    }
    AcceptanceRecord rec;
    rec.loss = fit.loss;
    rec.accept_prob = 1.0;
    rec.converged = fit.converged;
    rec.accepted = true;
    records.push_back(rec);
    n_converged = fit.converged ? 1 : 0;
    accepted.rows.push_back(fit.params);
    fits.push_back(std::move(fit));
  } else {
    auto est = run_epd(loaded.data, model, ec);
    n_converged = est.n_converged();
    accepted.rows = std::move(est.accepted_params);
    records = std::move(est.records);
    fits = std::move(est.fits);
  }

  write_records(cfg.output_dir / "acceptance_records.csv", records);
  write_param_table(cfg.output_dir / "accepted_params.csv", accepted);
  if (loaded.truth) {
    write_param_table(cfg.output_dir / "truth.csv", ParamTable{model.param_names, loaded.truth->params});
  }

  ojson summary;
  summary["model"] = model.name;
  summary["method"] = method_name(cfg.method);
  summary["C"] = cfg.method == Method::ap ? 0.0 : cfg.C;
  summary["n_trajectories"] = cfg.method == Method::mean ? std::size_t{1} : cfg.n_trajectories;
  summary["n_converged"] = n_converged;
  summary["n_accepted"] = accepted.rows.size();
  summary["seeds"] = seeds_json(cfg);
  summary["loss_quantiles"] = loss_quantiles(fits);

  if (accepted.rows.empty()) {
    write_json(cfg.output_dir / "summary.json", summary);
    throw EstimationError("no accepted parameters (" + quantile_text(fits) + ")");
  }

  ojson medians;
  for (std::size_t j = 0; j < model.n_params(); ++j) {
    auto col = accepted.column(j);
    std::sort(col.begin(), col.end());
    const std::size_t n = col.size();
    medians[model.param_names[j]] = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  summary["medians"] = medians;
  if (loaded.truth) {
    summary["marginals"] = marginals_json(
      summarize(accepted, ParamTable{model.param_names, loaded.truth->params}));
  }
  write_json(cfg.output_dir / "summary.json", summary);
  if (cfg.plots) {
    write_plots(cfg.output_dir, accepted);
  }
  log << "accepted " << accepted.rows.size() << " of " << records.size() << " fits ("
      << n_converged << " converged); outputs in " << cfg.output_dir.string() << '\n';
  return accepted.rows.size();
}

void cmd_sweep_c(const RunConfig& cfg, const std::vector<double>& c_values, std::ostream& log)
{
  if (c_values.empty()) {
    throw ConfigError("estimate.sweep_c: at least one C value is required");
  }
  for (double c : c_values) {
    if (!std::isfinite(c) || c < 0.0) {
      throw ConfigError("estimate.sweep_c: values must be finite and nonnegative");
    }
  }
  const ModelSpec model = cfg.build_model();
  const auto loaded = load_data(cfg, model);
  const EpdConfig ec = with_reporting(cfg.epd_config(), log);
  ensure_dir(cfg.output_dir);
  save_run_config(cfg.output_dir / "resolved_config.json", cfg);

  const auto trajectories = sample_trajectories(loaded.data, ec.n_trajectories, ec.resample_seed);
  const auto fits = fit_batch(model, trajectories, ec);

  auto table = open_out(cfg.output_dir / "sweep.csv");
  table << "C,n_accepted";
  for (const auto& name : model.param_names) {
    table << ",modes_" << name;
  }
  table << '\n';

  for (double c : c_values) {
    const auto est = accept_fits(model, fits, c, ec.gate_seed);
    table << format_double(c) << ',' << est.accepted_params.size();
    const ParamTable acc{model.param_names, est.accepted_params};
    for (std::size_t j = 0; j < model.n_params(); ++j) {
      std::size_t modes = 0;
      if (acc.rows.size() >= 5) {
        modes = count_modes(acc.column(j)).count;
      }
      table << ',' << modes;
    }
    table << '\n';

    auto probs = open_out(cfg.output_dir / ("accept_probs_C" + format_double(c) + ".csv"));
    probs << "trajectory_index,loss,accept_prob,u,converged,accepted";
    for (const auto& name : model.param_names) {
      probs << ',' << name;
    }
    probs << '\n';
    for (std::size_t n = 0; n < est.records.size(); ++n) {
      const auto& r = est.records[n];
      probs << r.trajectory_index << ',' << format_double(r.loss) << ','
            << format_double(r.accept_prob) << ',' << format_double(r.u) << ','
            << (r.converged ? 1 : 0) << ',' << (r.accepted ? 1 : 0);
      for (double v : est.fits[n].params) {
        probs << ',' << format_double(v);
      }
      probs << '\n';
    }
    log << "C=" << format_double(c) << ": accepted " << est.accepted_params.size() << '\n';
  }
}

void cmd_metrics(const fs::path& estimate_csv,
                 const fs::path& truth_csv,
                 const fs::path& out_dir,
                 std::ostream& log)
{
  for (const auto& p : {estimate_csv, truth_csv}) {
    if (!fs::exists(p)) {
      throw ConfigError("file '" + p.string() + "' does not exist");
    }
  }
  const auto est = read_param_table(estimate_csv);
  const auto truth = read_param_table(truth_csv);
  const auto ms = summarize(est, truth);
  ensure_dir(out_dir);
  ojson j;
  j["estimate"] = estimate_csv.string();
  j["truth"] = truth_csv.string();
  j["n_estimate"] = est.rows.size();
  j["n_truth"] = truth.rows.size();
  j["marginals"] = marginals_json(ms);
  write_json(out_dir / "metrics.json", j);
  for (const auto& m : ms) {
    log << m.param_name << ": W1=" << format_double(m.wasserstein1)
        << " KS=" << format_double(m.ks_stat) << " modes=" << m.mode_count << '\n';
  }
}

} // namespace epd::cli

#include "commands.hpp"

#include <epd/errors.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

} // namespace

int main(int argc, char** argv)
{
  using namespace epd::cli;

  CLI::App app{"Estimate ODE parameter distributions from repeated cross-sectional data"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string method;
  unsigned jobs = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "base seed; sets data, resample, gate and fit seeds");
    sub->add_option("--jobs", jobs, "worker threads for fitting (0 = all cores)");
  };

  auto* gen = app.add_subcommand("generate", "simulate a synthetic dataset");
  add_common(gen);

  auto* est = app.add_subcommand("estimate", "estimate the parameter distribution");
  add_common(est);
  est->add_option("--method", method, "epd, ap or mean")
    ->check(CLI::IsMember({"epd", "ap", "mean"}));

  std::vector<double> c_values;
  auto* sweep = app.add_subcommand("sweep-c", "gate one fit batch at several scaling factors");
  add_common(sweep);
  sweep->add_option("--c", c_values, "scaling factors (default: estimate.sweep_c from the config)");

  std::string estimate_csv, truth_csv;
  auto* met = app.add_subcommand("metrics", "compare accepted parameters with the truth");
  met->add_option("--estimate", estimate_csv, "accepted-params CSV")->required();
  met->add_option("--truth", truth_csv, "truth CSV")->required();
  met->add_option("--out", out_dir, "output directory")->default_val(".");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigExit;
  }

  try {
    if (met->parsed()) {
      cmd_metrics(estimate_csv, truth_csv, out_dir, std::cout);
      return 0;
    }
    Overrides ov;
    auto* sub = app.get_subcommands().front();
    if (sub->count("--out")) {
      ov.out = out_dir;
    }
    if (sub->count("--seed")) {
      ov.seed = seed;
    }
    if (sub->count("--jobs")) {
      ov.jobs = jobs;
    }
    if (est->parsed() && est->count("--method")) {
      ov.method = parse_method(method);
    }
    const RunConfig cfg = prepare_config(config_path, ov);
    if (gen->parsed()) {
      cmd_generate(cfg, std::cout);
    } else if (est->parsed()) {
      cmd_estimate(cfg, std::cerr);
    } else {
      cmd_sweep_c(cfg, c_values.empty() ? cfg.sweep_c : c_values, std::cerr);
    }
    return 0;
  } catch (const epd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const epd::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
}

#include "epd/accept.hpp"

#include "epd/errors.hpp"
#include "epd/random.hpp"
#include "epd/resample.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace epd {

std::vector<double> accept_probabilities(std::span<const double> losses, double C)
{
  if (!std::isfinite(C) || C < 0.0) {
    throw ConfigError("scaling factor C must be finite and nonnegative");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double L : losses) {
    if (std::isfinite(L)) {
      lo = std::min(lo, L);
      hi = std::max(hi, L);
    }
  }
  if (!(lo <= hi)) {
    throw EstimationError("no successful fits");
  }
  const double range = hi - lo;
  std::vector<double> a(losses.size(), 0.0);
  for (std::size_t n = 0; n < losses.size(); ++n) {
    if (!std::isfinite(losses[n])) {
      continue;
    }
    const double s = range > 0.0 ? (losses[n] - lo) / range : 0.0;
    a[n] = 2.0 - 2.0 / (1.0 + std::exp(-C * s));
  }
  return a;
}

std::vector<double> gate_uniforms(std::size_t n, std::uint64_t seed)
{
  auto rng = substream(seed, 0);
  std::vector<double> u(n);
  for (auto& v : u) {
    v = uniform01(rng);
  }
  return u;
}

std::vector<bool> gate(std::span<const double> probs, std::uint64_t seed)
{
  const auto u = gate_uniforms(probs.size(), seed);
  std::vector<bool> accepted(probs.size());
  for (std::size_t n = 0; n < probs.size(); ++n) {
    accepted[n] = probs[n] > u[n];
  }
  return accepted;
}

void EpdConfig::validate() const
{
  if (n_trajectories < 1) {
    throw ConfigError("n_trajectories must be at least 1");
  }
  if (!std::isfinite(C) || C < 0.0) {
    throw ConfigError("scaling factor C must be finite and nonnegative");
  }
  fit.validate();
  integrator.validate();
}

std::size_t DistributionEstimate::n_converged() const
{
  return static_cast<std::size_t>(
    std::count_if(fits.begin(), fits.end(), [](const FitResult& f) { return f.converged; }));
}

std::vector<FitResult> fit_batch(const ModelSpec& model,
                                 const std::vector<ArtificialTrajectory>& trajectories,
                                 const EpdConfig& cfg)
{
  cfg.validate();
  const StateVector y0 = cfg.initial_state.empty() ? model.default_initial_state : cfg.initial_state;
  const std::size_t total = trajectories.size();
  std::vector<FitResult> fits(total);

  auto fit_one = [&](std::size_t k) {
    try {
      fits[k] = fit_trajectory(model, trajectories[k], y0, cfg.fit, cfg.integrator, k);
    } catch (const EvaluationError&) {
      fits[k] = FitResult{};
      fits[k].trajectory_index = k;
      fits[k].loss = std::numeric_limits<double>::infinity();
    }
  };

  unsigned jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(total, 1)));

  if (jobs <= 1) {
    for (std::size_t k = 0; k < total; ++k) {
      fit_one(k);
      if (cfg.progress) {
        cfg.progress(k + 1, total);
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::condition_variable cv;
    std::size_t done = 0;
    std::exception_ptr error;
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t k = next++; k < total; k = next++) {
          try {
            fit_one(k);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!error) {
              error = std::current_exception();
            }
          }
          {
            std::lock_guard lock(mu);
            ++done;
          }
          cv.notify_one();
        }
      });
    }
    std::size_t reported = 0;
    std::unique_lock lock(mu);
    while (reported < total) {
      cv.wait(lock, [&] { return done > reported; });
      reported = done;
      if (cfg.progress) {
        lock.unlock();
        cfg.progress(reported, total);
        lock.lock();
      }
    }
    lock.unlock();
    workers.clear();
    if (error) {
      std::rethrow_exception(error);
    }
  }

  if (cfg.log) {
    for (const auto& f : fits) {
      if (!f.converged) {
        cfg.log("trajectory " + std::to_string(f.trajectory_index) +
                ": fit did not converge (loss " + std::to_string(f.loss) + ")");
      }
    }
  }
  return fits;
}

DistributionEstimate accept_fits(const ModelSpec& model,
                                 std::vector<FitResult> fits,
                                 double C,
                                 std::uint64_t gate_seed)
{
  DistributionEstimate est;
  est.model_name = model.name;
  est.param_names = model.param_names;
  est.n_trajectories = fits.size();
  est.C = C;
  est.gate_seed = gate_seed;

  std::vector<double> losses(fits.size());
  for (std::size_t n = 0; n < fits.size(); ++n) {
    losses[n] = fits[n].converged ? fits[n].loss : std::numeric_limits<double>::infinity();
  }
  const auto a = accept_probabilities(losses, C);
  const auto u = gate_uniforms(fits.size(), gate_seed);

  est.records.reserve(fits.size());
  for (std::size_t n = 0; n < fits.size(); ++n) {
    AcceptanceRecord rec;
    rec.trajectory_index = fits[n].trajectory_index;
    rec.loss = fits[n].loss;
    rec.accept_prob = a[n];
    rec.u = u[n];
    rec.converged = fits[n].converged;
    rec.accepted = rec.converged && a[n] > u[n];
    if (rec.accepted) {
      est.accepted_params.push_back(fits[n].params);
    }
    est.records.push_back(rec);
  }
  est.fits = std::move(fits);
  return est;
}

DistributionEstimate run_epd(const RcsDataset& data, const ModelSpec& model, const EpdConfig& cfg)
{
  cfg.validate();
  model.validate();
  data.validate();
  if (data.observed_mask != model.observed_mask) {
    throw ConfigError("dataset observed components do not match model '" + model.name + "'");
  }
  const auto trajectories = sample_trajectories(data, cfg.n_trajectories, cfg.resample_seed);
  auto fits = fit_batch(model, trajectories, cfg);
  auto est = accept_fits(model, std::move(fits), cfg.C, cfg.gate_seed);
  est.resample_seed = cfg.resample_seed;
  est.fit_config = cfg.fit;
  return est;
}

FitResult fit_mean_baseline(const RcsDataset& data, const ModelSpec& model, const EpdConfig& cfg)
{
  cfg.validate();
  model.validate();
  if (data.observed_mask != model.observed_mask) {
    throw ConfigError("dataset observed components do not match model '" + model.name + "'");
  }
  const StateVector y0 = cfg.initial_state.empty() ? model.default_initial_state : cfg.initial_state;
  return fit_trajectory(model, mean_trajectory(data), y0, cfg.fit, cfg.integrator, 0);
}

} // namespace epd

#include "epd/fit.hpp"

#include "epd/errors.hpp"
#include "epd/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace epd {

void FitConfig::validate() const
{
  if (max_iterations < 1 || n_multistart < 1) {
    throw ConfigError("fit max_iterations and n_multistart must be at least 1");
  }
  if (!(param_tol > 0.0) || !(loss_tol > 0.0) || !(finite_difference_step > 0.0)) {
    throw ConfigError("fit tolerances and finite_difference_step must be positive");
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Residual evaluator with the data side of the transform precomputed.
class LogResiduals
{
public:
  LogResiduals(const ModelSpec& model, const ArtificialTrajectory& traj, std::span<const double> y0,
               const IntegratorConfig& icfg)
    : model_(model)
    , traj_(traj)
    , y0_(y0)
    , icfg_(icfg)
    , observed_(model.observed_indices())
  {
    if (y0.size() != model.dim_state()) {
      throw ConfigError("initial state has " + std::to_string(y0.size()) + " entries, model '" +
                        model.name + "' expects " + std::to_string(model.dim_state()));
    }
    if (traj.values.size() != traj.times.size()) {
      throw ConfigError("artificial trajectory has mismatched times and values");
    }
    target_.reserve(traj.times.size() * observed_.size());
    for (const auto& obs : traj.values) {
      if (obs.size() != observed_.size()) {
        throw ConfigError("artificial trajectory has " + std::to_string(obs.size()) +
                          " values per time, model '" + model.name + "' observes " +
                          std::to_string(observed_.size()));
      }
      for (double v : obs) {
        target_.push_back(std::log10(v + 1.0));
      }
    }
  }

  std::size_t size() const { return target_.size(); }

  // Throws IntegrationFailure.
  void eval(std::span<const double> p, std::vector<double>& out) const
  {
    const Trajectory sol = solve_ivp(model_, p, y0_, traj_.times, icfg_);
    out.resize(target_.size());
    std::size_t k = 0;
    for (const auto& state : sol.states) {
      for (auto c : observed_) {
        out[k] = std::log10(state[c] + 1.0) - target_[k];
        ++k;
      }
    }
  }

  bool try_eval(std::span<const double> p, std::vector<double>& out) const
  {
    try {
      eval(p, out);
    } catch (const IntegrationFailure&) {
      return false;
    }
    return std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); });
  }

private:
  const ModelSpec& model_;
  const ArtificialTrajectory& traj_;
  std::span<const double> y0_;
  const IntegratorConfig& icfg_;
  std::vector<std::size_t> observed_;
  std::vector<double> target_;
};

double sum_squares(const std::vector<double>& r)
{
  double s = 0.0;
  for (double v : r) {
    s += v * v;
  }
  return s;
}

double fd_step_for(double p, const Bounds& b, double rel)
{
  return rel * std::max(std::abs(p), 1e-3 * b.width());
}

// Fills column j; returns false if neither a forward nor a backward step evaluates.
bool jacobian_column(const LogResiduals& res, std::span<const double> p, const Bounds& b,
                     const std::vector<double>& r0, double rel, std::size_t j,
                     std::vector<double>& col, std::vector<double>& scratch, std::size_t& n_evals)
{
  ParamVector q(p.begin(), p.end());
  const double h = fd_step_for(p[j], b, rel);
  const bool forward_fits = p[j] + h <= b.upper;
  for (double sign : {forward_fits ? 1.0 : -1.0, forward_fits ? -1.0 : 1.0}) {
    q[j] = p[j] + sign * h;
    // Exact representable step, so the divided difference is not skewed by rounding.
    const double step = q[j] - p[j];
    ++n_evals;
    if (res.try_eval(q, scratch)) {
      col.resize(r0.size());
      for (std::size_t i = 0; i < r0.size(); ++i) {
        col[i] = (scratch[i] - r0[i]) / step;
      }
      return true;
    }
  }
  return false;
}

// Smooth bijection between an unbounded internal variable and [lower, upper].
struct SineTransform
{
  std::span<const Bounds> bounds;

  double to_external(std::size_t j, double x) const
  {
    const auto& b = bounds[j];
    return std::clamp(b.lower + 0.5 * b.width() * (std::sin(x) + 1.0), b.lower, b.upper);
  }
  double to_internal(std::size_t j, double p) const
  {
    const auto& b = bounds[j];
    const double u = std::clamp(2.0 * (p - b.lower) / b.width() - 1.0, -1.0, 1.0);
    return std::asin(u);
  }
  double derivative(std::size_t j, double x) const
  {
    return 0.5 * bounds[j].width() * std::cos(x);
  }
};

struct StartOutcome
{
  ParamVector params;
  double loss = kInf;
  bool converged = false;
};

StartOutcome levenberg_marquardt(const LogResiduals& res, std::span<const Bounds> bounds,
                                 const ParamVector& start, const FitConfig& cfg,
                                 std::size_t& n_evals)
{
  const std::size_t np = bounds.size();
  const std::size_t m = res.size();
  const SineTransform tf{bounds};

  Eigen::VectorXd x(np);
  ParamVector p(np);
  for (std::size_t j = 0; j < np; ++j) {
    x[j] = tf.to_internal(j, start[j]);
    p[j] = tf.to_external(j, x[j]);
  }

  std::vector<double> r, r_trial, scratch, col;
  ++n_evals;
  if (!res.try_eval(p, r)) {
    return {};
  }
  double loss = sum_squares(r);
  StartOutcome out{p, loss, false};
  if (loss == 0.0) {
    out.converged = true;
    return out;
  }

  Eigen::MatrixXd J(m, np);
  double lambda = -1.0;
  double nu = 2.0;
  ParamVector p_trial(np);

  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    for (std::size_t j = 0; j < np; ++j) {
      const double dpdx = tf.derivative(j, x[j]);
      if (jacobian_column(res, p, bounds[j], r, cfg.finite_difference_step, j, col, scratch,
                          n_evals)) {
        for (std::size_t i = 0; i < m; ++i) {
          J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i] * dpdx;
        }
      } else {
        J.col(static_cast<Eigen::Index>(j)).setZero();
      }
    }

    const Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(m));
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * rv;
    if (g.lpNorm<Eigen::Infinity>() <= 1e-300) {
      out.converged = true;
      return out;
    }
    Eigen::VectorXd diag = JtJ.diagonal();
    const double diag_max = std::max(diag.maxCoeff(), 1e-300);
    for (auto& d : diag) {
      d = std::max(d, 1e-12 * diag_max);
    }
    if (lambda < 0.0) {
      lambda = 1e-3;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 64 && !accepted; ++attempt) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * diag;
      const Eigen::VectorXd delta = A.ldlt().solve(-g);
      const double step_norm = delta.lpNorm<Eigen::Infinity>();
      const double x_norm = x.lpNorm<Eigen::Infinity>();
      if (!delta.allFinite()) {
        lambda *= nu;
        nu *= 2.0;
        continue;
      }

      const Eigen::VectorXd x_trial = x + delta;
      for (std::size_t j = 0; j < np; ++j) {
        p_trial[j] = tf.to_external(j, x_trial[static_cast<Eigen::Index>(j)]);
      }
      ++n_evals;
      const bool ok = res.try_eval(p_trial, r_trial);
      const double loss_trial = ok ? sum_squares(r_trial) : kInf;

      if (loss_trial < loss) {
        const Eigen::VectorXd predicted_r = rv + J * delta;
        const double predicted = loss - predicted_r.squaredNorm();
        const double rho = predicted > 0.0 ? (loss - loss_trial) / predicted : 0.0;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;

        const double decrease = loss - loss_trial;
        x = x_trial;
        p = p_trial;
        r.swap(r_trial);
        loss = loss_trial;
        out = {p, loss, false};
        accepted = true;

        if (loss == 0.0 || decrease <= cfg.loss_tol * (loss + decrease) ||
            step_norm <= cfg.param_tol * (1.0 + x_norm)) {
          out.converged = true;
          return out;
        }
      } else {
        if (step_norm <= cfg.param_tol * (1.0 + x_norm)) {
          // No representable improvement left along the damped direction.
          out.converged = true;
          return out;
        }
        lambda *= nu;
        nu *= 2.0;
      }
    }
    if (!accepted) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

} // namespace

std::vector<double> residuals(const ModelSpec& model,
                              std::span<const double> p,
                              const ArtificialTrajectory& traj,
                              std::span<const double> y0,
                              const IntegratorConfig& icfg)
{
  LogResiduals res(model, traj, y0, icfg);
  std::vector<double> out;
  res.eval(p, out);
  return out;
}

double objective(const ModelSpec& model,
                 std::span<const double> p,
                 const ArtificialTrajectory& traj,
                 std::span<const double> y0,
                 const IntegratorConfig& icfg)
{
  LogResiduals res(model, traj, y0, icfg);
  std::vector<double> r;
  if (!res.try_eval(p, r)) {
    return kInf;
  }
  return sum_squares(r);
}

std::vector<std::vector<double>> residual_jacobian(const ModelSpec& model,
                                                   std::span<const double> p,
                                                   const ArtificialTrajectory& traj,
                                                   std::span<const double> y0,
                                                   double fd_step,
                                                   const IntegratorConfig& icfg)
{
  LogResiduals res(model, traj, y0, icfg);
  std::vector<double> r0, scratch;
  res.eval(p, r0);
  std::vector<std::vector<double>> jac(p.size());
  std::size_t evals = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!jacobian_column(res, p, model.param_bounds[j], r0, fd_step, j, jac[j], scratch, evals)) {
      throw IntegrationFailure("finite-difference step failed for parameter '" +
                                 model.param_names[j] + "'",
                               0.0);
    }
  }
  return jac;
}

ParamVector initial_guess(std::span<const Bounds> bounds)
{
  ParamVector p;
  p.reserve(bounds.size());
  for (const auto& b : bounds) {
    p.push_back(b.lower > 0.0 ? std::sqrt(b.lower * b.upper) : 0.5 * (b.lower + b.upper));
  }
  return p;
}

FitResult fit_trajectory(const ModelSpec& model,
                         const ArtificialTrajectory& traj,
                         std::span<const double> y0,
                         const FitConfig& cfg,
                         const IntegratorConfig& icfg,
                         std::size_t trajectory_index)
{
  cfg.validate();
  const std::span<const Bounds> bounds = model.param_bounds;
  if (bounds.size() != model.n_params()) {
    throw ConfigError("model '" + model.name + "' needs one bound pair per parameter");
  }
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    if (!std::isfinite(bounds[j].lower) || !std::isfinite(bounds[j].upper) ||
        !(bounds[j].lower < bounds[j].upper)) {
      throw ConfigError("fit bounds for '" + model.param_names[j] +
                        "' must be finite with lower < upper");
    }
  }
  const LogResiduals res(model, traj, y0, icfg);

  std::vector<ParamVector> starts{initial_guess(bounds)};
  if (cfg.n_multistart > 1) {
    auto rng = substream(cfg.seed, trajectory_index);
    for (std::size_t s = 1; s < cfg.n_multistart; ++s) {
      ParamVector p(bounds.size());
      for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] = bounds[j].lower + bounds[j].width() * uniform01(rng);
      }
      starts.push_back(std::move(p));
    }
  }

  FitResult best;
  best.trajectory_index = trajectory_index;
  best.loss = kInf;
  best.params = starts.front();
  std::optional<StartOutcome> chosen;
  for (const auto& start : starts) {
    StartOutcome o = levenberg_marquardt(res, bounds, start, cfg, best.n_evals);
    if (std::isfinite(o.loss) && (!chosen || o.loss < chosen->loss)) {
      chosen = std::move(o);
    }
  }
  if (chosen) {
    best.params = std::move(chosen->params);
    best.loss = chosen->loss;
    best.converged = chosen->converged;
  }
  return best;
}

} // namespace epd

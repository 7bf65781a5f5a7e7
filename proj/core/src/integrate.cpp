#include "epd/integrate.hpp"

#include "epd/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace epd {

void IntegratorConfig::validate() const
{
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw ConfigError("integrator tolerances must be positive");
  }
  if (max_steps < 1) {
    throw ConfigError("integrator max_steps must be at least 1");
  }
  if (!(min_step >= 0.0)) {
    throw ConfigError("integrator min_step must be nonnegative");
  }
}

namespace {

// Dormand-Prince 5(4) tableau with the 4th-order continuous extension of
// Hairer, Norsett & Wanner (dopri5).
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

class Stepper
{
public:
  Stepper(const ModelSpec& model, std::span<const double> p, const IntegratorConfig& cfg)
    : model_(model)
    , p_(p)
    , cfg_(cfg)
    , n_(model.dim_state())
  {
    for (auto& k : k_) {
      k.resize(n_);
    }
    tmp_.resize(n_);
    y_new_.resize(n_);
    for (auto& r : rcont_) {
      r.resize(n_);
    }
  }

  void rhs(const std::vector<double>& y, double t, std::vector<double>& out)
  {
    model_.rhs(y, p_, t, out);
  }

  double initial_step(const std::vector<double>& y0, const std::vector<double>& f0, double t0,
                      double h_max)
  {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y0[i]);
      dnf += (f0[i] / sk) * (f0[i] / sk);
      dny += (y0[i] / sk) * (y0[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, h_max);

    for (std::size_t i = 0; i < n_; ++i) {
      tmp_[i] = y0[i] + h * f0[i];
    }
    rhs(tmp_, t0 + h, k_[1]);
    double der2 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y0[i]);
      const double d = (k_[1][i] - f0[i]) / sk;
      der2 += d * d;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = (der12 <= 1e-15 || !std::isfinite(der12))
                        ? std::max(1e-6, h * 1e-3)
                        : std::pow(0.01 / der12, 1.0 / 5.0);
    return std::min({100.0 * h, h1, h_max});
  }

  // One trial step from (t, y) with k_[0] = f(t, y). Returns the scaled error norm;
  // the candidate state lands in y_new_ and its derivative in k_[6].
  double trial(double t, const std::vector<double>& y, double h)
  {
    auto& k1 = k_[0];
    auto& k2 = k_[1];
    auto& k3 = k_[2];
    auto& k4 = k_[3];
    auto& k5 = k_[4];
    auto& k6 = k_[5];
    auto& k7 = k_[6];
    for (std::size_t i = 0; i < n_; ++i) {
      tmp_[i] = y[i] + h * a21 * k1[i];
    }
    rhs(tmp_, t + c2 * h, k2);
    for (std::size_t i = 0; i < n_; ++i) {
      tmp_[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    }
    rhs(tmp_, t + c3 * h, k3);
    for (std::size_t i = 0; i < n_; ++i) {
      tmp_[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    }
    rhs(tmp_, t + c4 * h, k4);
    for (std::size_t i = 0; i < n_; ++i) {
      tmp_[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    rhs(tmp_, t + c5 * h, k5);
    for (std::size_t i = 0; i < n_; ++i) {
      tmp_[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    rhs(tmp_, t + h, k6);
    for (std::size_t i = 0; i < n_; ++i) {
      y_new_[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    rhs(y_new_, t + h, k7);

    // Steps aim at a quarter of the requested local tolerance so the global
    // error over a growth phase stays within a small multiple of rel_tol.
    constexpr double kLocalFraction = 0.25;
    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sk = kLocalFraction *
        (cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new_[i])));
      const double e =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]) / sk;
      err += e * e;
    }
    return std::sqrt(err / static_cast<double>(n_));
  }

  // Prepares the continuous extension for the accepted step (t, y) -> (t + h, y_new_).
  void prepare_dense(const std::vector<double>& y, double h)
  {
    for (std::size_t i = 0; i < n_; ++i) {
      const double ydiff = y_new_[i] - y[i];
      const double bspl = h * k_[0][i] - ydiff;
      rcont_[0][i] = y[i];
      rcont_[1][i] = ydiff;
      rcont_[2][i] = bspl;
      rcont_[3][i] = ydiff - h * k_[6][i] - bspl;
      rcont_[4][i] = h * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] + d5 * k_[4][i] +
                          d6 * k_[5][i] + d7 * k_[6][i]);
    }
  }

  void dense(double theta, StateVector& out) const
  {
    const double theta1 = 1.0 - theta;
    out.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      out[i] = rcont_[0][i] +
               theta * (rcont_[1][i] +
                        theta1 * (rcont_[2][i] + theta * (rcont_[3][i] + theta1 * rcont_[4][i])));
    }
  }

  std::vector<double>& k(std::size_t i) { return k_[i]; }
  std::vector<double>& y_new() { return y_new_; }

private:
  const ModelSpec& model_;
  std::span<const double> p_;
  const IntegratorConfig& cfg_;
  std::size_t n_;
  std::array<std::vector<double>, 7> k_;
  std::vector<double> tmp_;
  std::vector<double> y_new_;
  std::array<std::vector<double>, 5> rcont_;
};

bool all_finite(const std::vector<double>& v)
{
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

Trajectory solve_ivp(const ModelSpec& model,
                     std::span<const double> p,
                     std::span<const double> y0,
                     std::span<const double> times,
                     const IntegratorConfig& cfg)
{
  cfg.validate();
  const std::size_t n = model.dim_state();
  if (y0.size() != n) {
    throw ConfigError("initial state has " + std::to_string(y0.size()) + " entries, model '" +
                      model.name + "' expects " + std::to_string(n));
  }
  if (p.size() != model.n_params()) {
    throw ConfigError("parameter vector has " + std::to_string(p.size()) + " entries, model '" +
                      model.name + "' expects " + std::to_string(model.n_params()));
  }
  if (times.empty()) {
    throw ConfigError("at least one output time is required");
  }
  if (!(times[0] >= 0.0)) {
    throw ConfigError("output times must be nonnegative");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw ConfigError("output times must be strictly increasing");
    }
  }

  Trajectory out;
  out.times.assign(times.begin(), times.end());
  out.states.resize(times.size());

  std::vector<double> y(y0.begin(), y0.end());
  double t = 0.0;
  const double t_end = times.back();
  std::size_t next_out = 0;
  // Largest magnitude seen per component; sets the scale of tolerable negative error.
  std::vector<double> peak(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    peak[i] = std::abs(y[i]);
  }
  while (next_out < times.size() && times[next_out] == 0.0) {
    out.states[next_out++] = y;
  }

  if (next_out < times.size()) {
    if (!all_finite(y)) {
      throw IntegrationFailure("non-finite initial state", t);
    }
    Stepper stepper(model, p, cfg);
    stepper.rhs(y, t, stepper.k(0));
    if (!all_finite(stepper.k(0))) {
      throw IntegrationFailure("non-finite derivative", t);
    }

    const double h_max = t_end;
    double h = stepper.initial_step(y, stepper.k(0), t, h_max);
    // Hairer's PI step-size controller constants.
    constexpr double safe = 0.9, fac_min = 0.2, fac_max = 10.0, beta = 0.04;
    const double expo1 = 0.2 - beta * 0.75;
    double fac_old = 1e-4;
    bool last_rejected = false;
    std::size_t steps = 0;

    while (next_out < times.size()) {
      if (++steps > cfg.max_steps) {
        throw IntegrationFailure("maximum number of steps exceeded", t);
      }
      const double h_floor =
        std::max(cfg.min_step, 16.0 * std::numeric_limits<double>::epsilon() * std::abs(t));
      if (h < h_floor) {
        throw IntegrationFailure("step size underflow", t);
      }
      // Land exactly on the final time; overshoot would extrapolate the last step.
      if (t + 1.01 * h >= t_end) {
        h = t_end - t;
      }

      const double err = stepper.trial(t, y, h);
      if (!std::isfinite(err) || !all_finite(stepper.y_new())) {
        h *= 0.1;
        last_rejected = true;
        continue;
      }

      const double fac11 = std::pow(err, expo1);
      if (err <= 1.0) {
        double fac = fac11 / std::pow(fac_old, beta);
        fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
        double h_new = h / fac;
        fac_old = std::max(err, 1e-4);

        stepper.prepare_dense(y, h);
        const bool at_end = (t + h == t_end);
        const double t_new = at_end ? t_end : t + h;
        while (next_out < times.size() && times[next_out] <= t_new) {
          if (times[next_out] == t_new) {
            out.states[next_out] = stepper.y_new();
          } else {
            stepper.dense((times[next_out] - t) / h, out.states[next_out]);
          }
          ++next_out;
        }

        y.swap(stepper.y_new());
        for (std::size_t i = 0; i < y.size(); ++i) {
          peak[i] = std::max(peak[i], std::abs(y[i]));
        }
        stepper.k(0).swap(stepper.k(6));
        t = t_new;

        if (last_rejected) {
          h_new = std::min(h_new, h);
        }
        last_rejected = false;
        h = std::min(h_new, h_max);
      } else {
        h /= std::min(1.0 / fac_min, fac11 / safe);
        last_rejected = true;
      }
    }
  }

  for (auto& row : out.states) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      double& v = row[i];
      if (!std::isfinite(v)) {
        throw IntegrationFailure("non-finite state", t);
      }
      if (v < 0.0) {
        if (v < -(cfg.abs_tol + cfg.rel_tol * peak[i])) {
          throw IntegrationFailure("state became negative", t);
        }
        v = 0.0;
      }
    }
  }
  return out;
}

} // namespace epd

#include "gen.hpp"

#include <epd/errors.hpp>
#include <epd/integrate.hpp>
#include <epd/model.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

using namespace epd;

namespace {

double logistic_exact(double r, double K, double y0, double t)
{
  return K / (1.0 + (K - y0) / y0 * std::exp(-r * t));
}

} // namespace

TEST(Integrate, ExponentialUnitRateReachesE)
{
  const auto m = make_builtin("exponential");
  const auto sol = solve_ivp(m, std::vector{1.0}, std::vector{1.0}, std::vector{1.0});
  ASSERT_EQ(sol.size(), 1u);
  EXPECT_NEAR(sol.states[0][0], std::exp(1.0), 1e-8 * std::exp(1.0));
}

TEST(Integrate, LogisticMatchesClosedForm)
{
  const auto m = make_builtin("logistic");
  const std::vector<double> times{5, 10, 15, 20};
  const auto sol = solve_ivp(m, std::vector{2.8, 1.0}, std::vector{1e-4}, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double e = logistic_exact(2.8, 1.0, 1e-4, times[i]);
    EXPECT_NEAR(sol.states[i][0], e, 1e-7 * e) << times[i];
  }
}

TEST(Integrate, TargetCellsNonincreasingOverTwelveDays)
{
  const auto m = make_builtin("target_cell_limited");
  const auto sol = solve_ivp(m, benchmark_centers(m.name, 1).front(), m.default_initial_state,
                             benchmark_times(m.name));
  ASSERT_EQ(sol.size(), 13u);
  // Once T is depleted its computed value sits at the absolute-tolerance floor.
  const double floor = IntegratorConfig{}.abs_tol;
  for (std::size_t i = 1; i < sol.size(); ++i) {
    EXPECT_LE(sol.states[i][0], sol.states[i - 1][0] + floor) << i;
    for (double v : sol.states[i]) {
      EXPECT_GE(v, 0.0);
      EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(Integrate, TimeZeroReturnsInitialState)
{
  const auto m = make_builtin("exponential");
  const auto sol = solve_ivp(m, std::vector{2.0}, std::vector{1.5}, std::vector{0.0, 0.5});
  EXPECT_EQ(sol.states[0][0], 1.5);
  EXPECT_NEAR(sol.states[1][0], 1.5 * std::exp(1.0), 1e-7);
}

TEST(Integrate, RejectsBadTimeGrids)
{
  const auto m = make_builtin("exponential");
  EXPECT_THROW(solve_ivp(m, std::vector{1.0}, std::vector{1.0}, std::vector{1.0, 1.0}), ConfigError);
  EXPECT_THROW(solve_ivp(m, std::vector{1.0}, std::vector{1.0}, std::vector{2.0, 1.0}), ConfigError);
  EXPECT_THROW(solve_ivp(m, std::vector{1.0}, std::vector{1.0}, std::vector{-1.0}), ConfigError);
  EXPECT_THROW(solve_ivp(m, std::vector{1.0}, std::vector{1.0, 2.0}, std::vector{1.0}), ConfigError);
}

TEST(Integrate, ConfigValidation)
{
  IntegratorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.rel_tol = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.abs_tol = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.max_steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Integrate, StepBudgetExhaustionReportsLastTime)
{
  const auto m = make_builtin("logistic");
  IntegratorConfig c;
  c.max_steps = 3;
  try {
    solve_ivp(m, std::vector{2.8, 1.0}, std::vector{1e-4}, std::vector{20.0}, c);
    FAIL() << "expected IntegrationFailure";
  } catch (const IntegrationFailure& e) {
    EXPECT_GE(e.last_time(), 0.0);
    EXPECT_LT(e.last_time(), 20.0);
  }
}

TEST(Integrate, BlowUpIsAnIntegrationFailure)
{
  // y' = y^2 from y(0) = 1 explodes at t = 1.
  ModelSpec m;
  m.name = "blowup";
  m.state_names = {"y"};
  m.param_names = {"k"};
  m.rhs = [](std::span<const double> y, std::span<const double>, double, std::span<double> d) {
    d[0] = y[0] * y[0];
  };
  m.default_initial_state = {1.0};
  m.observed_mask = {true};
  m.param_bounds = {{0, 1}};
  m.nonnegative_params = {false};
  EXPECT_THROW(solve_ivp(m, std::vector{0.0}, std::vector{1.0}, std::vector{2.0}), IntegrationFailure);
}

TEST(Integrate, LargeNegativeExcursionFails)
{
  ModelSpec m = make_builtin("exponential");
  m.rhs = [](std::span<const double>, std::span<const double> p, double, std::span<double> d) {
    d[0] = -p[0];
  };
  EXPECT_THROW(solve_ivp(m, std::vector{1.0}, std::vector{0.5}, std::vector{1.0}), IntegrationFailure);
}

TEST(Integrate, Deterministic)
{
  const auto m = make_builtin("target_cell_limited");
  const auto p = benchmark_centers(m.name, 1).front();
  const auto a = solve_ivp(m, p, m.default_initial_state, benchmark_times(m.name));
  const auto b = solve_ivp(m, p, m.default_initial_state, benchmark_times(m.name));
  EXPECT_EQ(a.states, b.states);
}

TEST(IntegrateProperty, ClosedFormErrorWithinTenTimesTolerance)
{
  test::Gen g(21);
  const auto ex = make_builtin("exponential");
  const auto lg = make_builtin("logistic");
  const IntegratorConfig cfg;
  for (int k = 0; k < 100; ++k) {
    const double a = g.uniform(ex.param_bounds[0].lower, ex.param_bounds[0].upper);
    const auto t_ex = benchmark_times("exponential");
    const auto s1 = solve_ivp(ex, std::vector{a}, ex.default_initial_state, t_ex, cfg);
    for (std::size_t i = 0; i < t_ex.size(); ++i) {
      const double e = std::exp(a * t_ex[i]);
      EXPECT_LE(std::abs(s1.states[i][0] - e) / e, 10 * cfg.rel_tol);
    }
    const double r = g.uniform(lg.param_bounds[0].lower, lg.param_bounds[0].upper);
    const double K = g.uniform(lg.param_bounds[1].lower, lg.param_bounds[1].upper);
    const auto t_lg = benchmark_times("logistic");
    const auto s2 = solve_ivp(lg, std::vector{r, K}, lg.default_initial_state, t_lg, cfg);
    for (std::size_t i = 0; i < t_lg.size(); ++i) {
      const double e = logistic_exact(r, K, 1e-4, t_lg[i]);
      EXPECT_LE(std::abs(s2.states[i][0] - e) / e, 10 * cfg.rel_tol) << r << " " << K;
    }
  }
}

TEST(IntegrateProperty, TighterToleranceDoesNotIncreaseError)
{
  test::Gen g(22);
  const auto lg = make_builtin("logistic");
  const std::vector<double> times{5, 10, 15, 20};
  std::size_t violations = 0, checks = 0;
  std::string first;
  for (int k = 0; k < 100; ++k) {
    const double r = g.uniform(0.5, 6), K = g.uniform(0.3, 2);
    double prev = INFINITY;
    for (double tol = 1e-6; tol > 1e-8; tol *= 0.5) {
      IntegratorConfig c;
      c.rel_tol = tol;
      c.abs_tol = tol * 1e-2;
      const auto s = solve_ivp(lg, std::vector{r, K}, lg.default_initial_state, times, c);
      double err = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double e = logistic_exact(r, K, 1e-4, times[i]);
        err = std::max(err, std::abs(s.states[i][0] - e) / e);
      }
      // Allow round-off level noise once the error is at machine scale.
      if (std::isfinite(prev)) {
        ++checks;
        if (err > std::max(prev, 1e-13)) {
          if (violations++ == 0) {
            std::ostringstream os;
            os << "r=" << r << " K=" << K << " tol=" << tol << " err=" << err << " prev=" << prev;
            first = os.str();
          }
        }
      }
      prev = err;
    }
  }
  EXPECT_EQ(violations, 0u) << violations << " of " << checks << " halvings increased the error; first: " << first;
}

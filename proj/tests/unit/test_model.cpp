#include "gen.hpp"

#include <epd/errors.hpp>
#include <epd/model.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace epd;

TEST(Model, LogisticHasRAndKAndSmallInitialLevel)
{
  const auto m = make_builtin("logistic");
  EXPECT_EQ(m.param_names, (std::vector<std::string>{"r", "K"}));
  ASSERT_EQ(m.dim_state(), 1u);
  EXPECT_DOUBLE_EQ(m.default_initial_state[0], 1e-4);
}

TEST(Model, ExponentialZeroRateIsStationary)
{
  const auto m = make_builtin("exponential");
  EXPECT_EQ(eval_rhs(m, std::vector{2.0}, std::vector{0.0}, 0.3)[0], 0.0);
  EXPECT_EQ(eval_rhs(m, std::vector{3.0}, std::vector{2.0}, 0.0)[0], 6.0);
}

TEST(Model, TargetCellWithoutInfectionOnlyDrainsEclipseCells)
{
  const auto m = make_builtin("target_cell_limited");
  EXPECT_EQ(m.param_names,
            (std::vector<std::string>{"beta", "p", "c", "kappa", "delta", "K_delta"}));
  EXPECT_EQ(m.default_initial_state, (StateVector{1e7, 75, 0, 0}));
  const double kappa = 4.0;
  const auto d = eval_rhs(m, m.default_initial_state, std::vector{0.0, 1.6, 13.0, kappa, 1.6e6, 4.5e4}, 0.0);
  EXPECT_EQ(d[0], 0.0);
  EXPECT_DOUBLE_EQ(d[1], -kappa * 75.0);
}

TEST(Model, TargetCellVirusProductionAtTableCenter)
{
  const auto m = make_builtin("target_cell_limited");
  const auto center = benchmark_centers("target_cell_limited", 1).front();
  const auto d = eval_rhs(m, std::vector{1e6, 0.0, 1e4, 0.0}, center, 0.0);
  EXPECT_DOUBLE_EQ(d[3], 1.6e4);
}

TEST(Model, LogisticCarryingCapacityIsFixedPoint)
{
  const auto m = make_builtin("logistic");
  test::Gen g(11);
  for (int i = 0; i < 100; ++i) {
    const double r = g.uniform(0.1, 10), K = g.uniform(0.1, 5);
    EXPECT_EQ(eval_rhs(m, std::vector{K}, std::vector{r, K}, 0.0)[0], 0.0);
  }
}

TEST(Model, UnknownNameListsValidSet)
{
  try {
    make_builtin("gompertz");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& n : builtin_model_names()) {
      EXPECT_NE(msg.find(n), std::string::npos) << msg;
    }
  }
}

TEST(Model, BuiltinsValidate)
{
  for (const auto& n : builtin_model_names()) {
    const auto m = make_builtin(n);
    EXPECT_NO_THROW(m.validate()) << n;
    EXPECT_EQ(m.param_bounds.size(), m.n_params());
    EXPECT_GE(m.n_observed(), 1u);
    for (int H = 1; H <= 3; ++H) {
      const auto centers = benchmark_centers(n, H);
      ASSERT_EQ(centers.size(), static_cast<std::size_t>(H));
      for (const auto& c : centers) {
        ASSERT_EQ(c.size(), m.n_params());
        for (std::size_t j = 0; j < c.size(); ++j) {
          EXPECT_TRUE(m.param_bounds[j].contains(c[j])) << n << " " << m.param_names[j];
        }
      }
    }
  }
}

TEST(Model, TableRowsLoadWithScalesApplied)
{
  const auto bi = benchmark_centers("target_cell_limited", 2);
  EXPECT_DOUBLE_EQ(bi[0][0], 2.88e-4);
  EXPECT_DOUBLE_EQ(bi[0][2], 18.2);
  EXPECT_DOUBLE_EQ(bi[1][5], 4.95e4);
  const auto tri = benchmark_centers("target_cell_limited", 3);
  EXPECT_DOUBLE_EQ(tri[2][2], 7.8);
  EXPECT_DOUBLE_EQ(tri[1][5], 7.2e4);
}

TEST(Model, LogisticPresetCenters)
{
  EXPECT_EQ(benchmark_centers("logistic", 1), (std::vector<ParamVector>{{2.8, 1.0}}));
  EXPECT_EQ(benchmark_centers("logistic", 2), (std::vector<ParamVector>{{4.0, 0.6}, {1.6, 1.4}}));
  EXPECT_EQ(benchmark_centers("logistic", 3),
            (std::vector<ParamVector>{{1.6, 0.6}, {4.0, 0.9}, {2.0, 1.3}}));
}

TEST(Model, BenchmarkTimeGrids)
{
  EXPECT_EQ(benchmark_times("exponential"), (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
  EXPECT_EQ(benchmark_times("logistic"), (std::vector<double>{5, 10, 15, 20}));
  const auto tc = benchmark_times("target_cell_limited");
  ASSERT_EQ(tc.size(), 13u);
  EXPECT_EQ(tc.front(), 0.0);
  EXPECT_EQ(tc.back(), 12.0);
}

TEST(Model, EvalRhsRejectsBadInput)
{
  const auto m = make_builtin("logistic");
  EXPECT_THROW(eval_rhs(m, std::vector{1.0, 2.0}, std::vector{1.0, 1.0}, 0.0), EvaluationError);
  EXPECT_THROW(eval_rhs(m, std::vector{1.0}, std::vector{1.0}, 0.0), EvaluationError);
  EXPECT_THROW(eval_rhs(m, std::vector<double>{NAN}, std::vector{1.0, 1.0}, 0.0), EvaluationError);
  // K + I2 = 0 in the target-cell model divides by zero.
  const auto tc = make_builtin("target_cell_limited");
  EXPECT_THROW(eval_rhs(tc, std::vector{1e6, 1.0, 0.0, 1.0}, std::vector{1e-4, 1.0, 1.0, 1.0, 1.0, 0.0}, 0.0),
               EvaluationError);
}

TEST(ModelProperty, RhsMatchesHandWrittenOracles)
{
  test::Gen g(12);
  const auto ex = make_builtin("exponential");
  const auto lg = make_builtin("logistic");
  const auto tc = make_builtin("target_cell_limited");
  for (int i = 0; i < 1000; ++i) {
    const double y = g.uniform(0, 10), a = g.uniform(-5, 5), t = g.uniform(0, 20);
    EXPECT_EQ(eval_rhs(ex, std::vector{y}, std::vector{a}, t)[0], a * y);

    const double r = g.uniform(0.1, 6), K = g.uniform(0.1, 2);
    EXPECT_EQ(eval_rhs(lg, std::vector{y}, std::vector{r, K}, t)[0], r * y * (1.0 - y / K));

    const double T = g.log_uniform(1, 1e7), I1 = g.log_uniform(1e-3, 1e6), I2 = g.log_uniform(1e-3, 1e6),
                 V = g.log_uniform(1e-3, 1e8);
    const double be = g.log_uniform(1e-5, 1e-3), p = g.uniform(0.1, 20), c = g.uniform(1, 200),
                 ka = g.uniform(0.5, 50), de = g.log_uniform(1e5, 1e7), Kd = g.log_uniform(1e3, 1e6);
    const auto d = eval_rhs(tc, std::vector{T, I1, I2, V}, std::vector{be, p, c, ka, de, Kd}, t);
    EXPECT_DOUBLE_EQ(d[0], -be * T * V);
    EXPECT_DOUBLE_EQ(d[1], be * T * V - ka * I1);
    EXPECT_DOUBLE_EQ(d[2], ka * I1 - de * I2 / (Kd + I2));
    EXPECT_DOUBLE_EQ(d[3], p * I2 - c * V);
  }
}

TEST(ModelProperty, TargetCellsNeverIncrease)
{
  test::Gen g(13);
  const auto tc = make_builtin("target_cell_limited");
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> y = g.vector(4, 0, 1e7);
    std::vector<double> p = g.vector(6, 0, 10);
    p[5] += 1e-3;
    EXPECT_LE(eval_rhs(tc, y, p, 0.0)[0], 0.0);
  }
}

TEST(ModelProperty, RhsIsPure)
{
  test::Gen g(14);
  const auto tc = make_builtin("target_cell_limited");
  for (int i = 0; i < 100; ++i) {
    const auto y = g.vector(4, 0, 1e6);
    const auto p = g.vector(6, 0.1, 10);
    EXPECT_EQ(eval_rhs(tc, y, p, 1.0), eval_rhs(tc, y, p, 1.0));
  }
}

TEST(Model, RegistryAddsCustomModels)
{
  ModelSpec decay;
  decay.name = "unit_test_decay";
  decay.state_names = {"x"};
  decay.param_names = {"k"};
  decay.rhs = [](std::span<const double> y, std::span<const double> p, double, std::span<double> d) {
    d[0] = -p[0] * y[0];
  };
  decay.default_initial_state = {1.0};
  decay.observed_mask = {true};
  decay.param_bounds = {{0.01, 10}};
  decay.nonnegative_params = {true};
  register_model(decay);
  const auto m = make_model("unit_test_decay");
  EXPECT_EQ(eval_rhs(m, std::vector{2.0}, std::vector{3.0}, 0.0)[0], -6.0);
  EXPECT_THROW(make_model("not_registered_anywhere"), ConfigError);

  decay.name = "logistic";
  EXPECT_THROW(register_model(decay), ConfigError);
}

TEST(Model, ValidateCatchesBrokenSpecs)
{
  auto m = make_builtin("logistic");
  m.observed_mask = {false};
  EXPECT_THROW(m.validate(), ConfigError);
  m = make_builtin("logistic");
  m.param_bounds[0] = {3.0, 1.0};
  EXPECT_THROW(m.validate(), ConfigError);
  m = make_builtin("logistic");
  m.param_names.clear();
  EXPECT_THROW(m.validate(), ConfigError);
}

TEST(Model, IndexLookup)
{
  const auto m = make_builtin("target_cell_limited");
  EXPECT_EQ(m.state_index("V"), 3u);
  EXPECT_EQ(m.param_index("K_delta"), 5u);
  EXPECT_THROW(m.state_index("W"), ConfigError);
  EXPECT_THROW(m.param_index("q"), ConfigError);
}

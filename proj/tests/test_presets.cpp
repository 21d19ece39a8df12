#include "sol/presets.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "support/riccati_oracle.hpp"

namespace {

using sol::Benchmark;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr Benchmark kPlants[] = {Benchmark::kPendulum, Benchmark::kLorenz,
                                 Benchmark::kCartpole, Benchmark::kDoublePendulum};

TEST(BenchmarkNames, RoundTrip) {
  for (Benchmark b : kPlants) {
    const auto parsed = sol::parse_benchmark(sol::benchmark_name(b));
    ASSERT_TRUE(parsed.has_value());
    EXPECT_EQ(*parsed, b);
  }
  EXPECT_EQ(sol::parse_benchmark("linear_oracle"), Benchmark::kLinearOracle);
  EXPECT_FALSE(sol::parse_benchmark("no_such_plant").has_value());
}

TEST(DefaultConfigs, AreValidAndTyped) {
  for (Benchmark b : kPlants) {
    const sol::SolConfig config = sol::default_config(b);
    EXPECT_NO_THROW(config.validate()) << sol::benchmark_name(b);
    EXPECT_EQ(config.cost.Q.rows(), config.plant.state_dim());
    EXPECT_EQ(config.x0.size(), config.plant.state_dim());
  }
  EXPECT_THROW(sol::default_config(Benchmark::kLinearOracle), std::exception);
}

TEST(DefaultConfigs, PublishedCostsAndTimings) {
  const sol::SolConfig pendulum = sol::default_config(Benchmark::kPendulum);
  EXPECT_EQ(pendulum.clock.sample_period, 5e-3);
  EXPECT_EQ(pendulum.clock.control_every, 2);
  EXPECT_EQ(pendulum.cost.r_diag[0], 2.0);
  EXPECT_TRUE(pendulum.cost.Q.isApprox(MatrixXd::Identity(2, 2)));
  EXPECT_EQ(pendulum.basis_spec, "1,x,sin(x)");
  EXPECT_EQ(pendulum.cost.gamma, 0.0);

  const sol::SolConfig lorenz = sol::default_config(Benchmark::kLorenz);
  EXPECT_EQ(lorenz.cost.Q(0, 0), 160.0);
  EXPECT_EQ(lorenz.cost.Q(1, 1), 160.0);
  EXPECT_EQ(lorenz.cost.Q(2, 2), 12.0);
  EXPECT_EQ(lorenz.cost.r_diag[0], 1.0);
  const double wing = std::sqrt(72.0);
  EXPECT_NEAR(lorenz.cost.x_ref[0], -wing, 1e-12);
  EXPECT_NEAR(lorenz.cost.x_ref[1], -wing, 1e-12);
  EXPECT_NEAR(lorenz.cost.x_ref[2], 27.0, 1e-12);
  EXPECT_EQ(lorenz.success_tolerance, 1.0);

  const sol::SolConfig cartpole = sol::default_config(Benchmark::kCartpole);
  EXPECT_EQ(cartpole.plant.timeout_s, 15.0);
  EXPECT_GT(cartpole.input_clamp, 0.0);
}

TEST(SampleInitialState, DeterministicAndInRange) {
  for (Benchmark b : kPlants) {
    const sol::SolConfig config = sol::default_config(b);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const VectorXd a = sol::sample_initial_state(b, seed);
      const VectorXd b2 = sol::sample_initial_state(b, seed);
      ASSERT_EQ(a.size(), config.plant.state_dim());
      for (Eigen::Index i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b2[i]);
      EXPECT_TRUE(sol::in_domain(config.plant, a))
          << sol::benchmark_name(b) << " seed " << seed;
    }
    // Different seeds give different draws (except the fixed pendulum start).
    if (b != Benchmark::kPendulum) {
      const VectorXd s1 = sol::sample_initial_state(b, 1);
      const VectorXd s2 = sol::sample_initial_state(b, 2);
      EXPECT_GT((s1 - s2).cwiseAbs().maxCoeff(), 0.0);
    }
  }

  // The hanging-start draws stay near hanging, at rest.
  const VectorXd cp = sol::sample_initial_state(Benchmark::kCartpole, 3);
  EXPECT_LE(std::abs(std::abs(cp[0]) - std::numbers::pi), 0.3 + 1e-12);
  EXPECT_EQ(cp[1], 0.0);
  EXPECT_EQ(cp[2], 0.0);
  EXPECT_EQ(cp[3], 0.0);

  const VectorXd dp = sol::sample_initial_state(Benchmark::kDoublePendulum, 3);
  EXPECT_LE(std::abs(dp[1]), 0.1 + 1e-12);
  EXPECT_LE(std::abs(dp[2]), 0.1 + 1e-12);
  for (int i = 3; i < 6; ++i) EXPECT_EQ(dp[i], 0.0);
}

TEST(LinearEmbedding, PlacesMatricesInTheDictionary) {
  MatrixXd A(2, 2), B(2, 1);
  A << 0.0, 1.0, 2.0, -1.0;
  B << 0.0, 1.0;
  const sol::ModelCoefficients model = sol::linear_embedding_model(A, B);
  ASSERT_EQ(model.drift.rows(), 2);
  ASSERT_EQ(model.drift.cols(), 3);  // dictionary (x1, x2, 1)
  EXPECT_TRUE(model.drift.leftCols(2).isApprox(A));
  EXPECT_EQ(model.drift(0, 2), 0.0);
  EXPECT_EQ(model.drift(1, 2), 0.0);
  ASSERT_EQ(model.input_maps.size(), 1u);
  EXPECT_EQ(model.input_maps[0](0, 2), 0.0);
  EXPECT_EQ(model.input_maps[0](1, 2), 1.0);
  EXPECT_EQ(model.input_maps[0].leftCols(2).cwiseAbs().maxCoeff(), 0.0);
}

// The parameter flow on a known linear plant must settle onto the algebraic
// Riccati solution computed by a solver written independently of the
// library.
TEST(LinearOracle, FlowSettlesOntoTheAlgebraicSolution) {
  const sol::LinearOracleSpec spec = sol::default_linear_oracle();
  const sol::LinearOracleReport report = sol::run_linear_oracle(spec);

  EXPECT_TRUE(report.settled);
  EXPECT_LT(report.p_rel_error, 1e-3);
  EXPECT_LT(report.k_rel_error, 1e-3);

  MatrixXd R(spec.r_diag.size(), spec.r_diag.size());
  R.setZero();
  R.diagonal() = spec.r_diag;
  const MatrixXd P_oracle = testsupport::care(spec.A, spec.B, spec.Q, R, spec.K0);
  const double scale = std::max(1.0, P_oracle.cwiseAbs().maxCoeff());
  EXPECT_LT((report.P_care - P_oracle).cwiseAbs().maxCoeff(), 1e-9 * scale);
  EXPECT_LT((report.P_flow - P_oracle).cwiseAbs().maxCoeff(), 1e-3 * scale);
}

}  // namespace

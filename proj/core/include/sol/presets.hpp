#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "sol/sol_loop.hpp"

namespace sol {

/// The bundled scenarios. The first four are plants run through the full
/// online pipeline; kLinearOracle is a pseudo-benchmark that checks the
/// value-parameter flow against an algebraic Riccati solution.
enum class Benchmark { kPendulum, kLorenz, kCartpole, kDoublePendulum, kLinearOracle };

[[nodiscard]] const char* benchmark_name(Benchmark b);
[[nodiscard]] std::optional<Benchmark> parse_benchmark(std::string_view name);

/// Published defaults for one of the four plant benchmarks: dynamics
/// parameters, feature dictionary, cost weights, clocking, learner knobs,
/// and a representative initial state. Throws for kLinearOracle (it has no
/// plant episode; see LinearOracleSpec).
SolConfig default_config(Benchmark b);

/// Seeded initial state draw for batch runs:
///   pendulum        fixed default x0 (episodes are deterministic anyway)
///   lorenz          uniform over the domain box
///   cartpole        pole angle within +-0.3 rad of hanging (+-pi), rest 0
///   double pendulum both angles within +-0.1 rad of upright, rest 0
Eigen::VectorXd sample_initial_state(Benchmark b, std::uint64_t seed);

/// The linear plant used to cross-check the parameter flow: controllable
/// 2-state system with the dictionary reduced to (x, 1) and no discount.
struct LinearOracleSpec {
  Eigen::MatrixXd A;       // n x n
  Eigen::MatrixXd B;       // n x m
  Eigen::MatrixXd Q;       // n x n
  Eigen::VectorXd r_diag;  // m
  Eigen::MatrixXd K0;      // stabilizing initial gain for the algebraic solver
  double step_dt = 2e-3;   // parameter-flow step size
  long max_steps = 200000;
  double settle_tol = 1e-12;  // relative stationarity threshold on P
};

LinearOracleSpec default_linear_oracle();

/// Embeds xdot = A x + B u into the feature dictionary (x, 1): drift
/// [A | 0], input map j [0 | B_j].
ModelCoefficients linear_embedding_model(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Outcome of integrating the parameter flow to stationarity on the linear
/// plant and comparing against the algebraic Riccati solution.
struct LinearOracleReport {
  Eigen::MatrixXd P_flow;     // top-left n x n block of the settled parameters
  Eigen::MatrixXd P_care;     // algebraic solution
  Eigen::MatrixXd K_flow;     // gain realized by the feedback law
  Eigen::MatrixXd K_lqr;      // R^{-1} B' P_care
  double p_rel_error = 0.0;   // max-norm relative errors
  double k_rel_error = 0.0;
  long steps = 0;             // flow steps until stationarity
  bool settled = false;
};

LinearOracleReport run_linear_oracle(const LinearOracleSpec& spec);

}  // namespace sol

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sol/basis.hpp"
#include "sol/plants.hpp"
#include "sol/sysid.hpp"
#include "sol/valuegrad.hpp"

namespace sol {

enum class Termination { kSuccess, kDomainExit, kTimeout, kDivergence };

[[nodiscard]] const char* to_string(Termination t);

/// Everything one episode needs: the plant, the feature dictionary, the
/// cost, the clocking, and the learner/controller knobs.
struct SolConfig {
  PlantSpec plant;
  std::string basis_spec;  // dictionary in BasisSet::parse grammar
  CostSpec cost;
  SimClock clock;
  RegressionConfig regression;

  int database_capacity = 1000;
  double admission_threshold = 1e-3;  // admit samples the model mispredicts by more than this
  int min_fit_samples = 1;  // first fit waits for this many rows; an underdetermined
                            // solve on the first few samples yields meaningless
                            // coefficients that can destabilize the young controller
  double success_tolerance = 0.05;    // per-component |x - x_ref| bound; 0 = success unattainable
  double success_hold_s = 1.0;        // time the bound must hold continuously
  std::uint64_t seed = 0;
  double dither_amplitude = 0.0;  // zero-mean uniform excitation on u; 0 = off
  double input_clamp = 0.0;       // symmetric saturation |u_j| <= clamp; 0 = unconstrained
  Eigen::VectorXd x0;
  double p_snapshot_period_s = 0.1;
  std::string database_preload;  // optional CSV (SampleDatabase::dump_csv layout)

  void validate() const;
};

struct TraceRow {
  double t = 0.0;
  Eigen::VectorXd x;  // raw (unshifted) state
  Eigen::VectorXd u;  // control active from this sample on
  double value = 0.0;
  double pred_error = 0.0;  // most recent model residual
  double cost = 0.0;        // accumulated discounted cost up to t
};

struct PSnapshot {
  double t = 0.0;
  Eigen::VectorXd upper;  // upper triangle of P, row-major, (p^2+p)/2 entries
};

struct EpisodeTrace {
  std::vector<TraceRow> rows;          // one per sample step, t spaced by h
  std::vector<PSnapshot> p_snapshots;  // periodic plus the final state of P
  ModelCoefficients final_model;
  ValueParams final_params{Eigen::MatrixXd(), 0.0};
  SampleDatabase database{1};  // final contents of the sample buffer
  Termination termination = Termination::kTimeout;
  double final_error = 0.0;  // ||x - x_ref||_inf at the last recorded state
  double total_cost = 0.0;
  long divergence_step = -1;  // sample index, when termination == kDivergence

  [[nodiscard]] int state_dim() const { return rows.empty() ? 0 : (int)rows[0].x.size(); }
  [[nodiscard]] int input_dim() const { return rows.empty() ? 0 : (int)rows[0].u.size(); }

  /// Header "t,x1..xn,u1..um,value,pred_err,cost"; full double precision.
  void write_csv(std::ostream& out) const;
  /// Sibling file keyed by t: header "t,p1_1,p1_2,...", upper triangle.
  void write_p_csv(std::ostream& out) const;
};

/// Parses a trace CSV back into rows (used by tests to pin the round trip).
std::vector<TraceRow> read_trace_rows(std::istream& in);

/// x - x_ref. Everything downstream of measurement (features, model, value,
/// control, cost) operates on shifted states; only the plant sees raw ones.
Eigen::VectorXd shift_state(const Eigen::VectorXd& x, const Eigen::VectorXd& x_ref);

/// The online pipeline, advanced one control period per step() call:
///   1. form the sample for the last sampling interval (features at the
///      previous sample's state, paired with the backward difference and the
///      control actually applied across that interval),
///   2. admit it if the current model mispredicts it, refit if admitted,
///   3. advance the value parameters at the current shifted state,
///   4. recompute the control (plus optional dither, optional clamp),
///   5. integrate the plant control_every RK4 substeps with u held.
/// No sample is formed on the first call (there is no earlier state).
class SolLoop {
 public:
  explicit SolLoop(const SolConfig& config);

  [[nodiscard]] bool done() const { return termination_.has_value(); }
  [[nodiscard]] std::optional<Termination> termination() const { return termination_; }
  void step();

  /// Finalizes and moves the trace out. Call once, after done().
  EpisodeTrace finish();

  [[nodiscard]] double time() const { return time_; }
  [[nodiscard]] long sample_index() const { return sample_index_; }
  [[nodiscard]] const Eigen::VectorXd& state() const { return x_; }
  [[nodiscard]] const Eigen::VectorXd& applied_control() const { return u_; }
  [[nodiscard]] const ModelCoefficients& model() const { return model_; }
  [[nodiscard]] const ValueParams& value_params() const { return params_; }
  [[nodiscard]] const SampleDatabase& database() const { return db_; }
  [[nodiscard]] const BasisSet& basis() const { return *basis_; }
  [[nodiscard]] const std::vector<TraceRow>& rows() const { return rows_; }

 private:
  void record_row(double pred_error);
  void snapshot_params(bool force);
  [[nodiscard]] bool update_hold_and_maybe_succeed();
  void terminate(Termination reason, long divergence_step = -1);

  SolConfig cfg_;
  std::shared_ptr<const BasisSet> basis_;
  Eigen::MatrixXd qbar_;
  ModelCoefficients model_;
  ValueParams params_;
  SampleDatabase db_;

  Eigen::VectorXd x_;       // raw state
  Eigen::VectorXd z_;       // shifted state
  Eigen::VectorXd z_prev_;  // shifted state one sample earlier
  Eigen::VectorXd u_;
  double time_ = 0.0;
  long sample_index_ = 0;
  long control_index_ = 0;
  long max_samples_ = 0;
  double last_pred_error_ = 0.0;

  std::vector<TraceRow> rows_;
  std::vector<PSnapshot> snapshots_;
  double next_snapshot_t_ = 0.0;
  double cost_accum_ = 0.0;
  double last_cost_rate_ = 0.0;
  std::optional<double> entered_tolerance_t_;
  std::optional<Termination> termination_;
  long divergence_step_ = -1;

  std::mt19937_64 rng_;
};

/// Runs one full episode to termination. Deterministic for a fixed config
/// (the seed drives the only randomness, the optional dither).
EpisodeTrace run_episode(const SolConfig& config);

}  // namespace sol

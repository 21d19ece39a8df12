#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "sol/basis.hpp"

namespace sol {

/// One regression row: the feature vector of a visited (state, input) pair
/// and the finite-difference derivative observed across the following
/// sampling interval.
struct Sample {
  Eigen::VectorXd theta;   // features(x, u), length p * (1 + m)
  Eigen::VectorXd xdot;    // (x_k - x_{k-1}) / h, length n
  double pred_error = 0.0; // residual norm against the model at admission time
  long step = 0;           // sample index at which the row was formed
};

/// Fixed-capacity ring buffer of samples; pushing into a full buffer evicts
/// the oldest entry.
class SampleDatabase {
 public:
  explicit SampleDatabase(int capacity);

  [[nodiscard]] int capacity() const { return capacity_; }
  [[nodiscard]] int size() const { return static_cast<int>(entries_.size()); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  /// i = 0 is the oldest retained sample.
  [[nodiscard]] const Sample& at(int i) const { return entries_.at(head(i)); }

  void push(Sample sample);
  void clear();

  /// Plain CSV: header "step,theta0..theta{L-1},xdot0..xdot{n-1}", one row
  /// per sample, full double round-trip precision.
  void dump_csv(std::ostream& out) const;
  /// Inverse of dump_csv. Column counts must match theta_dim/xdot_dim;
  /// throws ParseError (with line numbers) otherwise.
  static SampleDatabase load_csv(std::istream& in, int capacity, int theta_dim, int xdot_dim);

 private:
  [[nodiscard]] size_t head(int i) const {
    return (start_ + static_cast<size_t>(i)) % entries_.size();
  }

  int capacity_;
  size_t start_ = 0;  // index of the oldest entry once the buffer wrapped
  std::vector<Sample> entries_;
};

/// Identified input-affine model  xdot = drift * Phi(x) + sum_j u_j *
/// input_maps[j] * Phi(x). A default-constructed ("zero") model predicts 0.
struct ModelCoefficients {
  Eigen::MatrixXd drift;                   // n x p
  std::vector<Eigen::MatrixXd> input_maps; // m matrices, each n x p
  std::shared_ptr<const BasisSet> basis;

  static ModelCoefficients zero(std::shared_ptr<const BasisSet> basis, int state_dim,
                                int input_dim);

  [[nodiscard]] int state_dim() const { return static_cast<int>(drift.rows()); }
  [[nodiscard]] int input_dim() const { return static_cast<int>(input_maps.size()); }
  /// [drift | input_maps[0] | ... | input_maps[m-1]], n x p(1+m).
  [[nodiscard]] Eigen::MatrixXd stacked() const;
};

/// Knobs of the sequentially-thresholded least-squares solve.
struct RegressionConfig {
  double lambda = 0.0;     ///< reserved sparsity weight; the hard threshold
                           ///< below is what enforces sparsity
  double threshold = 0.05; ///< coefficient cutoff, applied in unit-RMS column scale
  int max_sweeps = 10;     ///< threshold/re-solve rounds
  double ridge = 1e-8;     ///< relative Tikhonov weight for conditioning
  double column_floor = 0.0;   ///< when > 0, drop columns whose RMS is below this
                               ///< fraction of the strongest column: a feature the
                               ///< data barely moves supports only extrapolative
                               ///< coefficients, inflated by the inverse RMS on
                               ///< unscaling. Off by default: legitimate small
                               ///< columns (an input term on the constant feature
                               ///< next to cubic states) must survive.

  void validate() const;
};

/// Per-row solver trace: the ridge objective (residual^2 + ridge * |w|^2 in
/// scaled units) after each re-solve and after the thresholding that follows
/// it, plus active-column counts. Used to check solver monotonicity.
struct FitReport {
  struct Sweep {
    double objective_after_solve = 0.0;
    double objective_after_threshold = 0.0;
    int active_after_threshold = 0;
  };
  std::vector<std::vector<Sweep>> rows;  // [state row][sweep]
};

/// Feature vector of a (state, input) pair:
///   [Phi(x) | Phi(x) u_1 | ... | Phi(x) u_m],  length p * (1 + m).
Eigen::VectorXd features(const BasisSet& basis, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u);

/// Backward difference (x_k - x_prev) / h.
Eigen::VectorXd finite_diff(const Eigen::VectorXd& x_k, const Eigen::VectorXd& x_prev, double h);

/// Model prediction of xdot at (x, u) through the model's own basis.
Eigen::VectorXd predict(const ModelCoefficients& model, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u);

/// || sample.xdot - stacked_model * sample.theta ||_2.
double prediction_error(const ModelCoefficients& model, const Sample& sample);

/// Admission filter: stamps the sample's prediction error against `model`
/// and inserts it iff that error exceeds e_min. Returns whether it inserted.
bool maybe_insert(SampleDatabase& db, Sample sample, const ModelCoefficients& model,
                  double e_min);

/// Sequentially-thresholded ridge regression over the whole database, one
/// independent solve per state row.
///
/// Feature columns are normalized to unit RMS before thresholding so the
/// cutoff is comparable across basis terms of very different magnitudes;
/// coefficients are un-scaled on the way out. Thresholded entries are
/// exactly 0.0. Deterministic and idempotent for a frozen database.
/// Throws std::invalid_argument on an empty database.
ModelCoefficients fit(const SampleDatabase& db, std::shared_ptr<const BasisSet> basis,
                      int input_dim, const RegressionConfig& config,
                      FitReport* report = nullptr);

}  // namespace sol

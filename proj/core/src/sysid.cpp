#include "sol/sysid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>

#include "sol/errors.hpp"

namespace sol {
namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, (comma == std::string::npos ? line.size() : comma) - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double_field(const std::string& field, int line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw ParseError("database csv: malformed number '" + field + "'", line_no);
  }
  return value;
}

}  // namespace

SampleDatabase::SampleDatabase(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("database: capacity must be positive");
  entries_.reserve(static_cast<size_t>(capacity));
}

void SampleDatabase::push(Sample sample) {
  if (size() < capacity_) {
    entries_.push_back(std::move(sample));
    return;
  }
  // Full: overwrite the oldest slot and advance the ring start.
  entries_[start_] = std::move(sample);
  start_ = (start_ + 1) % entries_.size();
}

void SampleDatabase::clear() {
  entries_.clear();
  start_ = 0;
}

void SampleDatabase::dump_csv(std::ostream& out) const {
  if (empty()) {
    out << "step\n";
    return;
  }
  const int L = static_cast<int>(at(0).theta.size());
  const int n = static_cast<int>(at(0).xdot.size());
  std::string line = "step";
  for (int j = 0; j < L; ++j) line += ",theta" + std::to_string(j);
  for (int i = 0; i < n; ++i) line += ",xdot" + std::to_string(i);
  out << line << "\n";
  for (int k = 0; k < size(); ++k) {
    const Sample& s = at(k);
    line = std::to_string(s.step);
    for (int j = 0; j < L; ++j) {
      line += ',';
      append_double(line, s.theta[j]);
    }
    for (int i = 0; i < n; ++i) {
      line += ',';
      append_double(line, s.xdot[i]);
    }
    out << line << "\n";
  }
}

SampleDatabase SampleDatabase::load_csv(std::istream& in, int capacity, int theta_dim,
                                        int xdot_dim) {
  SampleDatabase db(capacity);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("database csv: missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::string expected = "step";
  for (int j = 0; j < theta_dim; ++j) expected += ",theta" + std::to_string(j);
  for (int i = 0; i < xdot_dim; ++i) expected += ",xdot" + std::to_string(i);
  if (line != expected && line != "step") {
    throw ParseError("database csv: header does not match the expected column layout", 1);
  }
  if (line == "step") return db;  // dump of an empty database

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != 1 + theta_dim + xdot_dim) {
      throw ParseError("database csv: expected " + std::to_string(1 + theta_dim + xdot_dim) +
                           " columns, got " + std::to_string(fields.size()),
                       line_no);
    }
    Sample s;
    s.step = static_cast<long>(parse_double_field(fields[0], line_no));
    s.theta.resize(theta_dim);
    for (int j = 0; j < theta_dim; ++j) s.theta[j] = parse_double_field(fields[1 + j], line_no);
    s.xdot.resize(xdot_dim);
    for (int i = 0; i < xdot_dim; ++i) {
      s.xdot[i] = parse_double_field(fields[1 + theta_dim + i], line_no);
    }
    // Admission-time error is not persisted; stamp the residual against the
    // zero model every run starts from.
    s.pred_error = s.xdot.norm();
    db.push(std::move(s));
  }
  return db;
}

ModelCoefficients ModelCoefficients::zero(std::shared_ptr<const BasisSet> basis, int state_dim,
                                          int input_dim) {
  if (!basis) throw std::invalid_argument("model: basis must not be null");
  if (state_dim < 1 || input_dim < 1) {
    throw std::invalid_argument("model: dimensions must be positive");
  }
  ModelCoefficients model;
  model.drift = Eigen::MatrixXd::Zero(state_dim, basis->size());
  model.input_maps.assign(static_cast<size_t>(input_dim),
                          Eigen::MatrixXd::Zero(state_dim, basis->size()));
  model.basis = std::move(basis);
  return model;
}

Eigen::MatrixXd ModelCoefficients::stacked() const {
  const int p = static_cast<int>(drift.cols());
  Eigen::MatrixXd all(drift.rows(), p * (1 + input_dim()));
  all.leftCols(p) = drift;
  for (int j = 0; j < input_dim(); ++j) all.middleCols(p * (1 + j), p) = input_maps[j];
  return all;
}

Eigen::VectorXd features(const BasisSet& basis, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) {
  const Eigen::VectorXd phi = basis.eval(x);
  const int p = basis.size();
  const int m = static_cast<int>(u.size());
  if (m < 1) throw std::invalid_argument("features: input dimension must be positive");
  Eigen::VectorXd theta(p * (1 + m));
  theta.head(p) = phi;
  for (int j = 0; j < m; ++j) theta.segment(p * (1 + j), p) = u[j] * phi;
  return theta;
}

Eigen::VectorXd finite_diff(const Eigen::VectorXd& x_k, const Eigen::VectorXd& x_prev, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff: step must be positive");
  if (x_k.size() != x_prev.size()) throw std::invalid_argument("finite_diff: size mismatch");
  return (x_k - x_prev) / h;
}

Eigen::VectorXd predict(const ModelCoefficients& model, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u) {
  if (!model.basis) throw std::invalid_argument("predict: model has no basis");
  if (u.size() != model.input_dim()) throw std::invalid_argument("predict: input size mismatch");
  const Eigen::VectorXd phi = model.basis->eval(x);
  Eigen::VectorXd out = model.drift * phi;
  for (int j = 0; j < model.input_dim(); ++j) out += u[j] * (model.input_maps[j] * phi);
  return out;
}

double prediction_error(const ModelCoefficients& model, const Sample& sample) {
  const int p = static_cast<int>(model.drift.cols());
  const int m = model.input_dim();
  if (sample.theta.size() != static_cast<Eigen::Index>(p) * (1 + m)) {
    throw std::invalid_argument("prediction_error: feature length mismatch");
  }
  if (sample.xdot.size() != model.drift.rows()) {
    throw std::invalid_argument("prediction_error: derivative length mismatch");
  }
  Eigen::VectorXd residual = sample.xdot - model.drift * sample.theta.head(p);
  for (int j = 0; j < m; ++j) {
    residual -= model.input_maps[j] * sample.theta.segment(p * (1 + j), p);
  }
  return residual.norm();
}

bool maybe_insert(SampleDatabase& db, Sample sample, const ModelCoefficients& model,
                  double e_min) {
  const double err = prediction_error(model, sample);
  sample.pred_error = err;
  if (err > e_min) {
    db.push(std::move(sample));
    return true;
  }
  return false;
}

void RegressionConfig::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("regression: lambda must be nonnegative");
  if (!(threshold >= 0.0)) throw std::invalid_argument("regression: threshold must be >= 0");
  if (max_sweeps < 1) throw std::invalid_argument("regression: max_sweeps must be >= 1");
  if (!(ridge > 0.0)) throw std::invalid_argument("regression: ridge must be positive");
  if (column_floor < 0.0 || column_floor >= 1.0) {
    throw std::invalid_argument("regression: column floor must lie in [0, 1)");
  }
}

ModelCoefficients fit(const SampleDatabase& db, std::shared_ptr<const BasisSet> basis,
                      int input_dim, const RegressionConfig& config, FitReport* report) {
  config.validate();
  if (!basis) throw std::invalid_argument("fit: basis must not be null");
  if (db.empty()) throw std::invalid_argument("fit: database is empty");

  const int p = basis->size();
  const int m = input_dim;
  const int L = p * (1 + m);
  const int n = static_cast<int>(db.at(0).xdot.size());
  const int N = db.size();

  // Normal equations over the whole ring buffer. Rebuilt from scratch every
  // call: exact, deterministic, and cheap next to the per-episode budget.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(L, L);
  Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(L, n);  // Theta^T * Xdot
  Eigen::VectorXd target_sq = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < N; ++k) {
    const Sample& s = db.at(k);
    if (s.theta.size() != L || s.xdot.size() != n) {
      throw std::invalid_argument("fit: sample dimensions do not match basis/input layout");
    }
    gram.selfadjointView<Eigen::Lower>().rankUpdate(s.theta);
    moment += s.theta * s.xdot.transpose();
    target_sq += s.xdot.cwiseProduct(s.xdot);
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.adjoint();

  // Unit-RMS column scale, read straight off the Gram diagonal. Identically
  // zero columns (e.g. the input block of an unexcited run) keep scale 1.
  Eigen::VectorXd rms(L);
  Eigen::VectorXd scale(L);
  for (int j = 0; j < L; ++j) {
    rms[j] = std::sqrt(gram(j, j) / static_cast<double>(N));
    scale[j] = rms[j] > 0.0 ? rms[j] : 1.0;
  }
  // Per-sample averages with unit-RMS columns give the scaled Gram a unit
  // diagonal, so the ridge weight reads as a relative (data-size-independent)
  // Tikhonov strength.
  const Eigen::VectorXd inv_scale = scale.cwiseInverse();
  const double inv_n = 1.0 / static_cast<double>(N);
  const Eigen::MatrixXd gram_s =
      inv_scale.asDiagonal() * (gram * inv_n) * inv_scale.asDiagonal();
  const Eigen::MatrixXd moment_s = inv_scale.asDiagonal() * (moment * inv_n);
  target_sq *= inv_n;

  if (report) {
    report->rows.clear();
    report->rows.resize(static_cast<size_t>(n));
  }

  // Ridge objective (mean-square residual plus penalty) in scaled units;
  // recorded for the monotonicity check.
  const auto objective = [&](const Eigen::VectorXd& w, int row) {
    return target_sq[row] - 2.0 * w.dot(moment_s.col(row)) + w.dot(gram_s * w) +
           config.ridge * w.squaredNorm();
  };

  // Start from the columns that actually vary in the data; the rest stay at
  // exactly 0 (and rejoin on later fits once the buffer shows them moving).
  std::vector<int> usable;
  const double floor_rms = config.column_floor * rms.maxCoeff();
  for (int j = 0; j < L; ++j) {
    if (rms[j] >= floor_rms && rms[j] > 0.0) usable.push_back(j);
  }

  Eigen::MatrixXd coeffs(n, L);  // unscaled, assembled row by row
  std::vector<int> active, next_active;
  for (int row = 0; row < n; ++row) {
    active = usable;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(L);  // scaled coefficients

    for (int sweep = 0; sweep < config.max_sweeps && !active.empty(); ++sweep) {
      const Eigen::Index a = static_cast<Eigen::Index>(active.size());
      Eigen::MatrixXd sys(a, a);
      Eigen::VectorXd rhs(a);
      for (Eigen::Index r = 0; r < a; ++r) {
        rhs[r] = moment_s(active[static_cast<size_t>(r)], row);
        for (Eigen::Index c = 0; c < a; ++c) {
          sys(r, c) = gram_s(active[static_cast<size_t>(r)], active[static_cast<size_t>(c)]);
        }
      }
      sys.diagonal().array() += config.ridge;
      const Eigen::VectorXd solved = sys.ldlt().solve(rhs);

      w.setZero();
      for (Eigen::Index r = 0; r < a; ++r) w[active[static_cast<size_t>(r)]] = solved[r];
      const double obj_solve = report ? objective(w, row) : 0.0;

      next_active.clear();
      for (int j : active) {
        if (std::abs(w[j]) >= config.threshold) {
          next_active.push_back(j);
        } else {
          w[j] = 0.0;
        }
      }
      if (report) {
        report->rows[static_cast<size_t>(row)].push_back(
            {obj_solve, objective(w, row), static_cast<int>(next_active.size())});
      }
      const bool stable = next_active.size() == active.size();
      active.swap(next_active);
      if (stable) break;
    }
    coeffs.row(row) = w.cwiseProduct(inv_scale).transpose();
  }

  ModelCoefficients model;
  model.drift = coeffs.leftCols(p);
  model.input_maps.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) model.input_maps.push_back(coeffs.middleCols(p * (1 + j), p));
  model.basis = std::move(basis);
  return model;
}

}  // namespace sol

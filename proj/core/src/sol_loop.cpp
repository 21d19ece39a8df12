#include "sol/sol_loop.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "sol/errors.hpp"

namespace sol {
namespace {

// Hard cap on |P| entries; beyond this the episode is declared divergent.
constexpr double kParamCap = 1e9;

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::vector<std::string> split_line(const std::string& line) {
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
  const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc() || result.ptr != field.data() + field.size()) {
    throw ParseError("trace csv: malformed number '" + field + "'", line_no);
  }
  return value;
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kSuccess:
      return "success";
    case Termination::kDomainExit:
      return "domain_exit";
    case Termination::kTimeout:
      return "timeout";
    case Termination::kDivergence:
      return "divergence";
  }
  return "unknown";
}

void SolConfig::validate() const {
  plant.validate();
  clock.validate();
  regression.validate();
  cost.validate();
  const int n = plant.state_dim();
  const int m = plant.input_dim();
  if (cost.Q.rows() != n) throw std::invalid_argument("config: Q must match the state dimension");
  if (cost.r_diag.size() != m) {
    throw std::invalid_argument("config: R must match the input dimension");
  }
  BasisSet::parse(basis_spec, n);  // throws on a bad dictionary
  if (database_capacity < 1) throw std::invalid_argument("config: database capacity must be >= 1");
  if (!(admission_threshold > 0.0)) {
    throw std::invalid_argument("config: admission threshold must be positive");
  }
  if (min_fit_samples < 1) throw std::invalid_argument("config: min fit samples must be >= 1");
  if (success_tolerance < 0.0) {
    throw std::invalid_argument("config: success tolerance must be nonnegative");
  }
  if (!(success_hold_s > 0.0)) throw std::invalid_argument("config: hold time must be positive");
  if (dither_amplitude < 0.0) throw std::invalid_argument("config: dither must be nonnegative");
  if (input_clamp < 0.0) throw std::invalid_argument("config: input clamp must be nonnegative");
  if (x0.size() != n) throw std::invalid_argument("config: x0 must match the state dimension");
  if (!in_domain(plant, x0)) throw std::invalid_argument("config: x0 must lie inside the domain");
  if (!(p_snapshot_period_s > 0.0)) {
    throw std::invalid_argument("config: snapshot period must be positive");
  }
  if (plant.timeout_s < clock.sample_period) {
    throw std::invalid_argument("config: timeout shorter than one sample period");
  }
}

Eigen::VectorXd shift_state(const Eigen::VectorXd& x, const Eigen::VectorXd& x_ref) {
  if (x.size() != x_ref.size()) throw std::invalid_argument("shift_state: size mismatch");
  return x - x_ref;
}

SolLoop::SolLoop(const SolConfig& config) : cfg_(config), db_(1) {
  cfg_.validate();
  const int n = cfg_.plant.state_dim();
  const int m = cfg_.plant.input_dim();
  basis_ = std::make_shared<const BasisSet>(BasisSet::parse(cfg_.basis_spec, n));
  qbar_ = make_qbar(cfg_.cost.Q, basis_->size());
  model_ = ModelCoefficients::zero(basis_, n, m);
  params_ = ValueParams::zero(basis_->size(), cfg_.cost.gamma);
  db_ = SampleDatabase(cfg_.database_capacity);
  if (!cfg_.database_preload.empty()) {
    std::ifstream in(cfg_.database_preload);
    if (!in) {
      throw std::runtime_error("config: cannot open database preload '" + cfg_.database_preload +
                               "'");
    }
    db_ = SampleDatabase::load_csv(in, cfg_.database_capacity, basis_->size() * (1 + m), n);
  }
  x_ = cfg_.x0;
  z_ = shift_state(x_, cfg_.cost.x_ref);
  u_ = Eigen::VectorXd::Zero(m);
  max_samples_ = std::lround(cfg_.plant.timeout_s / cfg_.clock.sample_period);
  rng_.seed(cfg_.seed);
  rows_.reserve(static_cast<size_t>(max_samples_) + 1);
  // The hold window may already be open at t = 0.
  if (cfg_.success_tolerance > 0.0 && z_.cwiseAbs().maxCoeff() < cfg_.success_tolerance) {
    entered_tolerance_t_ = 0.0;
  }
}

void SolLoop::record_row(double pred_error) {
  TraceRow row;
  row.t = time_;
  row.x = x_;
  row.u = u_;
  row.value = value(z_, params_, *basis_);
  row.pred_error = pred_error;
  const double rate = running_cost(z_, u_, cfg_.cost, time_);
  if (!rows_.empty()) {
    cost_accum_ += 0.5 * (rate + last_cost_rate_) * cfg_.clock.sample_period;
  }
  last_cost_rate_ = rate;
  row.cost = cost_accum_;
  rows_.push_back(std::move(row));
}

void SolLoop::snapshot_params(bool force) {
  if (!force && time_ < next_snapshot_t_) return;
  const int p = basis_->size();
  PSnapshot snap;
  snap.t = time_;
  snap.upper.resize(p * (p + 1) / 2);
  Eigen::Index k = 0;
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) snap.upper[k++] = params_.P(i, j);
  }
  if (!snapshots_.empty() && snapshots_.back().t == time_) {
    snapshots_.back() = std::move(snap);  // forced final at an existing key
  } else {
    snapshots_.push_back(std::move(snap));
  }
  while (next_snapshot_t_ <= time_) next_snapshot_t_ += cfg_.p_snapshot_period_s;
}

bool SolLoop::update_hold_and_maybe_succeed() {
  if (cfg_.success_tolerance > 0.0 && z_.cwiseAbs().maxCoeff() < cfg_.success_tolerance) {
    if (!entered_tolerance_t_) entered_tolerance_t_ = time_;
    return time_ - *entered_tolerance_t_ >= cfg_.success_hold_s;
  }
  entered_tolerance_t_.reset();
  return false;
}

void SolLoop::terminate(Termination reason, long divergence_step) {
  termination_ = reason;
  divergence_step_ = divergence_step;
  snapshot_params(/*force=*/true);
}

void SolLoop::step() {
  if (done()) return;
  const double h = cfg_.clock.sample_period;
  const int per_period = cfg_.clock.control_every;
  const int m = cfg_.plant.input_dim();

  // (1)-(4) Form, admit, and learn from the sample across the last interval.
  double pred_error = last_pred_error_;
  if (control_index_ >= 1) {
    Sample sample;
    sample.theta = features(*basis_, z_prev_, u_);
    sample.xdot = finite_diff(z_, z_prev_, h);
    sample.step = sample_index_;
    pred_error = prediction_error(model_, sample);
    const bool admitted = maybe_insert(db_, std::move(sample), model_, cfg_.admission_threshold);
    if (admitted && db_.size() >= cfg_.min_fit_samples) {
      model_ = fit(db_, basis_, m, cfg_.regression);
    }
    last_pred_error_ = pred_error;
  }

  // (5) Advance the value parameters at the current shifted state.
  try {
    params_ = step_P(params_, z_, model_, qbar_, cfg_.cost.r_diag, cfg_.clock.control_period());
  } catch (const DivergenceError&) {
    record_row(pred_error);
    terminate(Termination::kDivergence, sample_index_);
    return;
  }
  if (params_.P.cwiseAbs().maxCoeff() > kParamCap) {
    record_row(pred_error);
    terminate(Termination::kDivergence, sample_index_);
    return;
  }

  // (6) Refresh the control held over the coming period.
  u_ = control(z_, params_, model_, cfg_.cost.r_diag);
  if (cfg_.dither_amplitude > 0.0) {
    std::uniform_real_distribution<double> dither(-cfg_.dither_amplitude, cfg_.dither_amplitude);
    for (int j = 0; j < m; ++j) u_[j] += dither(rng_);
  }
  if (cfg_.input_clamp > 0.0) {
    u_ = u_.cwiseMax(-cfg_.input_clamp).cwiseMin(cfg_.input_clamp);
  }
  record_row(pred_error);
  snapshot_params(/*force=*/false);

  // (7) Integrate the plant with u held; every substep is a measurement.
  const auto derivative = [this](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return dynamics(cfg_.plant, x, u);
  };
  for (int sub = 0; sub < per_period; ++sub) {
    Eigen::VectorXd next;
    try {
      next = rk4_step(derivative, x_, u_, h, sample_index_ + 1);
    } catch (const DivergenceError& err) {
      terminate(Termination::kDivergence, err.step());
      return;
    }
    x_ = next;
    ++sample_index_;
    time_ = h * static_cast<double>(sample_index_);
    z_prev_ = z_;
    z_ = shift_state(x_, cfg_.cost.x_ref);

    if (!in_domain(cfg_.plant, x_)) {
      record_row(pred_error);
      terminate(Termination::kDomainExit);
      return;
    }
    if (update_hold_and_maybe_succeed()) {
      record_row(pred_error);
      terminate(Termination::kSuccess);
      return;
    }
    if (sample_index_ >= max_samples_) {
      record_row(pred_error);
      terminate(Termination::kTimeout);
      return;
    }
    if (sub + 1 < per_period) record_row(pred_error);
    // The control-tick row is written by the next step() once the fresh
    // control (and the just-computed prediction error) are known.
  }
  ++control_index_;
}

EpisodeTrace SolLoop::finish() {
  if (!done()) throw std::logic_error("finish: episode still running");
  EpisodeTrace trace;
  trace.rows = std::move(rows_);
  trace.p_snapshots = std::move(snapshots_);
  trace.final_model = std::move(model_);
  trace.final_params = std::move(params_);
  trace.database = std::move(db_);
  trace.termination = *termination_;
  trace.final_error = z_.cwiseAbs().maxCoeff();
  trace.total_cost = cost_accum_;
  trace.divergence_step = divergence_step_;
  return trace;
}

EpisodeTrace run_episode(const SolConfig& config) {
  SolLoop loop(config);
  while (!loop.done()) loop.step();
  return loop.finish();
}

void EpisodeTrace::write_csv(std::ostream& out) const {
  const int n = state_dim();
  const int m = input_dim();
  std::string line = "t";
  for (int i = 1; i <= n; ++i) line += ",x" + std::to_string(i);
  for (int j = 1; j <= m; ++j) line += ",u" + std::to_string(j);
  line += ",value,pred_err,cost";
  out << line << "\n";
  for (const TraceRow& row : rows) {
    line.clear();
    append_double(line, row.t);
    for (int i = 0; i < n; ++i) {
      line += ',';
      append_double(line, row.x[i]);
    }
    for (int j = 0; j < m; ++j) {
      line += ',';
      append_double(line, row.u[j]);
    }
    line += ',';
    append_double(line, row.value);
    line += ',';
    append_double(line, row.pred_error);
    line += ',';
    append_double(line, row.cost);
    out << line << "\n";
  }
}

void EpisodeTrace::write_p_csv(std::ostream& out) const {
  // Recover p from the packed length L = p(p+1)/2.
  const Eigen::Index packed = p_snapshots.empty() ? 0 : p_snapshots[0].upper.size();
  const int p = static_cast<int>(std::lround((std::sqrt(8.0 * packed + 1.0) - 1.0) / 2.0));
  std::string line = "t";
  for (int i = 1; i <= p; ++i) {
    for (int j = i; j <= p; ++j) line += ",p" + std::to_string(i) + "_" + std::to_string(j);
  }
  out << line << "\n";
  for (const PSnapshot& snap : p_snapshots) {
    line.clear();
    append_double(line, snap.t);
    for (Eigen::Index k = 0; k < snap.upper.size(); ++k) {
      line += ',';
      append_double(line, snap.upper[k]);
    }
    out << line << "\n";
  }
}

std::vector<TraceRow> read_trace_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace csv: missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);
  int n = 0, m = 0;
  for (const std::string& name : header) {
    if (name.size() > 1 && name[0] == 'x') ++n;
    if (name.size() > 1 && name[0] == 'u') ++m;
  }
  if (header.size() != static_cast<size_t>(1 + n + m + 3) || header[0] != "t") {
    throw ParseError("trace csv: unexpected header layout", 1);
  }
  std::vector<TraceRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("trace csv: wrong column count", line_no);
    }
    TraceRow row;
    row.t = parse_double_field(fields[0], line_no);
    row.x.resize(n);
    for (int i = 0; i < n; ++i) row.x[i] = parse_double_field(fields[1 + i], line_no);
    row.u.resize(m);
    for (int j = 0; j < m; ++j) row.u[j] = parse_double_field(fields[1 + n + j], line_no);
    row.value = parse_double_field(fields[1 + n + m], line_no);
    row.pred_error = parse_double_field(fields[2 + n + m], line_no);
    row.cost = parse_double_field(fields[3 + n + m], line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sol

#include "soltool/runner.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "soltool/svg_plot.hpp"

namespace soltool {
namespace {

std::string coeff(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void append_terms(std::string& line, const Eigen::MatrixXd& row_block,
                  const std::vector<sol::BasisTerm>& terms, const std::string& input_suffix,
                  bool& first) {
  for (Eigen::Index j = 0; j < row_block.cols(); ++j) {
    const double v = row_block(0, j);
    if (v == 0.0) continue;
    const std::string name = terms[static_cast<size_t>(j)].name();
    std::string body = coeff(std::abs(v));
    if (name != "1") body += "*" + name;
    if (!input_suffix.empty()) body += "*" + input_suffix;
    if (first) {
      line += (v < 0 ? "-" : "") + body;
      first = false;
    } else {
      line += (v < 0 ? " - " : " + ") + body;
    }
  }
}

void write_plots(const std::filesystem::path& dir, const sol::EpisodeTrace& trace) {
  std::filesystem::create_directories(dir);
  const int n = trace.state_dim();
  const int m = trace.input_dim();
  std::vector<double> t;
  t.reserve(trace.rows.size());
  for (const auto& r : trace.rows) t.push_back(r.t);

  auto column = [&](auto&& get) {
    std::vector<double> out;
    out.reserve(trace.rows.size());
    for (const auto& r : trace.rows) out.push_back(get(r));
    return out;
  };

  std::vector<Series> states;
  for (int i = 0; i < n; ++i) {
    states.push_back({"x" + std::to_string(i + 1), t,
                      column([i](const sol::TraceRow& r) { return r.x[i]; })});
  }
  write_svg_plot(dir / "state.svg", "State trajectory", "t [s]", "x", states);

  std::vector<Series> inputs;
  for (int j = 0; j < m; ++j) {
    inputs.push_back({"u" + std::to_string(j + 1), t,
                      column([j](const sol::TraceRow& r) { return r.u[j]; })});
  }
  write_svg_plot(dir / "control.svg", "Control input", "t [s]", "u", inputs);

  write_svg_plot(dir / "value.svg", "Value estimate", "t [s]", "V",
                 {{"V", t, column([](const sol::TraceRow& r) { return r.value; })}});
  write_svg_plot(dir / "pred_error.svg", "Model prediction error", "t [s]", "residual norm",
                 {{"e", t, column([](const sol::TraceRow& r) { return r.pred_error; })}});

  // P components: plot the snapshots' largest-magnitude upper-triangle
  // entries so the picture stays readable for big libraries.
  if (!trace.p_snapshots.empty()) {
    const Eigen::Index dim = trace.p_snapshots.back().upper.size();
    std::vector<std::pair<double, Eigen::Index>> weight(static_cast<size_t>(dim));
    for (Eigen::Index k = 0; k < dim; ++k) {
      weight[static_cast<size_t>(k)] = {std::abs(trace.p_snapshots.back().upper[k]), k};
    }
    std::sort(weight.rbegin(), weight.rend());
    const size_t keep = std::min<size_t>(8, weight.size());

    std::vector<double> ts;
    for (const auto& s : trace.p_snapshots) ts.push_back(s.t);
    std::vector<Series> comps;
    for (size_t w = 0; w < keep; ++w) {
      const Eigen::Index k = weight[w].second;
      std::vector<double> ys;
      for (const auto& s : trace.p_snapshots) ys.push_back(s.upper[k]);
      comps.push_back({"p[" + std::to_string(k) + "]", ts, std::move(ys)});
    }
    write_svg_plot(dir / "p_components.svg", "Value parameter components", "t [s]", "P entries",
                   comps);
  }
}

}  // namespace

std::string format_model(const sol::ModelCoefficients& model) {
  const auto& terms = model.basis->terms();
  std::string out;
  for (int i = 0; i < model.state_dim(); ++i) {
    std::string line = "dx" + std::to_string(i + 1) + "/dt = ";
    bool first = true;
    append_terms(line, model.drift.row(i), terms, "", first);
    for (int j = 0; j < model.input_dim(); ++j) {
      append_terms(line, model.input_maps[static_cast<size_t>(j)].row(i), terms,
                   "u" + std::to_string(j + 1), first);
    }
    if (first) line += "0";
    out += line + "\n";
  }
  return out;
}

RunResult run_manifest(const RunManifest& manifest) {
  std::filesystem::create_directories(manifest.out_dir);
  RunResult result;

  std::vector<std::uint64_t> seeds = manifest.seeds;
  const bool batch = !seeds.empty();
  if (!batch) seeds.push_back(manifest.config.seed);

  std::ostringstream summary;
  summary << "benchmark: " << sol::benchmark_name(manifest.benchmark) << "\n";
  summary << "episodes: " << seeds.size() << "\n\n";

  for (std::uint64_t seed : seeds) {
    sol::SolConfig cfg = manifest.config;
    cfg.seed = seed;
    if (batch) cfg.x0 = sol::sample_initial_state(manifest.benchmark, seed);
    const sol::EpisodeTrace trace = sol::run_episode(cfg);

    const std::string tag = "s" + std::to_string(seed);
    {
      std::ofstream csv(manifest.out_dir / ("trace_" + tag + ".csv"));
      trace.write_csv(csv);
    }
    {
      std::ofstream csv(manifest.out_dir / ("p_" + tag + ".csv"));
      trace.write_p_csv(csv);
    }
    if (manifest.plots) write_plots(manifest.out_dir / ("plots_" + tag), trace);

    SeedOutcome outcome;
    outcome.seed = seed;
    outcome.termination = trace.termination;
    outcome.t_end = trace.rows.empty() ? 0.0 : trace.rows.back().t;
    outcome.final_error = trace.final_error;
    outcome.total_cost = trace.total_cost;
    result.outcomes.push_back(outcome);
    result.successes += trace.termination == sol::Termination::kSuccess;
    result.diverged |= trace.termination == sol::Termination::kDivergence;

    summary << "[seed " << seed << "]\n";
    summary << "  termination: " << sol::to_string(trace.termination) << "\n";
    char buf[128];
    std::snprintf(buf, sizeof buf, "  t_end: %.3f s\n  final ||x - x_ref||_inf: %.6g\n",
                  outcome.t_end, trace.final_error);
    summary << buf;
    std::snprintf(buf, sizeof buf, "  total cost: %.6g\n", trace.total_cost);
    summary << buf;
    summary << "  identified model:\n";
    std::istringstream model(format_model(trace.final_model));
    for (std::string line; std::getline(model, line);) summary << "    " << line << "\n";
    summary << "\n";
  }

  summary << "aggregate: " << result.successes << "/" << seeds.size() << " episodes succeeded\n";
  result.summary_path = manifest.out_dir / "summary.txt";
  std::ofstream out(result.summary_path);
  out << summary.str();
  return result;
}

}  // namespace soltool

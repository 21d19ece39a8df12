#include "soltool/config.hpp"

#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <Eigen/Core>

namespace soltool {
namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& origin, int line, const std::string& key,
                    const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (trim(value.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  fail(origin, line, "key '" + key + "' expects a number, got '" + value + "'");
}

long parse_long(const std::string& origin, int line, const std::string& key,
                const std::string& value) {
  try {
    size_t used = 0;
    long v = std::stol(value, &used);
    if (trim(value.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  fail(origin, line, "key '" + key + "' expects an integer, got '" + value + "'");
}

Eigen::VectorXd parse_vector(const std::string& origin, int line, const std::string& key,
                             const std::string& value) {
  std::vector<double> entries;
  std::stringstream ss(value);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    piece = trim(piece);
    if (piece.empty()) fail(origin, line, "key '" + key + "' has an empty vector entry");
    entries.push_back(parse_double(origin, line, key, piece));
  }
  if (entries.empty()) fail(origin, line, "key '" + key + "' expects comma-separated numbers");
  return Eigen::Map<Eigen::VectorXd>(entries.data(), static_cast<Eigen::Index>(entries.size()));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

// One handler per key: applies a parsed value onto the config under
// construction. Registered in a map so unknown keys are rejected by name and
// dump_defaults can never drift out of sync with the accepted key set.
struct KeyHandler {
  std::function<void(sol::SolConfig&, const std::string& origin, int line,
                     const std::string& value)>
      apply;
  std::function<std::string(const sol::SolConfig&)> emit;
};

using HandlerMap = std::map<std::string, KeyHandler>;

HandlerMap make_handlers() {
  HandlerMap h;
  auto add_double = [&h](const std::string& key, auto get) {
    h[key] = {[key, get](sol::SolConfig& c, const std::string& o, int l, const std::string& v) {
                get(c) = parse_double(o, l, key, v);
              },
              [get](const sol::SolConfig& c) {
                return format_double(get(const_cast<sol::SolConfig&>(c)));
              }};
  };
  auto add_int = [&h](const std::string& key, auto get) {
    h[key] = {[key, get](sol::SolConfig& c, const std::string& o, int l, const std::string& v) {
                get(c) = static_cast<int>(parse_long(o, l, key, v));
              },
              [get](const sol::SolConfig& c) {
                return std::to_string(get(const_cast<sol::SolConfig&>(c)));
              }};
  };
  auto add_vector = [&h](const std::string& key, auto get) {
    h[key] = {[key, get](sol::SolConfig& c, const std::string& o, int l, const std::string& v) {
                get(c) = parse_vector(o, l, key, v);
              },
              [get](const sol::SolConfig& c) {
                return format_vector(get(const_cast<sol::SolConfig&>(c)));
              }};
  };

  h["basis"] = {[](sol::SolConfig& c, const std::string&, int, const std::string& v) {
                  c.basis_spec = v;
                },
                [](const sol::SolConfig& c) { return c.basis_spec; }};
  add_vector("x0", [](sol::SolConfig& c) -> Eigen::VectorXd& { return c.x0; });

  add_double("clock.sample_period",
             [](sol::SolConfig& c) -> double& { return c.clock.sample_period; });
  add_int("clock.control_every", [](sol::SolConfig& c) -> int& { return c.clock.control_every; });

  add_double("cost.gamma", [](sol::SolConfig& c) -> double& { return c.cost.gamma; });
  add_vector("cost.r_diag", [](sol::SolConfig& c) -> Eigen::VectorXd& { return c.cost.r_diag; });
  add_vector("cost.x_ref", [](sol::SolConfig& c) -> Eigen::VectorXd& { return c.cost.x_ref; });
  // Q is restricted to diagonal form here; every benchmark cost in the suite
  // is diagonal and a flat key-value file has no natural matrix syntax.
  h["cost.q_diag"] = {
      [](sol::SolConfig& c, const std::string& o, int l, const std::string& v) {
        c.cost.Q = parse_vector(o, l, "cost.q_diag", v).asDiagonal();
      },
      [](const sol::SolConfig& c) { return format_vector(c.cost.Q.diagonal()); }};

  h["regression.lambda"] = {
      [](sol::SolConfig& c, const std::string& o, int l, const std::string& v) {
        c.regression.lambda = parse_double(o, l, "regression.lambda", v);
      },
      [](const sol::SolConfig& c) { return format_double(c.regression.lambda); }};
  add_double("regression.threshold",
             [](sol::SolConfig& c) -> double& { return c.regression.threshold; });
  add_int("regression.max_sweeps",
          [](sol::SolConfig& c) -> int& { return c.regression.max_sweeps; });
  add_double("regression.ridge", [](sol::SolConfig& c) -> double& { return c.regression.ridge; });
  add_double("regression.column_floor",
             [](sol::SolConfig& c) -> double& { return c.regression.column_floor; });

  add_int("database.capacity", [](sol::SolConfig& c) -> int& { return c.database_capacity; });
  h["database.preload"] = {[](sol::SolConfig& c, const std::string&, int, const std::string& v) {
                             c.database_preload = v;
                           },
                           [](const sol::SolConfig& c) { return c.database_preload; }};

  add_double("loop.admission_threshold",
             [](sol::SolConfig& c) -> double& { return c.admission_threshold; });
  add_int("loop.min_fit_samples", [](sol::SolConfig& c) -> int& { return c.min_fit_samples; });
  add_double("loop.success_tolerance",
             [](sol::SolConfig& c) -> double& { return c.success_tolerance; });
  add_double("loop.success_hold_s",
             [](sol::SolConfig& c) -> double& { return c.success_hold_s; });
  h["loop.seed"] = {
      [](sol::SolConfig& c, const std::string& o, int l, const std::string& v) {
        long parsed = parse_long(o, l, "loop.seed", v);
        if (parsed < 0) fail(o, l, "key 'loop.seed' expects a non-negative integer");
        c.seed = static_cast<std::uint64_t>(parsed);
      },
      [](const sol::SolConfig& c) { return std::to_string(c.seed); }};
  add_double("loop.dither_amplitude",
             [](sol::SolConfig& c) -> double& { return c.dither_amplitude; });
  add_double("loop.input_clamp", [](sol::SolConfig& c) -> double& { return c.input_clamp; });
  add_double("loop.p_snapshot_period_s",
             [](sol::SolConfig& c) -> double& { return c.p_snapshot_period_s; });
  return h;
}

const HandlerMap& handlers() {
  static const HandlerMap h = make_handlers();
  return h;
}

}  // namespace

LoadedConfig parse_config(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;

  // First pass: find the benchmark so defaults exist before overrides land.
  std::vector<std::pair<int, std::pair<std::string, std::string>>> entries;
  std::optional<sol::Benchmark> benchmark;
  int benchmark_line = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string stripped = raw;
    if (auto hash = stripped.find('#'); hash != std::string::npos) {
      stripped = stripped.substr(0, hash);
    }
    stripped = trim(stripped);
    if (stripped.empty()) continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected 'key = value'");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "missing key before '='");
    if (value.empty()) fail(origin, line_no, "key '" + key + "' has no value");
    if (key == "benchmark") {
      auto parsed = sol::parse_benchmark(value);
      if (!parsed) fail(origin, line_no, "unknown benchmark '" + value + "'");
      if (*parsed == sol::Benchmark::kLinearOracle) {
        fail(origin, line_no,
             "benchmark 'linear_oracle' has no episode config; use the oracle-check command");
      }
      benchmark = *parsed;
      benchmark_line = line_no;
      continue;
    }
    entries.push_back({line_no, {key, value}});
  }
  if (!benchmark) {
    fail(origin, line_no == 0 ? 1 : line_no, "missing required key 'benchmark'");
  }
  (void)benchmark_line;

  LoadedConfig out;
  out.benchmark = *benchmark;
  out.config = sol::default_config(*benchmark);
  const auto& table = handlers();
  for (const auto& [entry_line, kv] : entries) {
    auto it = table.find(kv.first);
    if (it == table.end()) fail(origin, entry_line, "unknown key '" + kv.first + "'");
    it->second.apply(out.config, origin, entry_line, kv.second);
  }
  try {
    out.config.validate();
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return out;
}

LoadedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.filename().string());
}

std::string dump_defaults(sol::Benchmark benchmark) {
  const sol::SolConfig cfg = sol::default_config(benchmark);
  std::string out;
  out += "# defaults for '" + std::string(sol::benchmark_name(benchmark)) + "'\n";
  out += "benchmark = " + std::string(sol::benchmark_name(benchmark)) + "\n";
  for (const auto& [key, handler] : handlers()) {
    const std::string value = handler.emit(cfg);
    if (value.empty()) continue;  // optional string keys (database.preload)
    out += key + " = " + value + "\n";
  }
  return out;
}

}  // namespace soltool

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <sol/presets.hpp>
#include <sol/sol_loop.hpp>

namespace soltool {

/// One batch request: which benchmark/config, where to write, which seeds.
struct RunManifest {
  sol::Benchmark benchmark = sol::Benchmark::kPendulum;
  sol::SolConfig config;
  std::filesystem::path out_dir;
  std::vector<std::uint64_t> seeds;  // empty: single run with the config's own seed/x0
  bool plots = true;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  sol::Termination termination = sol::Termination::kTimeout;
  double t_end = 0.0;
  double final_error = 0.0;
  double total_cost = 0.0;
};

struct RunResult {
  std::vector<SeedOutcome> outcomes;
  int successes = 0;
  bool diverged = false;  // any episode hit the divergence guard
  std::filesystem::path summary_path;
};

/// Renders the identified model one state row per line ("dx3/dt = ...") with
/// terms in basis-index order, smallest index first, inputs last.
[[nodiscard]] std::string format_model(const sol::ModelCoefficients& model);

/// Executes every episode in the manifest, writing per-seed trace and
/// P-snapshot CSVs, optional plot SVGs, and one summary.txt for the batch.
/// When `seeds` is non-empty, each episode draws its initial state from
/// sample_initial_state(benchmark, seed); a single unseeded run uses the
/// config verbatim.
RunResult run_manifest(const RunManifest& manifest);

}  // namespace soltool

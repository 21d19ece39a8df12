#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include <sol/presets.hpp>

#include "soltool/config.hpp"
#include "soltool/runner.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
            const std::string& out_dir, bool no_plots) {
  const soltool::LoadedConfig loaded = soltool::load_config(config_path);
  soltool::RunManifest manifest;
  manifest.benchmark = loaded.benchmark;
  manifest.config = loaded.config;
  manifest.out_dir = out_dir;
  manifest.seeds = seeds;
  manifest.plots = !no_plots;

  const soltool::RunResult result = soltool::run_manifest(manifest);
  for (const auto& o : result.outcomes) {
    std::printf("seed %llu: %s (t=%.3f s, final error %.6g)\n",
                static_cast<unsigned long long>(o.seed), sol::to_string(o.termination), o.t_end,
                o.final_error);
  }
  std::printf("%d/%zu succeeded; summary: %s\n", result.successes, result.outcomes.size(),
              result.summary_path.string().c_str());
  if (result.diverged) {
    std::fprintf(stderr, "error: at least one episode diverged (parameter guard tripped)\n");
    return 2;
  }
  return 0;
}

int cmd_oracle_check() {
  const sol::LinearOracleReport report = sol::run_linear_oracle(sol::default_linear_oracle());
  std::cout << "flowed P (top-left block):\n" << report.P_flow << "\n";
  std::cout << "algebraic Riccati P:\n" << report.P_care << "\n";
  std::cout << "flowed gain:\n" << report.K_flow << "\n";
  std::cout << "LQR gain:\n" << report.K_lqr << "\n";
  std::printf("P relative error: %.3e\ngain relative error: %.3e\nsettled: %s (%ld steps)\n",
              report.p_rel_error, report.k_rel_error, report.settled ? "yes" : "no", report.steps);
  const bool ok = report.settled && report.p_rel_error < 1e-3 && report.k_rel_error < 1e-3;
  std::printf("oracle check: %s\n", ok ? "OK" : "MISMATCH");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online structured learning control: experiment runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::vector<std::uint64_t> seeds;
  bool no_plots = false;
  auto* run = app.add_subcommand("run", "Run episodes from a config file");
  run->add_option("config", config_path, "key = value config file")->required();
  run->add_option("--seeds", seeds, "batch seeds; each draws its own initial state")
      ->delimiter(',');
  run->add_option("--out", out_dir, "output directory (default: out)");
  run->add_flag("--no-plots", no_plots, "skip SVG plot emission");

  std::string bench_name;
  auto* dump = app.add_subcommand("dump-defaults", "Print a benchmark's full default config");
  dump->add_option("benchmark", bench_name, "pendulum|lorenz|cartpole|double_pendulum")
      ->required();

  app.add_subcommand("oracle-check",
                     "Compare the flowed value parameters against the algebraic Riccati solution "
                     "on the built-in linear plant");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(config_path, seeds, out_dir, no_plots);
    if (dump->parsed()) {
      const auto parsed = sol::parse_benchmark(bench_name);
      if (!parsed || *parsed == sol::Benchmark::kLinearOracle) {
        std::fprintf(stderr, "error: unknown benchmark '%s'\n", bench_name.c_str());
        return 1;
      }
      std::fputs(soltool::dump_defaults(*parsed).c_str(), stdout);
      return 0;
    }
    return cmd_oracle_check();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

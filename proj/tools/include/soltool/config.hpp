#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <sol/presets.hpp>
#include <sol/sol_loop.hpp>

namespace soltool {

/// Thrown on malformed config text; message carries "<file>:<line>: ..." so
/// the offending line is one glance away.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedConfig {
  sol::Benchmark benchmark = sol::Benchmark::kPendulum;
  sol::SolConfig config;
};

/// Parses flat `key = value` text with dotted keys (`cost.gamma`,
/// `regression.threshold`), `#` comments, and blank lines. The `benchmark`
/// key selects the preset whose defaults every other key overrides; unknown
/// keys are rejected by name. Vector-valued keys take comma-separated
/// numbers. The parsed config is validated before it is returned.
[[nodiscard]] LoadedConfig parse_config(const std::string& text, const std::string& origin);

/// parse_config over the contents of `path`.
[[nodiscard]] LoadedConfig load_config(const std::filesystem::path& path);

/// Emits the full key set for a benchmark's defaults at round-trip precision:
/// parse_config(dump_defaults(b)) reproduces default_config(b) exactly.
[[nodiscard]] std::string dump_defaults(sol::Benchmark benchmark);

}  // namespace soltool

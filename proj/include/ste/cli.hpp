#ifndef STE_CLI_HPP
#define STE_CLI_HPP

#include <optional>
#include <string>

#include "ste/analysis.hpp"

// Run configuration and deterministic file emission behind the command-line
// front end. Data files are CSV (header row, LF endings, 17 significant
// digits); reports are JSON with a fixed key order. Every data file is
// written atomically and accompanied by a <output>.manifest.json describing
// the fully resolved configuration; replaying a manifest through --config
// reproduces the data bytes.

namespace ste {

inline constexpr const char* kToolName = "ste_entangle";
inline constexpr const char* kToolVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};
struct ToleranceError : std::runtime_error {
  explicit ToleranceError(const std::string& what) : std::runtime_error(what) {}
};

// exit codes: 0 success, 2 config error, 3 tolerance failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitTolerance = 3;

struct RunConfig {
  std::string command;  // evolve | sweep | figure | critical | period | validate

  std::optional<std::string> icase;                // ee | eg | ge | gg
  std::optional<std::array<double, 8>> state;      // re,im x 4, alternative to icase
  int n = 0;
  double g_drv = 1.0;
  std::optional<double> g_stm;   // exactly one of g_stm / gamma where couplings matter
  std::optional<double> gamma;

  double t_min = 0.0;
  double t_max = 4.0 * 3.14159265358979323846;
  int t_steps = 400;
  double gamma_min = 0.0;
  double gamma_max = 1.0;
  int gamma_steps = 100;

  std::string engine;            // resolved per command when empty
  std::optional<int> cutoff;     // default n + 6
  std::string preset;            // figure: fig2a | fig2b | fig3a | fig3b
  std::string output;            // default <command>.csv / <command>.json
  std::string format;            // csv | json (data commands); reports are json
  double tolerance = 1e-8;       // validate
  std::optional<std::string> grid_path;  // validate: grid config file (default built-in)
};

// Applies a JSON config file on top of the flag values (the file wins; a
// manifest file is accepted and its embedded config used).
void apply_config_file(RunConfig& config, const std::string& path);

// Full validation; throws ConfigError naming the offending field.
void validate_config(RunConfig& config);

// Executes one resolved command, writing the data file and its manifest.
// Returns the exit code; error text goes to `err`.
int run_command(RunConfig config, std::ostream& err);

// Serialized resolved config (manifest "config" object; accepted by
// apply_config_file for replay).
std::string config_to_json(const RunConfig& config);

}  // namespace ste

#endif

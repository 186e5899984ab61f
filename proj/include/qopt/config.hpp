#pragma once

// Experiment configuration: one structured JSON file per experiment,
// validated against the module-level invariants before any simulation runs.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qopt/regret_lab.hpp"

namespace qopt {

// Config problems exit the CLI with code 2; runtime problems with 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunBlock {
  int replications = 1;
  std::uint64_t seed = 1;
  int threads = 0;
  int window_lo = 300;  // cycle window for reported policy averages
  int window_hi = 500;
};

struct SweepBlock {
  std::vector<SweepCase> cases;
  int replications = 3;
  int window_lo = 300;
  int window_hi = 500;
};

struct ExperimentConfig {
  SystemModel system;
  Schedule schedule;
  Policy initial;
  FreezeMode mode = FreezeMode::None;
  RunBlock run;
  bool trace = false;
  std::optional<Optimum> pinned_optimum;  // trusted external optimum
  std::optional<SweepBlock> sweep;
  long long warm_start_customers = 0;
  std::vector<std::string> warnings;  // uniform stability, heavy tails

  // Analytic steady-state oracle: Pollaczek-Khinchine applies whenever
  // arrivals are Poisson. Empty when no closed form exists.
  std::optional<SteadyFn> oracle() const;

  // Optimum for regret accounting: the pinned value when supplied,
  // otherwise optimize_analytic on the oracle, honoring frozen coordinates.
  Optimum resolve_optimum() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text);

}  // namespace qopt

#pragma once

// Monte Carlo regret estimation: cumulative regret against the optimal
// stationary policy, its nonstationarity/suboptimality decomposition, the
// sqrt(regret)-vs-log(served) regression, and the heavy-traffic sweep.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qopt/controller.hpp"
#include "qopt/oracles.hpp"

namespace qopt {

struct RegretCheckpoint {
  int cycle = 0;
  long long served = 0;  // M_L, the served-customer clock
  double regret_mean = 0.0;
  double regret_se = 0.0;
  double sqrt_regret = 0.0;
  // Cumulative decomposition means; populated when an oracle is supplied.
  double r1_mean = 0.0;
  double r2_mean = 0.0;
};

struct LogFit {
  double slope = 0.0;      // c in sqrt(R) = c * ln(M_L) + d
  double intercept = 0.0;  // d
  double r2 = 0.0;
  int points = 0;
};

struct RegretReport {
  std::vector<RegretCheckpoint> checkpoints;
  LogFit fit;
  int replications = 0;
  double fit_burn_in = 0.2;  // leading fraction of checkpoints excluded
};

struct RegretOptions {
  int replications = 100;
  std::uint64_t seed = 1;
  int threads = 0;
  double fit_burn_in = 0.2;
  FreezeMode mode = FreezeMode::None;
  // Stationary warm start: operate this many customers at the initial
  // policy before measurement begins (0 = start from empty).
  long long warm_start_customers = 0;
  // Enables the R1/R2 decomposition columns.
  const SteadyFn* decomposition_oracle = nullptr;
};

// Per replication, accumulates realized cycle cost minus f(x*) * T_k and
// averages across replications at every cycle checkpoint; then fits
// sqrt(R) = c*ln(M_L) + d over the post-burn-in checkpoints.
RegretReport estimate_regret(const SystemModel& sys, const Schedule& schedule,
                             Policy initial, const Optimum& optimum,
                             const RegretOptions& options);

// Cumulative (R1, R2) series averaged across the given trajectories:
// R2 accrues (f(x_k) - f(x*)) * T_k and R1 the rest. Their sum equals the
// estimate_regret totals identically.
std::pair<std::vector<double>, std::vector<double>> decompose_regret(
    const std::vector<Trajectory>& replications, const MarketModel& model,
    const Optimum& optimum, const SteadyFn& oracle);

// Least-squares fit of sqrt(y) against ln(x) over the tail checkpoints.
LogFit fit_sqrt_vs_log(const std::vector<RegretCheckpoint>& checkpoints,
                       double burn_in_fraction);

// One heavy-traffic scale: the controller runs on a model with M0 = scale
// and per-scale schedule/box/initials.
struct SweepCase {
  double scale = 10.0;  // M0
  Schedule schedule;
  Policy initial;
  FeasibleBox box;
};

struct SweepRow {
  double scale = 0.0;
  double p_n = 0.0;
  double mu_n_over_n = 0.0;
  double rho_n = 0.0;
};

// Calibrated per-scale defaults: demand M0 = n, linear staffing cost,
// square-root-staffing initial point, cycle lengths scaled with n and step
// scale shrinking with n (gradient magnitudes grow with the market size).
SweepCase make_sweep_case(double n);

std::vector<SweepRow> heavy_traffic_sweep(const SystemModel& base,
                                          const std::vector<SweepCase>& cases,
                                          int replications, std::uint64_t seed,
                                          int threads, int window_lo = 300,
                                          int window_hi = 500);

}  // namespace qopt

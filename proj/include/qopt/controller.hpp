#pragma once

// Outer online loop: schedules the cycle lengths D_k and step sizes eta_k,
// runs cycles, estimates the gradient, and applies the projected update
// x_{k+1} = project(x_k - eta_k * H_k), carrying queue state across cycles.

#include <cstdint>
#include <functional>
#include <vector>

#include "qopt/gradient.hpp"
#include "qopt/queue_engine.hpp"

namespace qopt {

struct Schedule {
  double d0 = 10.0;    // D_k = ceil(d0 + d_log * ln k)
  double d_log = 10.0;
  double eta0 = 1.0;   // eta_k = eta0 / k^eta_exponent
  double xi = 0.5;     // burn-in fraction inside each cycle
  int cycles = 500;    // L
  double eta_exponent = 1.0;  // diagnostics may set 0 for a broken constant step

  void validate() const;
};

int cycle_length(const Schedule& s, int k);
double step_size(const Schedule& s, int k);

// Frozen coordinate, if any; the gradient coin then always selects the
// live coordinate.
enum class FreezeMode { None, Price, Mu };

struct CyclePoint {
  int cycle = 0;
  Policy policy{};     // decision in force during this cycle
  double h_mu = 0.0;
  double h_p = 0.0;
  int d_k = 0;
  double t_k = 0.0;
  double cost = 0.0;
  long long served = 0;  // cumulative service entries M_k
  double tail_mean = 0.0;
};

struct Trajectory {
  std::vector<CyclePoint> points;
  Policy final_policy{};

  // Mean policy over cycles [lo, hi] (1-based, clamped to the run length).
  Policy window_average(int lo, int hi) const;
};

struct RunStreams {
  RandomStream arrivals;
  RandomStream services;
  RandomStream coin;

  static RunStreams make(std::uint64_t seed, std::uint64_t replication = 0);
};

// Operate the queue at a fixed policy until `customers` enter service and
// return the carried state: an approximately stationary start (the queue
// forgets its initial state geometrically fast).
CycleState warm_start(const SystemModel& sys, const Policy& x, long long customers,
                      RunStreams& streams);

// Observer sees every cycle's raw record (trace dumps, diagnostics).
using CycleObserver = std::function<void(int cycle, const CycleRecord&)>;

Trajectory run(const SystemModel& sys, const Schedule& schedule, Policy initial,
               FreezeMode mode, RunStreams& streams,
               const CycleState* warm_state = nullptr,
               const CycleObserver& observer = {});
Trajectory run(const SystemModel& sys, const Schedule& schedule, Policy initial,
               FreezeMode mode, std::uint64_t seed, std::uint64_t replication = 0);

}  // namespace qopt

#pragma once

// Ground-truth references: M/M/1 and Pollaczek-Khinchine M/G/1 steady
// states, the exact optimizer of the analytic objective, finite-difference
// gradients, and long-run simulation estimates.

#include <array>
#include <functional>

#include "qopt/market_model.hpp"
#include "qopt/queue_engine.hpp"

namespace qopt {

struct SteadyStateSummary {
  double mean_wait = 0.0;
  double mean_busy_age = 0.0;
  double mean_queue_system = 0.0;  // customers in system, lambda*W + rho
  double rho = 0.0;
  // Batch-means standard errors; zero for closed forms.
  double se_wait = 0.0;
  double se_busy_age = 0.0;
};

// Closed forms. Both throw std::domain_error when rho >= 1.
SteadyStateSummary mm1_steady(double lambda, double mu);
SteadyStateSummary mg1_steady(double lambda, double mu, double scv_service);

using SteadyFn = std::function<SteadyStateSummary(double lambda, double mu)>;

// Steady-state cost rate assembled from the oracle's mean wait.
double analytic_objective(const MarketModel& model, const Policy& x,
                          const SteadyFn& steady);

struct Optimum {
  Policy policy{};
  double value = 0.0;
};

// Stability-filtered grid search over the box followed by Nelder-Mead
// refinement. Throws std::runtime_error if the minimizer lands on the
// stability boundary. An optional frozen coordinate restricts the search
// to a line (one-dimensional problems).
struct FreezeSpec {
  bool freeze_mu = false;
  bool freeze_p = false;
  double mu = 0.0;
  double p = 0.0;
};

Optimum optimize_analytic(const MarketModel& model, const SteadyFn& steady,
                          int grid = 200, double refine_tol = 1e-6,
                          const FreezeSpec& freeze = {});

// Central finite differences of the analytic objective; (d/dmu, d/dp).
std::array<double, 2> fd_gradient(const MarketModel& model, const SteadyFn& steady,
                                  const Policy& x, double step);

// Lindley/busy-age simulation from empty: discard `warmup` customers, then
// average `samples`. Overload is allowed but the reported rho flags it.
SteadyStateSummary simulate_steady(const SystemModel& sys, const Policy& x,
                                   long long warmup, long long samples,
                                   RandomStream& arrivals, RandomStream& services);

}  // namespace qopt

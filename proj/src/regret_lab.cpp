#include "qopt/regret_lab.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>

#include "qopt/parallel.hpp"

namespace qopt {
namespace {

// An overshooting iterate can leave the stability region, where the steady
// objective does not exist; such cycles are attributed in full to the
// nonstationarity part of the decomposition.
std::optional<double> stable_objective(const MarketModel& model, const Policy& x,
                                       const SteadyFn& steady) {
  try {
    return analytic_objective(model, x, steady);
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

}  // namespace

RegretReport estimate_regret(const SystemModel& sys, const Schedule& schedule,
                             Policy initial, const Optimum& optimum,
                             const RegretOptions& options) {
  if (options.replications < 2)
    throw std::invalid_argument("estimate_regret needs at least 2 replications");
  schedule.validate();

  const int reps = options.replications;
  const int cycles = schedule.cycles;
  const double f_star = optimum.value;
  const SteadyFn* oracle = options.decomposition_oracle;

  // cum[r][k]: cumulative regret of replication r through cycle k+1.
  std::vector<std::vector<double>> cum(reps);
  std::vector<std::vector<double>> cum_r2(oracle ? reps : 0);
  std::vector<long long> served(cycles, 0);

  parallel_for(static_cast<std::size_t>(reps), options.threads, [&](std::size_t r) {
    RunStreams streams = RunStreams::make(options.seed, r);
    std::optional<CycleState> warm;
    if (options.warm_start_customers > 0)
      warm = warm_start(sys, project(sys.market.box, initial),
                        options.warm_start_customers, streams);
    Trajectory traj = run(sys, schedule, initial, options.mode, streams,
                          warm ? &*warm : nullptr);

    auto& c = cum[r];
    c.resize(cycles);
    double total = 0.0;
    double total_r2 = 0.0;
    if (oracle) cum_r2[r].resize(cycles);
    for (int k = 0; k < cycles; ++k) {
      const CyclePoint& pt = traj.points[k];
      total += pt.cost - f_star * pt.t_k;
      c[k] = total;
      if (oracle) {
        const auto f_k = stable_objective(sys.market, pt.policy, *oracle);
        if (f_k) total_r2 += (*f_k - f_star) * pt.t_k;
        cum_r2[r][k] = total_r2;
      }
      if (r == 0) served[k] = pt.served;
    }
  });

  RegretReport report;
  report.replications = reps;
  report.fit_burn_in = options.fit_burn_in;
  report.checkpoints.resize(cycles);
  for (int k = 0; k < cycles; ++k) {
    double mean = 0.0;
    for (int r = 0; r < reps; ++r) mean += cum[r][k];
    mean /= reps;
    double ss = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double d = cum[r][k] - mean;
      ss += d * d;
    }
    RegretCheckpoint& cp = report.checkpoints[k];
    cp.cycle = k + 1;
    cp.served = served[k];
    cp.regret_mean = mean;
    cp.regret_se = std::sqrt(ss / (reps - 1) / reps);
    cp.sqrt_regret = mean > 0.0 ? std::sqrt(mean) : 0.0;
    if (oracle) {
      double r2 = 0.0;
      for (int r = 0; r < reps; ++r) r2 += cum_r2[r][k];
      cp.r2_mean = r2 / reps;
      cp.r1_mean = mean - cp.r2_mean;
    }
  }
  report.fit = fit_sqrt_vs_log(report.checkpoints, options.fit_burn_in);
  return report;
}

std::pair<std::vector<double>, std::vector<double>> decompose_regret(
    const std::vector<Trajectory>& replications, const MarketModel& model,
    const Optimum& optimum, const SteadyFn& oracle) {
  if (replications.empty())
    throw std::invalid_argument("decompose_regret needs at least one trajectory");
  const std::size_t cycles = replications.front().points.size();
  std::vector<double> r1(cycles, 0.0), r2(cycles, 0.0);
  for (const Trajectory& traj : replications) {
    if (traj.points.size() != cycles)
      throw std::invalid_argument("trajectories must share a cycle count");
    double c1 = 0.0, c2 = 0.0;
    for (std::size_t k = 0; k < cycles; ++k) {
      const CyclePoint& pt = traj.points[k];
      const auto f_k = stable_objective(model, pt.policy, oracle);
      const double r2_inc = f_k ? (*f_k - optimum.value) * pt.t_k : 0.0;
      c2 += r2_inc;
      c1 += pt.cost - optimum.value * pt.t_k - r2_inc;
      r1[k] += c1;
      r2[k] += c2;
    }
  }
  for (auto& v : r1) v /= replications.size();
  for (auto& v : r2) v /= replications.size();
  return {std::move(r1), std::move(r2)};
}

LogFit fit_sqrt_vs_log(const std::vector<RegretCheckpoint>& checkpoints,
                       double burn_in_fraction) {
  LogFit fit;
  const std::size_t skip =
      static_cast<std::size_t>(burn_in_fraction * checkpoints.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (std::size_t i = skip; i < checkpoints.size(); ++i) {
    const auto& cp = checkpoints[i];
    if (!(cp.regret_mean > 0.0) || cp.served <= 0) continue;
    const double x = std::log(static_cast<double>(cp.served));
    const double y = std::sqrt(cp.regret_mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  fit.points = n;
  if (n < 2) return fit;
  const double det = n * sxx - sx * sx;
  if (det == 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  ss_res = syy - 2.0 * (fit.slope * sxy + fit.intercept * sy) +
           fit.slope * fit.slope * sxx + 2.0 * fit.slope * fit.intercept * sx +
           n * fit.intercept * fit.intercept;
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  return fit;
}

SweepCase make_sweep_case(double n) {
  if (!(n > 0.0)) throw std::invalid_argument("sweep scale must be > 0");
  SweepCase c;
  c.scale = n;
  // Cycle lengths grow with the market scale (relaxation takes ~n times
  // longer in customer count near heavy traffic); the step scale shrinks
  // with n because the price gradient magnitude grows like the demand.
  c.schedule.d0 = n;
  c.schedule.d_log = n;
  c.schedule.eta0 = 30.0 / n;
  c.schedule.xi = 0.5;
  c.schedule.cycles = 500;
  c.initial.p = 3.5;
  // Square-root staffing start: lambda + 1.2 * sqrt(5 * lambda) at p = 3.5.
  const double lam0 = logistic_demand(c.initial.p, n, 4.1);
  c.initial.mu = lam0 + 1.2 * std::sqrt(5.0 * lam0);
  c.box = FeasibleBox{0.2 * n, 2.5 * n, 2.5, 6.0};
  return c;
}

std::vector<SweepRow> heavy_traffic_sweep(const SystemModel& base,
                                          const std::vector<SweepCase>& cases,
                                          int replications, std::uint64_t seed,
                                          int threads, int window_lo,
                                          int window_hi) {
  if (replications < 1) throw std::invalid_argument("sweep needs replications >= 1");
  std::vector<SweepRow> rows(cases.size());
  const auto* logistic = dynamic_cast<const LogisticDemand*>(base.market.demand.get());
  const double a = logistic ? logistic->a() : 4.1;

  for (std::size_t i = 0; i < cases.size(); ++i) {
    const SweepCase& sc = cases[i];
    SystemModel sys = base;
    sys.market.demand = std::make_shared<LogisticDemand>(sc.scale, a);
    sys.market.box = sc.box;

    std::vector<Policy> averages(replications);
    parallel_for(static_cast<std::size_t>(replications), threads,
                 [&](std::size_t r) {
                   Trajectory traj = run(sys, sc.schedule, sc.initial,
                                         FreezeMode::None, seed, r);
                   averages[r] = traj.window_average(window_lo, window_hi);
                 });
    double mu = 0.0, p = 0.0;
    for (const Policy& x : averages) {
      mu += x.mu;
      p += x.p;
    }
    mu /= replications;
    p /= replications;

    SweepRow& row = rows[i];
    row.scale = sc.scale;
    row.p_n = p;
    row.mu_n_over_n = mu / sc.scale;
    row.rho_n = sys.market.lambda(p) / mu;
  }
  return rows;
}

}  // namespace qopt

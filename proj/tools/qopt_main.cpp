// Experiment runner: config-driven subcommands over the library, emitting
// CSV artifacts for external plotting.
//
//   qopt optimize --config cfg.json [--out DIR] [--seed N] [--threads N]
//   qopt regret   --config cfg.json ...
//   qopt sweep    --config cfg.json ...
//   qopt validate [--seed N]
//
// Exit codes: 0 ok, 1 runtime failure, 2 config failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qopt/config.hpp"
#include "qopt/csv.hpp"
#include "qopt/parallel.hpp"

namespace fs = std::filesystem;
using namespace qopt;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

ExperimentConfig load_and_report(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (args.seed) cfg.run.seed = *args.seed;
  if (args.threads) cfg.run.threads = *args.threads;
  for (const std::string& w : cfg.warnings)
    std::cerr << "warning: " << w << "\n";
  return cfg;
}

fs::path out_file(const CommonArgs& args, const std::string& name) {
  fs::create_directories(args.out_dir);
  return fs::path(args.out_dir) / name;
}

int cmd_optimize(const CommonArgs& args) {
  ExperimentConfig cfg = load_and_report(args);

  std::vector<Policy> window(cfg.run.replications);
  std::vector<Trajectory> kept(1);

  std::optional<CsvWriter> trace;
  if (cfg.trace) {
    trace.emplace(out_file(args, "trace.csv").string(),
                  std::vector<std::string>{"cycle", "n", "wait", "busy_age",
                                           "service", "interarrival",
                                           "price_paid"});
  }

  parallel_for(static_cast<std::size_t>(cfg.run.replications), cfg.run.threads,
               [&](std::size_t r) {
                 RunStreams streams = RunStreams::make(cfg.run.seed, r);
                 CycleObserver observer;
                 if (r == 0 && trace) {
                   observer = [&](int k, const CycleRecord& rec) {
                     for (int n = 1; n <= rec.d_k; ++n) {
                       trace->field(k)
                           .field(n)
                           .field(rec.waits[n - 1])
                           .field(rec.busy_ages[n - 1])
                           .field(rec.services[n - 1])
                           .field(rec.interarrivals[n - 1])
                           .field(n <= rec.q_k ? rec.prev_price : rec.policy.p);
                       trace->end_row();
                     }
                   };
                 }
                 Trajectory traj = run(cfg.system, cfg.schedule, cfg.initial,
                                       cfg.mode, streams, nullptr, observer);
                 window[r] = traj.window_average(cfg.run.window_lo, cfg.run.window_hi);
                 if (r == 0) kept[0] = std::move(traj);
               });

  {
    CsvWriter csv(out_file(args, "trajectory.csv").string(),
                  {"cycle", "mu", "p", "h_mu", "h_p", "D_k", "T_k", "cost", "M_k"});
    for (const CyclePoint& pt : kept[0].points) {
      csv.field(pt.cycle)
          .field(pt.policy.mu)
          .field(pt.policy.p)
          .field(pt.h_mu)
          .field(pt.h_p)
          .field(pt.d_k)
          .field(pt.t_k)
          .field(pt.cost)
          .field(pt.served);
      csv.end_row();
    }
  }

  double mu_bar = 0.0, p_bar = 0.0;
  for (const Policy& x : window) {
    mu_bar += x.mu;
    p_bar += x.p;
  }
  mu_bar /= window.size();
  p_bar /= window.size();

  std::printf("replications: %d\n", cfg.run.replications);
  std::printf("policy average over cycles [%d, %d]: mu = %.6g, p = %.6g\n",
              cfg.run.window_lo, cfg.run.window_hi, mu_bar, p_bar);
  if (auto fn = cfg.oracle()) {
    try {
      const Optimum opt = cfg.resolve_optimum();
      std::printf("analytic optimum: mu* = %.6g, p* = %.6g, f* = %.6g\n",
                  opt.policy.mu, opt.policy.p, opt.value);
      std::printf("distance: |mu - mu*| = %.4g, |p - p*| = %.4g\n",
                  std::abs(mu_bar - opt.policy.mu), std::abs(p_bar - opt.policy.p));
    } catch (const std::runtime_error& e) {
      std::printf("analytic optimum unavailable: %s\n", e.what());
    }
  }
  return 0;
}

int cmd_regret(const CommonArgs& args) {
  ExperimentConfig cfg = load_and_report(args);
  auto fn = cfg.oracle();
  if (!fn && !cfg.pinned_optimum)
    throw std::runtime_error(
        "regret decomposition requires an analytic oracle for the configured "
        "model (or a pinned 'optimum' block)");
  const Optimum opt = cfg.resolve_optimum();

  RegretOptions options;
  options.replications = cfg.run.replications;
  options.seed = cfg.run.seed;
  options.threads = cfg.run.threads;
  options.mode = cfg.mode;
  options.warm_start_customers = cfg.warm_start_customers;
  SteadyFn steady;
  if (fn) {
    steady = *fn;
    options.decomposition_oracle = &steady;
  }

  const RegretReport report =
      estimate_regret(cfg.system, cfg.schedule, cfg.initial, opt, options);

  {
    CsvWriter csv(out_file(args, "regret_checkpoints.csv").string(),
                  {"checkpoint", "M_L", "regret_mean", "regret_se", "sqrt_regret",
                   "r1_mean", "r2_mean"});
    for (const RegretCheckpoint& cp : report.checkpoints) {
      csv.field(cp.cycle)
          .field(cp.served)
          .field(cp.regret_mean)
          .field(cp.regret_se)
          .field(cp.sqrt_regret)
          .field(cp.r1_mean)
          .field(cp.r2_mean);
      csv.end_row();
    }
  }
  {
    CsvWriter csv(out_file(args, "regret_summary.csv").string(),
                  {"c", "d", "r2", "replications"});
    csv.field(report.fit.slope)
        .field(report.fit.intercept)
        .field(report.fit.r2)
        .field(report.replications);
    csv.end_row();
  }

  std::printf("optimum: mu* = %.6g, p* = %.6g, f* = %.6g\n", opt.policy.mu,
              opt.policy.p, opt.value);
  std::printf("sqrt-regret fit: c = %.4g, d = %.4g, R^2 = %.4f (%d points)\n",
              report.fit.slope, report.fit.intercept, report.fit.r2,
              report.fit.points);
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  ExperimentConfig cfg = load_and_report(args);
  if (!cfg.sweep) throw ConfigError("config has no 'sweep' block");

  const auto rows = heavy_traffic_sweep(cfg.system, cfg.sweep->cases,
                                        cfg.sweep->replications, cfg.run.seed,
                                        cfg.run.threads, cfg.sweep->window_lo,
                                        cfg.sweep->window_hi);
  CsvWriter csv(out_file(args, "heavy_traffic.csv").string(),
                {"n", "p_n", "mu_n_over_n", "rho_n"});
  for (const SweepRow& row : rows) {
    csv.field(row.scale).field(row.p_n).field(row.mu_n_over_n).field(row.rho_n);
    csv.end_row();
    std::printf("n = %-7g p_n = %-9.5g mu_n/n = %-9.5g rho_n = %.4f\n",
                row.scale, row.p_n, row.mu_n_over_n, row.rho_n);
  }
  return 0;
}

struct Check {
  std::string name;
  bool pass;
  double measured;
  double tolerance;
};

int cmd_validate(std::uint64_t seed) {
  std::vector<Check> checks;

  // Shared M/M/1 test bench: logistic demand, quadratic cost.
  SystemModel sys;
  sys.market.demand = std::make_shared<LogisticDemand>(10.0, 4.1);
  sys.market.cost = std::make_shared<QuadraticCost>(0.1);
  sys.market.h0 = 1.0;
  sys.market.box = FeasibleBox{1.0, 20.0, 0.5, 10.0};
  sys.arrival = make_spec(Family::Exponential, 1.0);
  sys.service = make_spec(Family::Exponential, 1.0);
  const SteadyFn mm1 = [](double lam, double mu) { return mm1_steady(lam, mu); };

  {  // IPA partials against central finite differences of the closed form.
    const Policy x{10.0, 4.1};
    const auto s = mm1_steady(sys.market.lambda(x.p), x.mu);
    const auto ipa = steady_partials_oracle(sys.market, x, s.mean_wait, s.mean_busy_age);
    const auto fd = fd_gradient(sys.market, mm1, x, 1e-4);
    const double rel = std::max(std::abs(ipa[0] - fd[0]) / std::abs(fd[0]),
                                std::abs(ipa[1] - fd[1]) / std::abs(fd[1]));
    checks.push_back({"ipa_vs_finite_difference", rel <= 1e-4, rel, 1e-4});
  }

  {  // Simulated tail-average gradient against the steady oracle.
    const Policy x{10.0, 4.1};  // rho = 0.5
    RunStreams streams = RunStreams::make(seed, 0);
    const CycleState warm = warm_start(sys, x, 100000, streams);
    const CycleRecord rec =
        run_cycle(sys, x, 100000, warm, streams.arrivals, streams.services);
    const auto s = mm1_steady(sys.market.lambda(x.p), x.mu);
    const auto exact = steady_partials_oracle(sys.market, x, s.mean_wait, s.mean_busy_age);
    const auto h_mu = estimate_gradient_coordinate(sys.market, x, rec, 0.5, Coordinate::Mu);
    const auto h_p = estimate_gradient_coordinate(sys.market, x, rec, 0.5, Coordinate::Price);
    const double rel = std::max(std::abs(h_mu.h_mu - exact[0]) / std::abs(exact[0]),
                                std::abs(h_p.h_p - exact[1]) / std::abs(exact[1]));
    checks.push_back({"simulated_gradient_vs_oracle", rel <= 0.02, rel, 0.02});
  }

  {  // Pollaczek-Khinchine against a long simulation, H2 service, rho = 0.5.
    SystemModel h2 = sys;
    h2.service = make_spec(Family::HyperExp2, 2.0);
    const Policy x{10.0, 4.1};
    RandomStream arr = make_stream(seed, 7, StreamPurpose::Arrivals);
    RandomStream svc = make_stream(seed, 7, StreamPurpose::Services);
    const auto sim = simulate_steady(h2, x, 100000, 1000000, arr, svc);
    const auto pk = mg1_steady(h2.market.lambda(x.p), x.mu, 2.0);
    const double err = std::abs(sim.mean_wait - pk.mean_wait);
    const double band = 3.0 * sim.se_wait;
    checks.push_back({"pk_vs_simulation", err <= band, err, band});
  }

  {  // Coupling collapse: identical variates, different initial waits.
    const Policy x{10.0, 4.1};
    auto run_with_w0 = [&](double w0) {
      RandomStream arr = make_stream(seed, 11, StreamPurpose::Arrivals);
      RandomStream svc = make_stream(seed, 11, StreamPurpose::Services);
      CycleState st;
      st.w0 = w0;
      st.prev_policy = x;
      st.prev_price_rate = sys.market.lambda(x.p);
      return run_cycle(sys, x, 5000, st, arr, svc);
    };
    const CycleRecord a = run_with_w0(0.0);
    const CycleRecord b = run_with_w0(4.0);
    int first_idle = -1;
    for (int n = 0; n < b.d_k; ++n) {
      if (b.waits[n] == 0.0) {
        first_idle = n;
        break;
      }
    }
    bool collapsed = first_idle >= 0;
    for (int n = first_idle; collapsed && n < b.d_k; ++n)
      collapsed = a.waits[n] == b.waits[n];
    checks.push_back({"coupling_collapse_exact", collapsed,
                      static_cast<double>(first_idle), 0.0});
  }

  bool all = true;
  std::printf("check,pass,measured,tolerance\n");
  for (const Check& c : checks) {
    all = all && c.pass;
    std::printf("%s,%s,%.6g,%.6g\n", c.name.c_str(), c.pass ? "pass" : "FAIL",
                c.measured, c.tolerance);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online pricing and capacity sizing for a GI/GI/1 queue"};
  app.require_subcommand(1);

  CommonArgs args;
  std::uint64_t validate_seed = 20240601;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", args.config_path, "experiment config (JSON)")
          ->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&args](std::uint64_t s) { args.seed = s; },
        "override run.seed");
    sub->add_option_function<int>(
        "--threads", [&args](int t) { args.threads = t; },
        "override run.threads (0 = hardware)");
  };

  CLI::App* optimize = app.add_subcommand("optimize", "run the online controller");
  add_common(optimize, true);
  CLI::App* regret = app.add_subcommand("regret", "Monte Carlo regret estimation");
  add_common(regret, true);
  CLI::App* sweep = app.add_subcommand("sweep", "heavy-traffic scaling sweep");
  add_common(sweep, true);
  CLI::App* validate = app.add_subcommand("validate", "oracle cross-checks");
  validate->add_option("--seed", validate_seed, "seed for the checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (optimize->parsed()) return cmd_optimize(args);
    if (regret->parsed()) return cmd_regret(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (validate->parsed()) return cmd_validate(validate_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

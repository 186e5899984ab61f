// End-to-end acceptance suite. Each test case covers one acceptance
// criterion and prints a PASS/FAIL line with the measured values; doctest
// assertions drive the exit code. Benchmarks load the shipped experiment
// configs so the suite exercises the same setups users run.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "qopt/config.hpp"
#include "qopt/parallel.hpp"

using namespace qopt;

namespace {

std::filesystem::path config_dir() { return QOPT_CONFIG_DIR; }

ExperimentConfig load(const std::string& name) {
  return load_config(config_dir() / name);
}

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %2d [%s] %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
}

double rel_err(double measured, double target) {
  return std::abs(measured - target) / std::abs(target);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

// Mean window policy across the config's replications.
Policy run_benchmark(const ExperimentConfig& cfg) {
  std::vector<Policy> window(cfg.run.replications);
  parallel_for(window.size(), cfg.run.threads, [&](std::size_t r) {
    const Trajectory traj =
        run(cfg.system, cfg.schedule, cfg.initial, cfg.mode, cfg.run.seed, r);
    window[r] = traj.window_average(cfg.run.window_lo, cfg.run.window_hi);
  });
  double mu = 0, p = 0;
  for (const Policy& x : window) {
    mu += x.mu;
    p += x.p;
  }
  const double n = static_cast<double>(window.size());
  return Policy{mu / n, p / n};
}

}  // namespace

TEST_CASE("criterion 1: pricing-only convergence") {
  const auto cfg = load("pricing_mm1.json");
  const Policy avg = run_benchmark(cfg);
  const double err = rel_err(avg.p, 3.531);
  const bool pass = err <= 0.02;
  report(1, pass,
         fmt("pricing convergence: mean p over cycles 300-500 = %.4f "
             "(target 3.531 within 2%%, err %.2f%%)",
             avg.p, 100 * err));
  CHECK(pass);
}

TEST_CASE("criterion 2: staffing-only convergence") {
  const auto cfg = load("staffing_mm1.json");
  const Policy avg = run_benchmark(cfg);
  const double err = rel_err(avg.mu, 8.342);
  const bool pass = err <= 0.02;
  report(2, pass,
         fmt("staffing convergence: mean mu = %.4f (target 8.342 within 2%%, "
             "err %.2f%%)",
             avg.mu, 100 * err));
  CHECK(pass);
}

TEST_CASE("criterion 3: joint convergence") {
  const auto cfg = load("joint_mm1.json");
  const Policy avg = run_benchmark(cfg);
  const double err_p = rel_err(avg.p, 4.02);
  const double err_mu = rel_err(avg.mu, 7.10);
  const bool pass = err_p <= 0.03 && err_mu <= 0.03;
  report(3, pass,
         fmt("joint convergence: (mu, p) = (%.4f, %.4f) vs (7.10, 4.02), "
             "errs (%.2f%%",
             avg.mu, avg.p, 100 * err_mu) +
             fmt(", %.2f%%) within 3%%", 100 * err_p));
  CHECK(pass);
}

TEST_CASE("criterion 4: logarithmic regret-signature") {
  struct Bench {
    const char* config;
    double reference_slope;
    const char* label;
  };
  const Bench benches[] = {{"pricing_mm1.json", 0.24, "pricing"},
                           {"joint_mm1.json", 0.186, "joint"}};
  for (const Bench& b : benches) {
    auto cfg = load(b.config);
    cfg.run.replications = 100;
    const Optimum opt = cfg.resolve_optimum();
    const SteadyFn oracle = *cfg.oracle();

    RegretOptions options;
    options.replications = cfg.run.replications;
    options.seed = cfg.run.seed;
    options.threads = cfg.run.threads;
    options.mode = cfg.mode;
    options.decomposition_oracle = &oracle;
    const RegretReport rep =
        estimate_regret(cfg.system, cfg.schedule, cfg.initial, opt, options);

    const bool r2_ok = rep.fit.r2 >= 0.9;
    const bool slope_ok = rel_err(rep.fit.slope, b.reference_slope) <= 0.5;
    report(4, r2_ok,
           std::string(b.label) +
               fmt(" sqrt-regret fit: R^2 = %.4f (>= 0.9 required, primary)",
                   rep.fit.r2));
    report(4, slope_ok,
           std::string(b.label) +
               fmt(" fitted slope c = %.3f (reference %.3f, band +/-50%%)",
                   rep.fit.slope, b.reference_slope));

    // Context: the suboptimality component carries the clean log signature
    // (reported for diagnosis, not asserted).
    std::vector<RegretCheckpoint> r2_series = rep.checkpoints;
    for (auto& cp : r2_series) cp.regret_mean = cp.r2_mean;
    const LogFit subfit = fit_sqrt_vs_log(r2_series, rep.fit_burn_in);
    std::printf("             (context) %s suboptimality-component fit: "
                "c = %.3f, R^2 = %.4f\n",
                b.label, subfit.slope, subfit.r2);

    CHECK(r2_ok);
    CHECK(slope_ok);
  }
}

TEST_CASE("criterion 5: IPA partials vs finite differences") {
  const auto cfg = load("joint_mm1.json");
  const SteadyFn fn = *cfg.oracle();
  double worst = 0.0;
  int points = 0;
  for (double mu : {9.0, 10.0, 11.0, 12.0, 13.0}) {
    for (double p : {3.6, 4.4}) {
      const Policy x{mu, p};
      const double lam = cfg.system.market.lambda(p);
      REQUIRE(lam / mu <= 0.8);
      const auto s = fn(lam, mu);
      const auto ipa = steady_partials_oracle(cfg.system.market, x, s.mean_wait,
                                              s.mean_busy_age);
      const auto fd = fd_gradient(cfg.system.market, fn, x, 1e-4);
      worst = std::max(worst, std::abs(ipa[0] - fd[0]) / std::abs(fd[0]));
      worst = std::max(worst, std::abs(ipa[1] - fd[1]) / std::abs(fd[1]));
      ++points;
    }
  }
  const bool pass = worst <= 1e-4 && points == 10;
  report(5, pass,
         fmt("IPA vs central differences on a 10-point grid (rho <= 0.8): "
             "worst relative error %.3g (tol 1e-4)",
             worst));
  CHECK(pass);
}

TEST_CASE("criterion 6: simulated gradient bias decay") {
  const auto cfg = load("joint_mm1.json");
  const Policy x{10.0, 4.1};  // lambda = 5: rho = 0.5
  RunStreams streams = RunStreams::make(61803, 0);
  const CycleState warm = warm_start(cfg.system, x, 100000, streams);
  const CycleRecord rec = run_cycle(cfg.system, x, 100000, warm,
                                    streams.arrivals, streams.services);
  const auto s = mm1_steady(cfg.system.market.lambda(x.p), x.mu);
  const auto exact = steady_partials_oracle(cfg.system.market, x, s.mean_wait,
                                            s.mean_busy_age);
  const auto h_mu =
      estimate_gradient_coordinate(cfg.system.market, x, rec, 0.5, Coordinate::Mu);
  const auto h_p = estimate_gradient_coordinate(cfg.system.market, x, rec, 0.5,
                                                Coordinate::Price);
  const double err = std::max(std::abs(h_mu.h_mu - exact[0]) / std::abs(exact[0]),
                              std::abs(h_p.h_p - exact[1]) / std::abs(exact[1]));
  const bool pass = err <= 0.02;
  report(6, pass,
         fmt("tail-averaged gradient at d_k = 1e5, stationary start, rho 0.5: "
             "relative error %.4f (tol 2%%)",
             err));
  CHECK(pass);
}

TEST_CASE("criterion 7: M/G/1 optimizer and controller reproduction") {
  struct Case {
    const char* config;
    double p_star, mu_star;
  };
  const Case cases[] = {{"mg1_h2_scv8.json", 3.44, 16.86},
                        {"mg1_m_scv1.json", 3.40, 12.48},
                        {"mg1_e8_scv0125.json", 3.38, 11.34}};
  for (const Case& c : cases) {
    const auto cfg = load(c.config);
    const Optimum opt = cfg.resolve_optimum();
    const double opt_err =
        std::max(rel_err(opt.policy.p, c.p_star), rel_err(opt.policy.mu, c.mu_star));
    const bool opt_ok = opt_err <= 0.02;

    const Policy avg = run_benchmark(cfg);
    const double run_err =
        std::max(rel_err(avg.p, c.p_star), rel_err(avg.mu, c.mu_star));
    const bool run_ok = run_err <= 0.05;

    report(7, opt_ok && run_ok,
           fmt("scv %.3g: optimizer (%.3f", cfg.system.service.scv, opt.policy.p) +
               fmt(", %.2f) err %.2f%% (tol 2%%); ", opt.policy.mu, 100 * opt_err) +
               fmt("controller (%.3f, %.2f) err %.2f", avg.p, avg.mu, 100 * run_err) +
               "% (tol 5%)");
    CHECK(opt_ok);
    CHECK(run_ok);
  }
}

TEST_CASE("criterion 8: heavy-traffic trend") {
  const auto cfg = load("heavy_traffic_sweep.json");
  const std::vector<SweepCase> cases = {make_sweep_case(10), make_sweep_case(100),
                                        make_sweep_case(1000)};
  const auto rows =
      heavy_traffic_sweep(cfg.system, cases, 3, cfg.run.seed, cfg.run.threads);
  const bool monotone =
      rows[0].rho_n < rows[1].rho_n && rows[1].rho_n < rows[2].rho_n;
  const bool rho100 = rows[1].rho_n >= 0.7 && rows[1].rho_n <= 0.9;
  const bool p1000 = rel_err(rows[2].p_n, 3.282) <= 0.05;
  const bool pass = monotone && rho100 && p1000;
  report(8, pass,
         fmt("rho_n = {%.3f, %.3f, %.3f} monotone; ", rows[0].rho_n, rows[1].rho_n,
             rows[2].rho_n) +
             fmt("rho_100 in [0.7, 0.9]; p_1000 = %.3f within 5%% of 3.282 "
                 "(err %.2f%%)",
                 rows[2].p_n, 100 * rel_err(rows[2].p_n, 3.282)));
  CHECK(monotone);
  CHECK(rho100);
  CHECK(p1000);
}

TEST_CASE("criterion 9: property suite under fixed seeds") {
  const auto cfg = load("joint_mm1.json");
  const SystemModel& sys = cfg.system;
  bool all = true;

  {  // Lindley monotonicity and exact coupling collapse.
    const Policy x{10.0, 4.1};
    auto run_w0 = [&](double w0) {
      RandomStream arr(9090, 0), svc(9090, 1);
      CycleState st;
      st.w0 = w0;
      st.prev_policy = x;
      st.prev_price_rate = sys.market.lambda(x.p);
      return run_cycle(sys, x, 4000, st, arr, svc);
    };
    const auto a = run_w0(0.0);
    const auto b = run_w0(5.0);
    int first_idle = -1;
    bool monotone = true;
    for (int n = 0; n < b.d_k; ++n) {
      monotone = monotone && b.waits[n] >= a.waits[n];
      if (first_idle < 0 && b.waits[n] == 0.0) first_idle = n;
    }
    bool collapsed = first_idle >= 0;
    for (int n = std::max(first_idle, 0); n < b.d_k; ++n)
      collapsed = collapsed && a.waits[n] == b.waits[n];
    all = all && monotone && collapsed;
    report(9, monotone && collapsed,
           fmt("coupling: Lindley monotone and exact collapse after first "
               "idleness (index %g)",
               static_cast<double>(first_idle)));
  }

  {  // Projection idempotence and nonexpansiveness.
    const FeasibleBox box{1.0, 20.0, 0.1, 10.0};
    RandomStream stream(11, 0);
    bool ok = true;
    for (int i = 0; i < 1000; ++i) {
      const Policy x{-5 + 30 * stream.uniform01(), -5 + 20 * stream.uniform01()};
      const Policy y{-5 + 30 * stream.uniform01(), -5 + 20 * stream.uniform01()};
      const Policy px = project(box, x), py = project(box, y);
      const Policy ppx = project(box, px);
      ok = ok && px.mu == ppx.mu && px.p == ppx.p;
      ok = ok && std::hypot(px.mu - py.mu, px.p - py.p) <=
                     std::hypot(x.mu - y.mu, x.p - y.p) + 1e-12;
    }
    all = all && ok;
    report(9, ok, "projection: idempotent and nonexpansive on random pairs");
  }

  {  // Busy-age identity on a fresh record.
    RandomStream arr(77, 0), svc(77, 1);
    auto st = make_initial_state(sys, {10.0, 4.1}, arr);
    const auto rec = run_cycle(sys, {10.0, 4.1}, 5000, st, arr, svc);
    bool ok = true;
    double prev = st.x0;
    for (int n = 0; n < rec.d_k; ++n) {
      if (rec.busy_ages[n] > 0.0)
        ok = ok && std::abs(rec.busy_ages[n] - prev - rec.interarrivals[n]) <
                       1e-12 * (1.0 + rec.busy_ages[n]);
      else
        ok = ok && rec.waits[n] == 0.0;
      prev = rec.busy_ages[n];
    }
    all = all && ok;
    report(9, ok, "busy-age identity: increments equal interarrivals while busy");
  }

  {  // P-K vs simulation at 3 standard errors (H2 service, scv 2).
    SystemModel h2 = sys;
    h2.service = make_spec(Family::HyperExp2, 2.0);
    const Policy x{10.0, 4.1};
    RandomStream arr = make_stream(2222, 0, StreamPurpose::Arrivals);
    RandomStream svc = make_stream(2222, 0, StreamPurpose::Services);
    const auto sim = simulate_steady(h2, x, 100000, 1000000, arr, svc);
    const auto pk = mg1_steady(5.0, 10.0, 2.0);
    const bool ok =
        std::abs(sim.mean_wait - pk.mean_wait) <= 3 * sim.se_wait &&
        std::abs(sim.mean_busy_age - pk.mean_busy_age) <= 3 * sim.se_busy_age;
    all = all && ok;
    report(9, ok,
           fmt("P-K vs simulation at rho 0.5, scv 2: wait gap %.2g (3SE %.2g)",
               std::abs(sim.mean_wait - pk.mean_wait), 3 * sim.se_wait));
  }

  {  // Common-random-number Lipschitz trend in mu.
    double gaps[3];
    const double deltas[3] = {0.1, 0.05, 0.025};
    for (int i = 0; i < 3; ++i) {
      RandomStream arr = make_stream(3333, 0, StreamPurpose::Arrivals);
      RandomStream svc = make_stream(3333, 0, StreamPurpose::Services);
      double wa = 0, wb = 0, acc = 0;
      for (int n = 0; n < 300000; ++n) {
        const double u = draw(sys.arrival, arr) / 5.0;
        const double v = draw(sys.service, svc);
        wa = std::max(0.0, wa + v / 10.0 - u);
        wb = std::max(0.0, wb + v / (10.0 + deltas[i]) - u);
        acc += std::abs(wa - wb);
      }
      gaps[i] = acc / 300000;
    }
    const double c1 = gaps[0] / deltas[0], c2 = gaps[1] / deltas[1],
                 c3 = gaps[2] / deltas[2];
    const double cmax = std::max({c1, c2, c3}), cmin = std::min({c1, c2, c3});
    const bool ok = gaps[0] > gaps[1] && gaps[1] > gaps[2] && cmax / cmin <= 1.3;
    all = all && ok;
    report(9, ok,
           fmt("CRN Lipschitz: |W(mu)-W(mu+d)|/d stable across deltas "
               "(ratio %.3f)",
               cmax / cmin));
  }

  CHECK(all);
}

TEST_CASE("criterion 10: stability recovery from overload") {
  auto cfg = load("joint_mm1.json");
  const Policy overloaded{3.5, 2.0};  // rho_1 = lambda(2)/3.5 = 2.55
  const int reps = 100;
  std::vector<int> recovered(reps, 0);
  parallel_for(reps, cfg.run.threads, [&](std::size_t r) {
    Schedule s = cfg.schedule;
    s.cycles = 20;
    const Trajectory traj =
        run(cfg.system, s, overloaded, FreezeMode::None, 271828, r);
    for (const auto& pt : traj.points) {
      if (cfg.system.market.lambda(pt.policy.p) / pt.policy.mu < 1.0) {
        recovered[r] = 1;
        break;
      }
    }
  });
  int count = 0;
  for (int r : recovered) count += r;
  const bool pass = count >= 95;
  report(10, pass,
         fmt("overloaded start (rho 2.55): %g of 100 replications reach "
             "rho < 1 within 20 cycles (>= 95 required)",
             static_cast<double>(count)));
  CHECK(pass);
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include "qopt/controller.hpp"
#include "qopt/gradient.hpp"
#include "qopt/oracles.hpp"
#include "test_helpers.hpp"

using namespace qopt;
using qopt::testing::mm1_bench;

TEST_CASE("steady partials at the M/M/1 closed forms") {
  const SystemModel sys = mm1_bench(0.1);
  const Policy x{10.0, 4.1};  // lambda = 5: E[W] = 0.1, E[X] = 0.2
  const auto g = steady_partials_oracle(sys.market, x, 0.1, 0.2);
  CHECK(g[0] == doctest::Approx(1.8));   // d/dmu
  CHECK(g[1] == doctest::Approx(4.25));  // d/dp

  // Zero congestion and flat demand leave the direct terms only.
  MarketModel flat = sys.market;
  flat.demand = std::make_shared<FixedDemand>(5.0);
  const auto g0 = steady_partials_oracle(flat, x, 0.0, 0.0);
  CHECK(g0[0] == doctest::Approx(flat.cost_marginal(x.mu) - 1.0 * 5.0 / 100.0));
  CHECK(g0[1] == doctest::Approx(-5.0));
}

TEST_CASE("steady partials match finite differences of the closed form") {
  const SystemModel sys = mm1_bench(0.1);
  const auto fn = testing::mm1_fn();
  // 10-point grid with utilization at or below 0.8.
  std::vector<Policy> grid;
  for (double mu : {9.0, 10.0, 11.0, 12.0, 13.0})
    for (double p : {3.6, 4.4}) grid.push_back({mu, p});
  for (const Policy x : grid) {
    const double lam = sys.market.lambda(x.p);
    REQUIRE(lam / x.mu <= 0.8);
    const auto s = mm1_steady(lam, x.mu);
    const auto ipa = steady_partials_oracle(sys.market, x, s.mean_wait, s.mean_busy_age);
    const auto fd = fd_gradient(sys.market, fn, x, 1e-4);
    CHECK(ipa[0] == doctest::Approx(fd[0]).epsilon(1e-4));
    CHECK(ipa[1] == doctest::Approx(fd[1]).epsilon(1e-4));
  }
}

TEST_CASE("estimator with the exact steady congestion reproduces the partials") {
  const SystemModel sys = mm1_bench(0.1);
  const Policy x{10.0, 4.1};
  CycleRecord rec;
  rec.d_k = 2;
  rec.waits = {0.3, 0.3};  // tail mean (W + X) pinned at its steady value 0.3
  rec.busy_ages = {0.0, 0.0};
  const auto hp = estimate_gradient_coordinate(sys.market, x, rec, 0.5,
                                               Coordinate::Price);
  CHECK(hp.h_p == doctest::Approx(4.25));
  CHECK(hp.h_mu == 0.0);
  const auto hm = estimate_gradient_coordinate(sys.market, x, rec, 0.5,
                                               Coordinate::Mu);
  CHECK(hm.h_mu == doctest::Approx(1.8));
  CHECK(hm.h_p == 0.0);
}

TEST_CASE("tail window rounding and the empty-window error") {
  CycleRecord rec;
  rec.d_k = 10;
  rec.waits.assign(10, 0.0);
  rec.busy_ages.assign(10, 0.0);
  for (int n = 0; n < 10; ++n) rec.waits[n] = n + 1.0;

  int window = 0;
  // floor(0.5 * 10) = 5: window is n = 6..10, mean of 6..10 = 8.
  CHECK(tail_statistic(rec, 0.5, &window) == doctest::Approx(8.0));
  CHECK(window == 5);
  // floor(0.37 * 10) = 3: window 4..10.
  CHECK(tail_statistic(rec, 0.37, &window) == doctest::Approx(7.0));
  CHECK(window == 7);
  CHECK_THROWS_AS(tail_statistic(rec, 1.0, nullptr), std::invalid_argument);

  CycleRecord tiny;
  tiny.d_k = 1;
  tiny.waits = {2.0};
  tiny.busy_ages = {1.0};
  CHECK(tail_statistic(tiny, 0.5, &window) == doctest::Approx(3.0));
}

TEST_CASE("coin draws exactly one live coordinate") {
  const SystemModel sys = mm1_bench(0.1);
  const Policy x{10.0, 4.1};
  CycleRecord rec;
  rec.d_k = 4;
  rec.waits.assign(4, 0.1);
  rec.busy_ages.assign(4, 0.2);
  RandomStream coin(77, 2);
  int price_picks = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto h = estimate_gradient(sys.market, x, rec, 0.5, coin);
    const bool price = h.drawn == Coordinate::Price;
    price_picks += price;
    CHECK((price ? h.h_mu : h.h_p) == 0.0);
    CHECK((price ? h.h_p : h.h_mu) != 0.0);
  }
  CHECK(price_picks > 850);
  CHECK(price_picks < 1150);
}

TEST_CASE("coin-averaged estimator targets half the gradient per coordinate") {
  // No importance factor is applied to the drawn coordinate, so averaging
  // over coin outcomes approaches (grad_mu / 2, grad_p / 2); the step-size
  // scale absorbs the factor.
  const SystemModel sys = mm1_bench(0.1);
  const Policy x{10.0, 4.1};
  CycleRecord rec;
  rec.d_k = 2;
  rec.waits = {0.3, 0.3};  // steady congestion value: exact partials 1.8, 4.25
  rec.busy_ages = {0.0, 0.0};
  RandomStream coin(31459, 2);
  double sum_mu = 0.0, sum_p = 0.0;
  constexpr int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto h = estimate_gradient(sys.market, x, rec, 0.5, coin);
    sum_mu += h.h_mu;
    sum_p += h.h_p;
  }
  CHECK(sum_mu / n == doctest::Approx(0.5 * 1.8).epsilon(0.03));
  CHECK(sum_p / n == doctest::Approx(0.5 * 4.25).epsilon(0.03));
}

TEST_CASE("bias decays with the cycle length under a stationary start") {
  const SystemModel sys = mm1_bench(0.1);
  const Policy x{10.0, 4.1};  // rho = 0.5
  const auto s = mm1_steady(5.0, 10.0);
  const auto exact = steady_partials_oracle(sys.market, x, s.mean_wait, s.mean_busy_age);

  auto relative_error = [&](int d, std::uint64_t rep) {
    RunStreams streams = RunStreams::make(424242, rep);
    const CycleState warm = warm_start(sys, x, 50000, streams);
    const auto rec = run_cycle(sys, x, d, warm, streams.arrivals, streams.services);
    const auto h = estimate_gradient_coordinate(sys.market, x, rec, 0.5,
                                                Coordinate::Mu);
    return std::abs(h.h_mu - exact[0]) / std::abs(exact[0]);
  };

  // Averaged over a few replications the error shrinks as d grows.
  double err_short = 0.0, err_long = 0.0;
  for (std::uint64_t r = 0; r < 8; ++r) {
    err_short += relative_error(300, r);
    err_long += relative_error(100000, r);
  }
  err_short /= 8;
  err_long /= 8;
  CHECK(err_long < err_short);
  CHECK(err_long <= 0.02);
}

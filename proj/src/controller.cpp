#include "qopt/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qopt {

void Schedule::validate() const {
  if (!(d0 >= 1.0)) throw std::invalid_argument("schedule: d0 must be >= 1");
  if (!(d_log >= 0.0)) throw std::invalid_argument("schedule: d_log must be >= 0");
  if (!(eta0 > 0.0)) throw std::invalid_argument("schedule: eta0 must be > 0");
  if (!(xi > 0.0 && xi < 1.0))
    throw std::invalid_argument("schedule: xi must be in (0,1)");
  if (cycles < 1) throw std::invalid_argument("schedule: cycles must be >= 1");
}

int cycle_length(const Schedule& s, int k) {
  return static_cast<int>(std::ceil(s.d0 + s.d_log * std::log(static_cast<double>(k))));
}

double step_size(const Schedule& s, int k) {
  return s.eta0 / std::pow(static_cast<double>(k), s.eta_exponent);
}

Policy Trajectory::window_average(int lo, int hi) const {
  const int n = static_cast<int>(points.size());
  lo = std::max(lo, 1);
  hi = std::min(hi, n);
  if (lo > hi) throw std::invalid_argument("empty trajectory window");
  double mu = 0.0, p = 0.0;
  for (int k = lo; k <= hi; ++k) {
    mu += points[k - 1].policy.mu;
    p += points[k - 1].policy.p;
  }
  const double m = hi - lo + 1;
  return Policy{mu / m, p / m};
}

RunStreams RunStreams::make(std::uint64_t seed, std::uint64_t replication) {
  return RunStreams{make_stream(seed, replication, StreamPurpose::Arrivals),
                    make_stream(seed, replication, StreamPurpose::Services),
                    make_stream(seed, replication, StreamPurpose::CoordinateCoin)};
}

CycleState warm_start(const SystemModel& sys, const Policy& x, long long customers,
                      RunStreams& streams) {
  CycleState state = make_initial_state(sys, x, streams.arrivals);
  constexpr int kChunk = 1 << 16;  // bound the per-call record size
  while (customers > 0) {
    const int d = static_cast<int>(std::min<long long>(customers, kChunk));
    state = run_cycle(sys, x, d, state, streams.arrivals, streams.services)
                .next_state;
    customers -= d;
  }
  return state;
}

Trajectory run(const SystemModel& sys, const Schedule& schedule, Policy initial,
               FreezeMode mode, RunStreams& streams, const CycleState* warm_state,
               const CycleObserver& observer) {
  schedule.validate();
  const FeasibleBox& box = sys.market.box;
  Policy x = project(box, initial);
  CycleState state = warm_state
                         ? *warm_state
                         : make_initial_state(sys, x, streams.arrivals);

  Trajectory traj;
  traj.points.reserve(schedule.cycles);
  long long served = 0;

  for (int k = 1; k <= schedule.cycles; ++k) {
    const int d_k = cycle_length(schedule, k);
    CycleRecord rec =
        run_cycle(sys, x, d_k, state, streams.arrivals, streams.services);
    if (observer) observer(k, rec);

    GradientEstimate h;
    switch (mode) {
      case FreezeMode::None:
        h = estimate_gradient(sys.market, x, rec, schedule.xi, streams.coin);
        break;
      case FreezeMode::Mu:  // mu frozen, price live
        h = estimate_gradient_coordinate(sys.market, x, rec, schedule.xi,
                                         Coordinate::Price);
        break;
      case FreezeMode::Price:  // price frozen, mu live
        h = estimate_gradient_coordinate(sys.market, x, rec, schedule.xi,
                                         Coordinate::Mu);
        break;
    }

    served += d_k;
    traj.points.push_back(CyclePoint{k, x, h.h_mu, h.h_p, d_k, rec.t_k, rec.cost,
                                     served, h.tail_mean});

    const double eta = step_size(schedule, k);
    Policy next{x.mu - eta * h.h_mu, x.p - eta * h.h_p};
    if (!std::isfinite(next.mu) || !std::isfinite(next.p))
      throw std::runtime_error("policy update diverged to a non-finite value");
    next = project(box, next);
    if (mode == FreezeMode::Mu) next.mu = x.mu;
    if (mode == FreezeMode::Price) next.p = x.p;
    x = next;
    state = std::move(rec.next_state);
  }

  traj.final_policy = x;
  return traj;
}

Trajectory run(const SystemModel& sys, const Schedule& schedule, Policy initial,
               FreezeMode mode, std::uint64_t seed, std::uint64_t replication) {
  RunStreams streams = RunStreams::make(seed, replication);
  return run(sys, schedule, initial, mode, streams);
}

}  // namespace qopt

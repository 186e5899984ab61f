#include "qopt/queue_engine.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qopt {

LeftoverScan leftover_scan(double w0, double rate_for_fresh,
                           const UnitVariateSpec& arrival, RandomStream& arrivals,
                           std::vector<double> pending) {
  if (w0 < 0.0) throw std::invalid_argument("leftover_scan: w0 must be >= 0");
  if (!(rate_for_fresh > 0.0))
    throw std::invalid_argument("leftover_scan: rate must be > 0");

  LeftoverScan scan;
  scan.interarrivals = std::move(pending);
  double clock = 0.0;
  std::size_t i = 0;
  while (true) {
    if (i == scan.interarrivals.size())
      scan.interarrivals.push_back(draw(arrival, arrivals) / rate_for_fresh);
    clock += scan.interarrivals[i++];
    if (clock > w0) break;
    ++scan.count;
  }
  // Draws beyond the overshoot (possible when pending was long) stay queued.
  return scan;
}

int leftover_count(double w0, double rate_prev, const UnitVariateSpec& arrival,
                   RandomStream& arrivals) {
  return leftover_scan(w0, rate_prev, arrival, arrivals).count;
}

CycleState make_initial_state(const SystemModel& sys, const Policy& first_policy,
                              RandomStream& arrivals) {
  const double lam = sys.market.lambda(first_policy.p);
  if (!(lam > 0.0))
    throw std::domain_error("initial policy has zero arrival rate");
  CycleState state;
  state.prev_policy = first_policy;
  state.prev_price_rate = lam;
  auto scan = leftover_scan(0.0, lam, sys.arrival, arrivals);
  state.q_carry = scan.count;  // = 1: only the customer entering service
  state.pending_interarrivals = std::move(scan.interarrivals);
  return state;
}

CycleRecord run_cycle(const SystemModel& sys, const Policy& policy, int d_k,
                      const CycleState& in, RandomStream& arrivals,
                      RandomStream& services) {
  if (d_k < 1) throw std::invalid_argument("run_cycle: d_k must be >= 1");
  if (in.w0 < 0.0 || in.x0 < 0.0 || in.q_carry < 1)
    throw std::invalid_argument("run_cycle: invalid carried state");
  const double lam_new = sys.market.lambda(policy.p);
  if (!(lam_new > 0.0))
    throw std::domain_error("run_cycle: arrival rate is zero, cycle cannot complete");
  const double lam_old = in.prev_price_rate > 0.0 ? in.prev_price_rate : lam_new;
  const double mu = policy.mu;
  const int q = in.q_carry;

  CycleRecord rec;
  rec.d_k = d_k;
  rec.q_k = q;
  rec.policy = policy;
  rec.prev_price = in.prev_policy.p;
  rec.waits.resize(d_k);
  rec.busy_ages.resize(d_k);
  rec.services.resize(d_k);
  rec.interarrivals.resize(d_k);

  // V_1 is the service of the customer already on the server; it was drawn
  // by the previous cycle's cost charge when there is one.
  double v_next = in.pending_service_unit > 0.0 ? in.pending_service_unit
                                                : draw(sys.service, services);
  double w = in.w0;
  double x = in.x0;
  double sum_tau = 0.0;
  double holding = 0.0;
  double fees = 0.0;
  std::size_t pi = 0;

  for (int n = 1; n <= d_k; ++n) {
    double tau;
    if (pi < in.pending_interarrivals.size()) {
      tau = in.pending_interarrivals[pi++];
    } else {
      tau = draw(sys.arrival, arrivals) / (n <= q ? lam_old : lam_new);
    }
    const double s_entering = v_next / mu;  // service of customer n-1
    w = w + s_entering - tau;
    if (w <= 0.0) {
      w = 0.0;
      x = 0.0;
    } else {
      x += tau;
    }
    v_next = draw(sys.service, services);  // V_{n+1}: customer n's own service
    const double s_n = v_next / mu;

    rec.interarrivals[n - 1] = tau;
    rec.waits[n - 1] = w;
    rec.busy_ages[n - 1] = x;
    rec.services[n - 1] = s_n;

    sum_tau += tau;
    holding += w + s_n;
    fees += n <= q ? in.prev_policy.p : policy.p;
  }

  // Service start of customer d_k: its arrival epoch (relative to the cycle
  // start, the boundary customer entered service at -w0 + sum of taus) plus
  // its wait.
  rec.t_k = sum_tau - in.w0 + w;
  rec.cost = sys.market.h0 * holding - fees + sys.market.cost_at(mu) * rec.t_k;

  CycleState next;
  next.w0 = w;
  next.x0 = x;
  next.prev_policy = policy;
  next.prev_price_rate = lam_new;
  next.pending_service_unit = v_next;
  std::vector<double> remaining(in.pending_interarrivals.begin() + pi,
                                in.pending_interarrivals.end());
  auto scan = leftover_scan(w, lam_new, sys.arrival, arrivals, std::move(remaining));
  next.q_carry = scan.count;
  next.pending_interarrivals = std::move(scan.interarrivals);
  rec.next_state = std::move(next);
  return rec;
}

}  // namespace qopt

#pragma once

// One operational cycle of the controlled GI/GI/1 queue: leftover customers
// carried at the old rate/price, new arrivals at the new rate/price, Lindley
// waiting times, observed busy ages, the cycle clock, and the realized cost.

#include <vector>

#include "qopt/distributions.hpp"
#include "qopt/market_model.hpp"

namespace qopt {

// Everything the simulator needs: economics plus the unit-variate families
// for interarrival (U_n) and service (V_n) times.
struct SystemModel {
  MarketModel market;
  UnitVariateSpec arrival;
  UnitVariateSpec service;
};

// State carried across a cycle boundary. A cycle ends the moment its last
// customer enters service; that customer is still being served when the
// next cycle starts, so the state holds its waiting time, the busy age it
// observed, and the customers already in queue behind it.
struct CycleState {
  double w0 = 0.0;              // waiting time of the customer entering service
  double x0 = 0.0;              // busy age it observed on arrival
  int q_carry = 1;              // leftovers, including the one in service
  Policy prev_policy{};
  double prev_price_rate = 0.0;  // lambda(p_{k-1})

  // Interarrival times already drawn by the leftover scan; they are the
  // first interarrivals of the next cycle (no variate is discarded).
  std::vector<double> pending_interarrivals;
  // Unit service variate drawn for the boundary customer's cost charge;
  // becomes V_1 of the next cycle. 0 means draw fresh.
  double pending_service_unit = 0.0;
};

struct CycleRecord {
  std::vector<double> waits;          // W_n, n = 1..d_k
  std::vector<double> busy_ages;      // X_n
  std::vector<double> services;       // S_n, the service customer n receives
  std::vector<double> interarrivals;  // tau_n
  int q_k = 1;       // leftover count used this cycle
  double t_k = 0.0;  // cycle clock time (service start of customer d_k)
  int d_k = 0;       // customers entering service
  double cost = 0.0;
  Policy policy{};          // decision in force
  double prev_price = 0.0;  // price paid by the first q_k customers
  CycleState next_state;
};

struct LeftoverScan {
  int count = 1;                       // 1 + arrivals inside the window
  std::vector<double> interarrivals;   // every draw made, in order
};

// Arrivals landing inside the waiting window [0, w0] plus the customer in
// service. Pending times (already scaled) are consumed first; fresh draws
// are scaled by rate_for_fresh. The final draw overshoots the window and is
// retained as the following interarrival.
LeftoverScan leftover_scan(double w0, double rate_for_fresh,
                           const UnitVariateSpec& arrival, RandomStream& arrivals,
                           std::vector<double> pending = {});

// Count-only form.
int leftover_count(double w0, double rate_prev, const UnitVariateSpec& arrival,
                   RandomStream& arrivals);

// From-empty state for the first cycle.
CycleState make_initial_state(const SystemModel& sys, const Policy& first_policy,
                              RandomStream& arrivals);

// Runs one cycle under policy_k for d_k service entries. Interarrivals use
// the previous rate for customers 1..q_k and the new rate afterwards; the
// first q_k customers pay the previous price. Throws std::domain_error when
// lambda(p) is zero (the cycle could never complete) and
// std::invalid_argument on d_k < 1.
CycleRecord run_cycle(const SystemModel& sys, const Policy& policy, int d_k,
                      const CycleState& state_in, RandomStream& arrivals,
                      RandomStream& services);

}  // namespace qopt

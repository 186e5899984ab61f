#pragma once

// Randomized one-coordinate gradient estimator: a coin picks the price or
// the service-rate partial, and the chosen partial derivative is evaluated
// by plugging the cycle's tail average of (X_n + W_n) into the steady-state
// derivative expressions.

#include <array>

#include "qopt/queue_engine.hpp"

namespace qopt {

enum class Coordinate { Mu, Price };

struct GradientEstimate {
  double h_mu = 0.0;  // exactly one of the two components is nonzero
  double h_p = 0.0;
  Coordinate drawn = Coordinate::Price;
  double tail_mean = 0.0;  // tail average of X_n + W_n
  int tail_window = 0;
};

// Average of (X_n + W_n) over the tail indices n > floor(xi * d_k),
// normalized by the actual window length. Throws when the window is empty.
double tail_statistic(const CycleRecord& record, double xi, int* window = nullptr);

// Coin-flipped estimator; the coin draws from its own stream so arrival and
// service variates stay aligned across algorithm variants.
GradientEstimate estimate_gradient(const MarketModel& model, const Policy& x,
                                   const CycleRecord& record, double xi,
                                   RandomStream& coin);

// Fixed-coordinate form (frozen modes, diagnostics).
GradientEstimate estimate_gradient_coordinate(const MarketModel& model,
                                              const Policy& x,
                                              const CycleRecord& record, double xi,
                                              Coordinate which);

// Noiseless target the estimator approaches: the (d/dmu, d/dp) partials of
// the steady-state cost rate evaluated at the supplied steady means.
std::array<double, 2> steady_partials_oracle(const MarketModel& model,
                                             const Policy& x, double mean_wait,
                                             double mean_busy_age);

}  // namespace qopt

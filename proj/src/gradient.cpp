#include "qopt/gradient.hpp"

#include <cmath>
#include <stdexcept>

namespace qopt {
namespace {

double price_partial(const MarketModel& m, const Policy& x, double congestion) {
  const double lam = m.lambda(x.p);
  const double slope = m.lambda_slope(x.p);
  return -lam - x.p * slope + m.h0 * slope * congestion;
}

double mu_partial(const MarketModel& m, const Policy& x, double congestion) {
  const double lam = m.lambda(x.p);
  return m.cost_marginal(x.mu) - m.h0 * (lam / x.mu) * congestion;
}

}  // namespace

double tail_statistic(const CycleRecord& record, double xi, int* window) {
  if (!(xi > 0.0 && xi < 1.0))
    throw std::invalid_argument("burn-in fraction xi must be in (0,1)");
  const int d = record.d_k;
  const int start = static_cast<int>(std::floor(xi * d)) + 1;  // 1-based
  const int len = d - start + 1;
  if (len <= 0)
    throw std::invalid_argument("empty tail window: d_k too small for xi");
  double sum = 0.0;
  for (int n = start; n <= d; ++n)
    sum += record.busy_ages[n - 1] + record.waits[n - 1];
  if (window) *window = len;
  return sum / len;
}

GradientEstimate estimate_gradient(const MarketModel& model, const Policy& x,
                                   const CycleRecord& record, double xi,
                                   RandomStream& coin) {
  const Coordinate which =
      coin.uniform01() < 0.5 ? Coordinate::Price : Coordinate::Mu;
  return estimate_gradient_coordinate(model, x, record, xi, which);
}

GradientEstimate estimate_gradient_coordinate(const MarketModel& model,
                                              const Policy& x,
                                              const CycleRecord& record, double xi,
                                              Coordinate which) {
  GradientEstimate est;
  est.drawn = which;
  est.tail_mean = tail_statistic(record, xi, &est.tail_window);
  const double congestion = est.tail_mean + 1.0 / x.mu;
  if (which == Coordinate::Price) {
    est.h_p = price_partial(model, x, congestion);
  } else {
    est.h_mu = mu_partial(model, x, congestion);
  }
  return est;
}

std::array<double, 2> steady_partials_oracle(const MarketModel& model,
                                             const Policy& x, double mean_wait,
                                             double mean_busy_age) {
  if (mean_wait < 0.0 || mean_busy_age < 0.0)
    throw std::invalid_argument("steady means must be >= 0");
  const double congestion = mean_wait + mean_busy_age + 1.0 / x.mu;
  return {mu_partial(model, x, congestion), price_partial(model, x, congestion)};
}

}  // namespace qopt

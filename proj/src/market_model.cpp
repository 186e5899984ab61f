#include "qopt/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qopt {

LogisticDemand::LogisticDemand(double m0, double a) : m0_(m0), a_(a) {
  if (!(m0 > 0.0)) throw std::invalid_argument("logistic demand needs M0 > 0");
}

double LogisticDemand::rate(double p) const { return logistic_demand(p, m0_, a_); }

double LogisticDemand::slope(double p) const { return logistic_demand_slope(p, m0_, a_); }

FixedDemand::FixedDemand(double rate) : rate_(rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("fixed demand rate must be > 0");
}

QuadraticCost::QuadraticCost(double c0) : c0_(c0) {
  if (!(c0 > 0.0)) throw std::invalid_argument("quadratic cost needs c0 > 0");
}

LinearCost::LinearCost(double c0) : c0_(c0) {
  if (!(c0 > 0.0)) throw std::invalid_argument("linear cost needs c0 > 0");
}

double logistic_demand(double p, double m0, double a) {
  // m0 * exp(a-p) / (1 + exp(a-p)), evaluated stably on both tails.
  const double t = a - p;
  if (t > 0) return m0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return m0 * e / (1.0 + e);
}

double logistic_demand_slope(double p, double m0, double a) {
  const double s = logistic_demand(p, 1.0, a);
  return -m0 * s * (1.0 - s);
}

double quadratic_cost(double mu, double c0) { return c0 * mu * mu; }

double quadratic_cost_marginal(double mu, double c0) { return 2.0 * c0 * mu; }

Policy project(const FeasibleBox& box, const Policy& raw) {
  return Policy{std::clamp(raw.mu, box.mu_lo, box.mu_hi),
                std::clamp(raw.p, box.p_lo, box.p_hi)};
}

double objective_via_waiting(const MarketModel& model, const Policy& x,
                             double mean_wait) {
  return objective_via_waiting(model, x, mean_wait, 1.0 / x.mu);
}

double objective_via_waiting(const MarketModel& model, const Policy& x,
                             double mean_wait, double mean_service) {
  const double lam = model.lambda(x.p);
  return model.h0 * lam * (mean_wait + mean_service) + model.cost_at(x.mu) -
         x.p * lam;
}

std::vector<std::string> validate_market(const MarketModel& model) {
  const FeasibleBox& b = model.box;
  if (!(b.mu_lo > 0.0) || !(b.mu_lo < b.mu_hi))
    throw std::invalid_argument("box needs 0 < mu_lo < mu_hi");
  if (!(b.p_lo > 0.0) || !(b.p_lo < b.p_hi))
    throw std::invalid_argument("box needs 0 < p_lo < p_hi");
  if (!(model.h0 >= 0.0)) throw std::invalid_argument("holding cost h0 must be >= 0");
  if (!model.demand || !model.cost)
    throw std::invalid_argument("model needs demand and cost curves");

  // Monotonicity on a grid: demand non-increasing, cost non-decreasing.
  constexpr int kGrid = 64;
  constexpr double kSlack = 1e-9;
  double prev = model.lambda(b.p_lo);
  for (int i = 1; i <= kGrid; ++i) {
    const double p = b.p_lo + (b.p_hi - b.p_lo) * i / kGrid;
    const double lam = model.lambda(p);
    if (lam > prev + kSlack)
      throw std::invalid_argument("demand must be non-increasing in price");
    prev = lam;
  }
  prev = model.cost_at(b.mu_lo);
  for (int i = 1; i <= kGrid; ++i) {
    const double mu = b.mu_lo + (b.mu_hi - b.mu_lo) * i / kGrid;
    const double c = model.cost_at(mu);
    if (c < prev - kSlack)
      throw std::invalid_argument("staffing cost must be non-decreasing in mu");
    prev = c;
  }

  std::vector<std::string> warnings;
  if (model.lambda(b.p_lo) >= b.mu_lo) {
    warnings.push_back(
        "uniform stability violated: lambda(p_lo) >= mu_lo; some feasible "
        "policies are unstable (the controller may still recover)");
  }
  return warnings;
}

}  // namespace qopt

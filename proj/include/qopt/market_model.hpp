#pragma once

// Economic side of the problem: demand curve lambda(p), staffing cost c(mu),
// holding cost rate h0, the feasible decision box and its projection, and
// the steady-state objective assembled from a mean waiting time.

#include <memory>
#include <string>
#include <vector>

namespace qopt {

// The decision pair: service rate and price.
struct Policy {
  double mu = 1.0;
  double p = 1.0;
};

struct FeasibleBox {
  double mu_lo = 0.0;
  double mu_hi = 0.0;
  double p_lo = 0.0;
  double p_hi = 0.0;

  bool contains(const Policy& x) const {
    return x.mu >= mu_lo && x.mu <= mu_hi && x.p >= p_lo && x.p <= p_hi;
  }
};

// Demand curves supply their own derivative; the gradient estimator
// consumes lambda'(p) directly.
class DemandCurve {
 public:
  virtual ~DemandCurve() = default;
  virtual double rate(double p) const = 0;
  virtual double slope(double p) const = 0;
};

class LogisticDemand final : public DemandCurve {
 public:
  LogisticDemand(double m0, double a);
  double rate(double p) const override;
  double slope(double p) const override;
  double m0() const { return m0_; }
  double a() const { return a_; }

 private:
  double m0_;
  double a_;
};

// Exogenous arrivals (online staffing problem): constant rate, zero slope.
class FixedDemand final : public DemandCurve {
 public:
  explicit FixedDemand(double rate);
  double rate(double) const override { return rate_; }
  double slope(double) const override { return 0.0; }

 private:
  double rate_;
};

class CostCurve {
 public:
  virtual ~CostCurve() = default;
  virtual double at(double mu) const = 0;
  virtual double marginal(double mu) const = 0;
};

class QuadraticCost final : public CostCurve {
 public:
  explicit QuadraticCost(double c0);
  double at(double mu) const override { return c0_ * mu * mu; }
  double marginal(double mu) const override { return 2.0 * c0_ * mu; }

 private:
  double c0_;
};

class LinearCost final : public CostCurve {
 public:
  explicit LinearCost(double c0);
  double at(double mu) const override { return c0_ * mu; }
  double marginal(double) const override { return c0_; }

 private:
  double c0_;
};

class ZeroCost final : public CostCurve {
 public:
  double at(double) const override { return 0.0; }
  double marginal(double) const override { return 0.0; }
};

// Immutable after construction; freely shared across threads.
struct MarketModel {
  std::shared_ptr<const DemandCurve> demand;
  std::shared_ptr<const CostCurve> cost;
  double h0 = 1.0;
  FeasibleBox box;

  double lambda(double p) const { return demand->rate(p); }
  double lambda_slope(double p) const { return demand->slope(p); }
  double cost_at(double mu) const { return cost->at(mu); }
  double cost_marginal(double mu) const { return cost->marginal(mu); }
};

double logistic_demand(double p, double m0, double a);
double logistic_demand_slope(double p, double m0, double a);
double quadratic_cost(double mu, double c0);
double quadratic_cost_marginal(double mu, double c0);

// Componentwise clamp into the box; idempotent and nonexpansive.
Policy project(const FeasibleBox& box, const Policy& raw);

// Steady-state cost rate via waiting times:
//   h0 * lambda(p) * (mean_wait + mean_service) + c(mu) - p * lambda(p)
// with mean_service defaulting to 1/mu.
double objective_via_waiting(const MarketModel& model, const Policy& x,
                             double mean_wait);
double objective_via_waiting(const MarketModel& model, const Policy& x,
                             double mean_wait, double mean_service);

// Config-time checks. Monotonicity violations (demand increasing, cost
// decreasing) throw; a uniform-stability violation lambda(p_lo) >= mu_lo is
// returned as a warning and the model is still usable.
std::vector<std::string> validate_market(const MarketModel& model);

}  // namespace qopt

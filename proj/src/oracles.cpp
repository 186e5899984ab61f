#include "qopt/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace qopt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_stable(double lambda, double mu) {
  if (!(lambda > 0.0) || !(mu > 0.0))
    throw std::domain_error("steady state needs lambda, mu > 0");
  if (lambda >= mu)
    throw std::domain_error("steady state undefined: rho >= 1");
}

}  // namespace

SteadyStateSummary mm1_steady(double lambda, double mu) {
  require_stable(lambda, mu);
  SteadyStateSummary s;
  s.rho = lambda / mu;
  s.mean_wait = lambda / (mu * (mu - lambda));
  // Busy age via the derivative identity E[X] = -mu * dE[W]/dmu - E[W],
  // which collapses to E[W] / (1 - rho).
  s.mean_busy_age = lambda / ((mu - lambda) * (mu - lambda));
  s.mean_queue_system = s.rho / (1.0 - s.rho);
  return s;
}

SteadyStateSummary mg1_steady(double lambda, double mu, double scv_service) {
  require_stable(lambda, mu);
  if (scv_service < 0.0) throw std::invalid_argument("scv must be >= 0");
  SteadyStateSummary s;
  s.rho = lambda / mu;
  // Pollaczek-Khinchine mean wait.
  s.mean_wait = lambda * (1.0 + scv_service) / (2.0 * mu * mu * (1.0 - s.rho));
  s.mean_busy_age = s.mean_wait / (1.0 - s.rho);
  s.mean_queue_system = lambda * s.mean_wait + s.rho;
  return s;
}

double analytic_objective(const MarketModel& model, const Policy& x,
                          const SteadyFn& steady) {
  const double lam = model.lambda(x.p);
  if (lam <= 0.0) return model.cost_at(x.mu);
  return objective_via_waiting(model, x, steady(lam, x.mu).mean_wait);
}

namespace {

// Objective with infeasible/unstable points mapped to +inf.
double safe_objective(const MarketModel& model, const SteadyFn& steady,
                      const Policy& x) {
  if (!model.box.contains(x)) return kInf;
  const double lam = model.lambda(x.p);
  if (lam >= x.mu) return kInf;
  try {
    return analytic_objective(model, x, steady);
  } catch (const std::domain_error&) {
    return kInf;
  }
}

// Nelder-Mead on the (mu, p) plane; good enough for a smooth objective that
// only needs refinement from the best grid cell.
Policy nelder_mead(const MarketModel& model, const SteadyFn& steady, Policy start,
                   double scale_mu, double scale_p, double tol,
                   const FreezeSpec& freeze) {
  struct Vertex {
    Policy x;
    double f;
  };
  auto eval = [&](Policy x) {
    if (freeze.freeze_mu) x.mu = freeze.mu;
    if (freeze.freeze_p) x.p = freeze.p;
    return Vertex{x, safe_objective(model, steady, x)};
  };

  std::array<Vertex, 3> v = {eval(start),
                             eval({start.mu + scale_mu, start.p}),
                             eval({start.mu, start.p + scale_p})};
  for (int iter = 0; iter < 400; ++iter) {
    std::sort(v.begin(), v.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const double diam = std::max(
        std::abs(v[2].x.mu - v[0].x.mu) + std::abs(v[2].x.p - v[0].x.p),
        std::abs(v[1].x.mu - v[0].x.mu) + std::abs(v[1].x.p - v[0].x.p));
    if (diam < tol) break;

    const Policy centroid{0.5 * (v[0].x.mu + v[1].x.mu),
                          0.5 * (v[0].x.p + v[1].x.p)};
    auto blend = [&](double t) {
      return Policy{centroid.mu + t * (centroid.mu - v[2].x.mu),
                    centroid.p + t * (centroid.p - v[2].x.p)};
    };

    Vertex reflected = eval(blend(1.0));
    if (reflected.f < v[0].f) {
      Vertex expanded = eval(blend(2.0));
      v[2] = expanded.f < reflected.f ? expanded : reflected;
    } else if (reflected.f < v[1].f) {
      v[2] = reflected;
    } else {
      Vertex contracted = eval(blend(-0.5));
      if (contracted.f < v[2].f) {
        v[2] = contracted;
      } else {
        for (int i = 1; i < 3; ++i)
          v[i] = eval({0.5 * (v[i].x.mu + v[0].x.mu),
                       0.5 * (v[i].x.p + v[0].x.p)});
      }
    }
  }
  std::sort(v.begin(), v.end(),
            [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  return v[0].x;
}

}  // namespace

Optimum optimize_analytic(const MarketModel& model, const SteadyFn& steady,
                          int grid, double refine_tol, const FreezeSpec& freeze) {
  const FeasibleBox& b = model.box;
  if (grid < 2) throw std::invalid_argument("grid must be >= 2");

  const int grid_mu = freeze.freeze_mu ? 0 : grid;
  const int grid_p = freeze.freeze_p ? 0 : grid;

  Policy best{};
  double best_f = kInf;
  for (int i = 0; i <= grid_mu; ++i) {
    const double mu = freeze.freeze_mu
                          ? freeze.mu
                          : b.mu_lo + (b.mu_hi - b.mu_lo) * i / grid;
    for (int j = 0; j <= grid_p; ++j) {
      const double p =
          freeze.freeze_p ? freeze.p : b.p_lo + (b.p_hi - b.p_lo) * j / grid;
      const double f = safe_objective(model, steady, {mu, p});
      if (f < best_f) {
        best_f = f;
        best = {mu, p};
      }
    }
  }
  if (!std::isfinite(best_f))
    throw std::runtime_error("no stable policy inside the box");

  const double h_mu = freeze.freeze_mu ? 0.0 : (b.mu_hi - b.mu_lo) / grid;
  const double h_p = freeze.freeze_p ? 0.0 : (b.p_hi - b.p_lo) / grid;
  Policy refined = nelder_mead(model, steady, best, std::max(h_mu, 1e-4),
                               std::max(h_p, 1e-4), refine_tol, freeze);

  Optimum opt{refined, safe_objective(model, steady, refined)};
  const double rho = model.lambda(refined.p) / refined.mu;
  if (rho > 1.0 - 1e-3)
    throw std::runtime_error("analytic minimizer sits on the stability boundary");
  return opt;
}

std::array<double, 2> fd_gradient(const MarketModel& model, const SteadyFn& steady,
                                  const Policy& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd step must be > 0");
  auto f = [&](const Policy& y) { return analytic_objective(model, y, steady); };
  const double dmu = (f({x.mu + step, x.p}) - f({x.mu - step, x.p})) / (2.0 * step);
  const double dp = (f({x.mu, x.p + step}) - f({x.mu, x.p - step})) / (2.0 * step);
  return {dmu, dp};
}

SteadyStateSummary simulate_steady(const SystemModel& sys, const Policy& x,
                                   long long warmup, long long samples,
                                   RandomStream& arrivals, RandomStream& services) {
  if (warmup < 1 || samples < 1)
    throw std::invalid_argument("simulate_steady needs warmup, samples >= 1");
  const double lam = sys.market.lambda(x.p);
  if (!(lam > 0.0)) throw std::domain_error("zero arrival rate");
  const double mu = x.mu;

  double w = 0.0, age = 0.0;
  for (long long n = 0; n < warmup; ++n) {
    const double tau = draw(sys.arrival, arrivals) / lam;
    w += draw(sys.service, services) / mu - tau;
    if (w <= 0.0) {
      w = 0.0;
      age = 0.0;
    } else {
      age += tau;
    }
  }

  // Batch means give standard errors that respect the autocorrelation.
  const int batches = samples >= 1000 ? 50 : 1;
  const long long per_batch = samples / batches;
  std::vector<double> bw(batches, 0.0), bx(batches, 0.0);
  for (int b = 0; b < batches; ++b) {
    for (long long n = 0; n < per_batch; ++n) {
      const double tau = draw(sys.arrival, arrivals) / lam;
      w += draw(sys.service, services) / mu - tau;
      if (w <= 0.0) {
        w = 0.0;
        age = 0.0;
      } else {
        age += tau;
      }
      bw[b] += w;
      bx[b] += age;
    }
    bw[b] /= per_batch;
    bx[b] /= per_batch;
  }

  auto mean_se = [&](const std::vector<double>& v) {
    double m = 0.0;
    for (double y : v) m += y;
    m /= v.size();
    if (v.size() < 2) return std::pair<double, double>{m, 0.0};
    double ss = 0.0;
    for (double y : v) ss += (y - m) * (y - m);
    const double se = std::sqrt(ss / (v.size() - 1) / v.size());
    return std::pair<double, double>{m, se};
  };

  SteadyStateSummary s;
  s.rho = lam / mu;
  std::tie(s.mean_wait, s.se_wait) = mean_se(bw);
  std::tie(s.mean_busy_age, s.se_busy_age) = mean_se(bx);
  s.mean_queue_system = lam * s.mean_wait + s.rho;
  return s;
}

}  // namespace qopt

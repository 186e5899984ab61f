#include "qopt/config.hpp"

#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace qopt {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

double need_num(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) fail(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

UnitVariateSpec parse_variates(const json& j, const std::string& where) {
  const std::string fam = need(j, "family", where).get<std::string>();
  try {
    const Family family = family_from_name(fam);
    switch (family) {
      case Family::Exponential:
        return make_spec(family, j.value("scv", 1.0));
      case Family::Deterministic:
        return make_spec(family, j.value("scv", 0.0));
      case Family::Erlang: {
        const int phases = j.value("phases", 0);
        const double scv = j.value("scv", phases > 0 ? 1.0 / phases : 0.0);
        return make_spec(family, scv, phases);
      }
      default:
        return make_spec(family, need_num(j, "scv", where));
    }
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

std::shared_ptr<const DemandCurve> parse_demand(const json& j,
                                                const std::string& where) {
  const std::string fam = need(j, "family", where).get<std::string>();
  try {
    if (fam == "logistic")
      return std::make_shared<LogisticDemand>(need_num(j, "M0", where),
                                              need_num(j, "a", where));
    if (fam == "fixed")
      return std::make_shared<FixedDemand>(need_num(j, "rate", where));
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  fail(where, "demand family must be 'logistic' or 'fixed'");
}

std::shared_ptr<const CostCurve> parse_cost(const json& j,
                                            const std::string& where) {
  const std::string fam = j.value("family", "quadratic");
  try {
    if (fam == "none") return std::make_shared<ZeroCost>();
    if (fam == "quadratic")
      return std::make_shared<QuadraticCost>(need_num(j, "c0", where));
    if (fam == "linear")
      return std::make_shared<LinearCost>(need_num(j, "c0", where));
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  fail(where, "cost family must be 'quadratic', 'linear' or 'none'");
}

Schedule parse_schedule(const json& j, const std::string& where) {
  Schedule s;
  s.d0 = need_num(j, "d0", where);
  s.d_log = need_num(j, "d_log", where);
  s.eta0 = need_num(j, "eta0", where);
  s.xi = j.value("xi", 0.5);
  s.cycles = static_cast<int>(need_num(j, "cycles", where));
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return s;
}

FreezeMode parse_mode(const json& root) {
  if (!root.contains("mode")) return FreezeMode::None;
  const std::string f = root["mode"].value("freeze", "none");
  if (f == "none" || f == "joint") return FreezeMode::None;
  if (f == "price" || f == "p") return FreezeMode::Price;
  if (f == "mu") return FreezeMode::Mu;
  fail("mode.freeze", "must be 'none', 'price' or 'mu'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("config", e.what());
  }

  ExperimentConfig cfg;

  const json& model = need(root, "model", "config");
  cfg.system.market.demand = parse_demand(need(model, "demand", "model"), "model.demand");
  cfg.system.market.cost = parse_cost(model.value("cost", json{{"family", "none"}}),
                                      "model.cost");
  cfg.system.market.h0 = need_num(model, "h0", "model");
  const json& box = need(model, "box", "model");
  cfg.system.market.box =
      FeasibleBox{need_num(box, "mu_lo", "model.box"), need_num(box, "mu_hi", "model.box"),
                  need_num(box, "p_lo", "model.box"), need_num(box, "p_hi", "model.box")};

  const json& dists = need(root, "distributions", "config");
  cfg.system.arrival = parse_variates(need(dists, "arrival", "distributions"),
                                      "distributions.arrival");
  cfg.system.service = parse_variates(need(dists, "service", "distributions"),
                                      "distributions.service");

  cfg.schedule = parse_schedule(need(root, "schedule", "config"), "schedule");
  cfg.mode = parse_mode(root);

  const json& initial = need(root, "initial", "config");
  cfg.initial = Policy{need_num(initial, "mu", "initial"), need_num(initial, "p", "initial")};

  if (root.contains("run")) {
    const json& run = root["run"];
    cfg.run.replications = run.value("replications", 1);
    cfg.run.seed = run.value("seed", std::uint64_t{1});
    cfg.run.threads = run.value("threads", 0);
    if (run.contains("window")) {
      const json& w = run["window"];
      if (!w.is_array() || w.size() != 2) fail("run.window", "must be [lo, hi]");
      cfg.run.window_lo = w[0].get<int>();
      cfg.run.window_hi = w[1].get<int>();
    }
    cfg.warm_start_customers = run.value("warm_start_customers", 0LL);
    if (cfg.run.replications < 1) fail("run.replications", "must be >= 1");
  }

  if (root.contains("output")) cfg.trace = root["output"].value("trace", false);

  if (root.contains("optimum")) {
    const json& o = root["optimum"];
    cfg.pinned_optimum = Optimum{
        Policy{need_num(o, "mu", "optimum"), need_num(o, "p", "optimum")},
        need_num(o, "value", "optimum")};
  }

  if (root.contains("sweep")) {
    const json& sw = root["sweep"];
    SweepBlock block;
    block.replications = sw.value("replications", 3);
    if (sw.contains("window")) {
      block.window_lo = sw["window"][0].get<int>();
      block.window_hi = sw["window"][1].get<int>();
    }
    if (sw.contains("cases")) {
      for (const json& c : sw["cases"]) {
        SweepCase sc = make_sweep_case(need_num(c, "n", "sweep.cases"));
        if (c.contains("eta0")) sc.schedule.eta0 = c["eta0"].get<double>();
        if (c.contains("d0")) sc.schedule.d0 = c["d0"].get<double>();
        if (c.contains("d_log")) sc.schedule.d_log = c["d_log"].get<double>();
        if (c.contains("cycles")) sc.schedule.cycles = c["cycles"].get<int>();
        if (c.contains("mu_init")) sc.initial.mu = c["mu_init"].get<double>();
        if (c.contains("p_init")) sc.initial.p = c["p_init"].get<double>();
        block.cases.push_back(sc);
      }
    } else if (sw.contains("scales")) {
      for (const json& n : sw["scales"])
        block.cases.push_back(make_sweep_case(n.get<double>()));
    } else {
      fail("sweep", "needs 'cases' or 'scales'");
    }
    cfg.sweep = std::move(block);
  }

  // Module-level invariants, checked before any simulation starts.
  try {
    cfg.warnings = validate_market(cfg.system.market);
  } catch (const std::invalid_argument& e) {
    fail("model", e.what());
  }
  if (!cfg.system.arrival.light_tailed())
    cfg.warnings.push_back(
        "lognormal interarrival times violate the light-tail assumption "
        "(finite moment generating function); proceeding anyway");
  if (!cfg.system.service.light_tailed())
    cfg.warnings.push_back(
        "lognormal service times violate the light-tail assumption "
        "(finite moment generating function); proceeding anyway");
  if (!cfg.system.market.box.contains(project(cfg.system.market.box, cfg.initial)))
    fail("initial", "policy cannot be projected into the box");

  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::optional<SteadyFn> ExperimentConfig::oracle() const {
  if (system.arrival.family != Family::Exponential) return std::nullopt;
  const double scv = system.service.scv;
  return SteadyFn{[scv](double lambda, double mu) {
    return mg1_steady(lambda, mu, scv);
  }};
}

Optimum ExperimentConfig::resolve_optimum() const {
  if (pinned_optimum) return *pinned_optimum;
  auto fn = oracle();
  if (!fn)
    throw std::runtime_error(
        "no analytic oracle for the configured model (non-Poisson arrivals); "
        "supply a trusted 'optimum' block");
  FreezeSpec freeze;
  if (mode == FreezeMode::Mu) {
    freeze.freeze_mu = true;
    freeze.mu = initial.mu;
  } else if (mode == FreezeMode::Price) {
    freeze.freeze_p = true;
    freeze.p = initial.p;
  }
  return optimize_analytic(system.market, *fn, 200, 1e-6, freeze);
}

}  // namespace qopt

#include "opfbench/variants.hpp"

#include <cmath>
#include <fmt/format.h>

namespace opfbench {

namespace {

constexpr double base_angle_deg = 30;

SolverOptions warm(SolverOptions opts, const VectorXd* x) {
  opts.warm_start.reset();
  if (x && x->size() > 0) {
    opts.warm_start = *x;
  }
  return opts;
}

}  // namespace

std::string to_string(VariantKind kind) { return kind == VariantKind::api ? "api" : "sad"; }

VariantKind parse_variant_kind(const std::string& text) {
  if (text == "api" || text == "API") {
    return VariantKind::api;
  }
  if (text == "sad" || text == "SAD") {
    return VariantKind::sad;
  }
  throw std::invalid_argument("unknown variant kind " + text);
}

std::string variant_name(const std::string& base, VariantKind kind) { return base + "__" + to_string(kind); }

NetworkCase scale_active_demand(NetworkCase net, double alpha) {
  for (auto& b : net.buses) {
    b.demand = {alpha * b.demand.real(), b.demand.imag()};
  }
  return net;
}

LoadabilityResult max_loadability(const NetworkCase& net, const SolverOptions& opts) {
  double pd = 0;
  for (const auto& b : net.buses) {
    pd += b.demand.real();
  }
  if (!(pd > 0)) {
    throw VariantError("total active demand is not positive; loadability is unbounded");
  }
  AcopfProblem prob(net, FlowLimitMode::apparent_power, true);
  SolveReport rep = solve(prob, opts);
  if (rep.status != SolveStatus::optimal) {
    throw VariantError("loadability solve ended with status " + to_string(rep.status));
  }
  return {rep.x[prob.alpha()], prob.point(rep.x)};
}

bool ac_feasible(const NetworkCase& net, const SolverOptions& opts, double threshold, double* violation,
                 VectorXd* witness) {
  AcopfProblem prob = build_acopf(net);
  SolverOptions o = opts;
  if (o.warm_start && o.warm_start->size() != prob.num_variables()) {
    o.warm_start.reset();
  }
  FeasibilityResult fr = feasibility_phase(prob, o);
  // The elastic program is nonconvex; a second start guards against a
  // spurious local minimum.
  if (fr.violation > threshold && o.warm_start) {
    o.warm_start.reset();
    FeasibilityResult cold = feasibility_phase(prob, o);
    if (cold.violation < fr.violation) {
      fr = std::move(cold);
    }
  }
  if (violation) {
    *violation = fr.violation;
  }
  if (witness) {
    *witness = fr.x;
  }
  return fr.violation <= threshold;
}

VariantResult generate_api(const NetworkCase& net, const VariantConfig& cfg) {
  if (!(cfg.feasibility_threshold > 0) || !(cfg.load_backoff >= 0 && cfg.load_backoff < 1)) {
    throw std::invalid_argument("API backoff must lie in [0, 1) and the threshold be positive");
  }
  VariantResult out;
  OperatingPoint dispatch;
  if (cfg.alpha) {
    out.alpha = out.alpha_max = *cfg.alpha;
    NetworkCase scaled = scale_active_demand(net, out.alpha);
    AcopfProblem prob = build_acopf(scaled);
    SolveReport rep = solve(prob, cfg.solver);
    if (rep.status != SolveStatus::optimal) {
      throw VariantError("scaled case solve ended with status " + to_string(rep.status));
    }
    dispatch = prob.point(rep.x);
    out.log.push_back(fmt::format("alpha fixed at {:.6f}", out.alpha));
  } else {
    LoadabilityResult lr = max_loadability(net, cfg.solver);
    out.alpha_max = lr.alpha;
    out.alpha = lr.alpha * (1 - cfg.load_backoff);
    dispatch = lr.point;
    out.log.push_back(fmt::format("max loadability alpha = {:.8f}, applied {:.8f}", out.alpha_max, out.alpha));
  }

  out.net = scale_active_demand(net, out.alpha);
  out.net.name = variant_name(net.name, VariantKind::api);
  const double base = net.base_mva;
  Rng rng(cfg.seed);
  for (size_t k = 0; k < out.net.gens.size(); ++k) {
    auto& g = out.net.gens[k];
    const double pg = dispatch.pg[static_cast<Index>(k)];
    if (!(g.p_max > 0) || pg < g.p_max - 1e-5 * std::max(1.0, g.p_max)) {
      continue;
    }
    FuelType fuel = classify_fuel(g.p_max * base, g.p_min * base, cfg.completion, rng);
    if (fuel == FuelType::SYNC) {
      continue;
    }
    double p_max = sample_active_capacity(fuel, pg * base, rng) / base;
    double c1 = sample_cost(fuel, rng, cfg.completion) * base;
    out.log.push_back(fmt::format("gen {} binding at {:.4f} MW: fuel {} p_max {:.4f} -> {:.4f} MW, c1 {:.4f} -> {:.4f} $/MWh",
                                  g.id, pg * base, to_string(fuel), g.p_max * base, p_max * base, g.c1 / base,
                                  c1 / base));
    g.p_max = p_max;
    g.c2 = 0;
    g.c1 = c1;
    g.c0 = 0;
  }
  validate(out.net);

  // The loading point is within the backoff of feasible for the scaled case.
  SolverOptions start = cfg.solver;
  start.warm_start = build_acopf(out.net).vector(dispatch);
  double viol = 0;
  if (!ac_feasible(out.net, start, cfg.feasibility_threshold, &viol)) {
    throw VariantError(fmt::format("API case is not AC-feasible (l1 violation {:.3e})", viol));
  }
  out.log.push_back(fmt::format("API case feasible, l1 violation {:.3e}", viol));
  return out;
}

VariantResult generate_sad(const NetworkCase& net, const VariantConfig& cfg) {
  if (!(cfg.angle_tolerance > 0) || !(cfg.feasibility_threshold > 0)) {
    throw std::invalid_argument("variant tolerances must be positive");
  }
  VariantResult out;
  double hi = deg2rad(base_angle_deg), lo = 0;
  VectorXd x_hi;
  double viol = 0;
  if (!ac_feasible(apply_angle_bounds(net, base_angle_deg), cfg.solver, cfg.feasibility_threshold, &viol, &x_hi)) {
    throw VariantError(fmt::format("base case infeasible at 30 degrees (l1 violation {:.3e})", viol));
  }
  out.violation_at_theta = viol;
  out.log.push_back(fmt::format("theta {:.6f} deg feasible, violation {:.3e}", base_angle_deg, viol));

  while (hi - lo > cfg.angle_tolerance) {
    double mid = 0.5 * (lo + hi);
    VectorXd x;
    bool ok = ac_feasible(apply_angle_bounds(net, rad2deg(mid)), warm(cfg.solver, &x_hi), cfg.feasibility_threshold,
                          &viol, &x);
    out.log.push_back(fmt::format("theta {:.6f} deg {}, violation {:.3e}", rad2deg(mid), ok ? "feasible" : "infeasible",
                                  viol));
    if (ok) {
      hi = mid;
      x_hi = x;
      out.violation_at_theta = viol;
    } else {
      lo = mid;
      out.violation_at_infeasible = viol;
    }
  }
  out.theta = hi;
  out.theta_infeasible = lo;
  out.net = apply_angle_bounds(net, rad2deg(hi));
  out.net.name = variant_name(net.name, VariantKind::sad);
  out.log.push_back(fmt::format("smallest feasible bound {:.6f} deg", rad2deg(hi)));
  return out;
}

VariantResult generate_variant(const NetworkCase& net, const VariantConfig& cfg) {
  return cfg.kind == VariantKind::api ? generate_api(net, cfg) : generate_sad(net, cfg);
}

}  // namespace opfbench

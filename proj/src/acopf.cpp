#include "opfbench/acopf.hpp"

#include <algorithm>
#include <cmath>

namespace opfbench {

FlowLimitMode parse_flow_limit_mode(const std::string& text) {
  if (text == "apparent" || text == "apparent_power") return FlowLimitMode::apparent_power;
  if (text == "current" || text == "current_magnitude") return FlowLimitMode::current_magnitude;
  if (text == "both") return FlowLimitMode::both;
  if (text == "none") return FlowLimitMode::none;
  throw std::invalid_argument("unknown flow limit mode '" + text + "'");
}

std::string to_string(FlowLimitMode mode) {
  switch (mode) {
    case FlowLimitMode::apparent_power: return "apparent";
    case FlowLimitMode::current_magnitude: return "current";
    case FlowLimitMode::both: return "both";
    case FlowLimitMode::none: return "none";
  }
  return "?";
}

namespace {

bool uses_apparent(FlowLimitMode m) { return m == FlowLimitMode::apparent_power || m == FlowLimitMode::both; }
bool uses_current(FlowLimitMode m) { return m == FlowLimitMode::current_magnitude || m == FlowLimitMode::both; }

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix assemble(Index rows, Index cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

double ResidualReport::max() const { return std::max({balance, bounds, thermal, current, angle}); }

AcopfProblem::AcopfProblem(NetworkCase net, FlowLimitMode mode, bool loadability)
    : net_{std::move(net)}, mode_{mode}, loadability_{loadability} {
  nb_ = static_cast<Index>(net_.buses.size());
  ng_ = static_cast<Index>(net_.gens.size());
  const Index n = 2 * nb_ + 2 * ng_ + (loadability_ ? 1 : 0);
  x_lower.setConstant(n, -inf);
  x_upper.setConstant(n, inf);
  for (Index i = 0; i < nb_; ++i) {
    const auto& b = net_.buses[i];
    x_lower[vm(i)] = b.v_min;
    x_upper[vm(i)] = b.v_max;
    if (b.reference) {
      x_lower[va(i)] = x_upper[va(i)] = 0;
    }
  }
  double pmax_total = 0, pd_total = 0;
  for (Index k = 0; k < ng_; ++k) {
    const auto& g = net_.gens[k];
    gen_bus_.push_back(net_.bus_index(g.bus));
    x_lower[pg(k)] = g.p_min;
    x_upper[pg(k)] = g.p_max;
    x_lower[qg(k)] = g.q_min;
    x_upper[qg(k)] = g.q_max;
    pmax_total += std::max(g.p_max, 0.0);
  }
  for (const auto& b : net_.buses) {
    pd_total += b.demand.real();
  }
  if (loadability_) {
    x_lower[alpha()] = 0;
    x_upper[alpha()] = pd_total > 0 ? std::max(2.0, 2 * pmax_total / pd_total) : 1e3;
  }
  num_eq = 2 * nb_;

  std::vector<double> lo, hi;
  for (size_t l = 0; l < net_.branches.size(); ++l) {
    const auto& br = net_.branches[l];
    links_.push_back({net_.bus_index(br.from), net_.bus_index(br.to),
                      BranchTemplates<double>(br.series_admittance, br.charging, br.transformer)});
  }
  auto add = [&](RowKind kind, int l, double a, double b) {
    rows_.push_back({kind, l});
    lo.push_back(a);
    hi.push_back(b);
  };
  const int nl = static_cast<int>(net_.branches.size());
  if (uses_apparent(mode_)) {
    for (int l = 0; l < nl; ++l) {
      if (auto s = net_.branches[l].s_max) {
        add(RowKind::thermal_from, l, -inf, *s * *s);
        add(RowKind::thermal_to, l, -inf, *s * *s);
      }
    }
  }
  if (uses_current(mode_)) {
    for (int l = 0; l < nl; ++l) {
      if (net_.branches[l].has_current_limit()) {
        double i = net_.branches[l].current_limit();
        add(RowKind::current_from, l, -inf, i * i);
        add(RowKind::current_to, l, -inf, i * i);
      }
    }
  }
  for (int l = 0; l < nl; ++l) {
    add(RowKind::angle, l, net_.branches[l].angle_min, net_.branches[l].angle_max);
  }
  d_lower = Eigen::Map<VectorXd>(lo.data(), static_cast<Index>(lo.size()));
  d_upper = Eigen::Map<VectorXd>(hi.data(), static_cast<Index>(hi.size()));
}

BranchState<double> AcopfProblem::state(const Link& l, const VectorXd& x) const {
  return {x[va(l.i)], x[va(l.j)], x[vm(l.i)], x[vm(l.j)], l.t.shift};
}

std::array<Index, 4> AcopfProblem::locals(const Link& l) const {
  return {va(l.i), va(l.j), vm(l.i), vm(l.j)};
}

double AcopfProblem::objective(const VectorXd& x) const {
  if (loadability_) {
    return -x[alpha()];
  }
  double f = 0;
  for (Index k = 0; k < ng_; ++k) {
    const auto& g = net_.gens[k];
    double p = x[pg(k)];
    f += g.c2 * p * p + g.c1 * p + g.c0;
  }
  return f;
}

VectorXd AcopfProblem::gradient(const VectorXd& x) const {
  VectorXd g = VectorXd::Zero(x.size());
  if (loadability_) {
    g[alpha()] = -1;
    return g;
  }
  for (Index k = 0; k < ng_; ++k) {
    const auto& gen = net_.gens[k];
    g[pg(k)] = 2 * gen.c2 * x[pg(k)] + gen.c1;
  }
  return g;
}

VectorXd AcopfProblem::equalities(const VectorXd& x) const {
  VectorXd c(2 * nb_);
  const double scale = demand_scale(x);
  for (Index i = 0; i < nb_; ++i) {
    const auto& b = net_.buses[i];
    double v2 = x[vm(i)] * x[vm(i)];
    c[i] = -scale * b.demand.real() - b.shunt.real() * v2;
    c[nb_ + i] = -b.demand.imag() + b.shunt.imag() * v2;
  }
  for (Index k = 0; k < ng_; ++k) {
    c[gen_bus_[k]] += x[pg(k)];
    c[nb_ + gen_bus_[k]] += x[qg(k)];
  }
  for (const auto& l : links_) {
    auto s = state(l, x);
    c[l.i] -= flow_value(l.t.p_from, s);
    c[nb_ + l.i] -= flow_value(l.t.q_from, s);
    c[l.j] -= flow_value(l.t.p_to, s);
    c[nb_ + l.j] -= flow_value(l.t.q_to, s);
  }
  return c;
}

VectorXd AcopfProblem::inequalities(const VectorXd& x) const {
  VectorXd d(rows_.size());
  for (size_t r = 0; r < rows_.size(); ++r) {
    const auto& l = links_[rows_[r].branch];
    auto s = state(l, x);
    switch (rows_[r].kind) {
      case RowKind::thermal_from: {
        double p = flow_value(l.t.p_from, s), q = flow_value(l.t.q_from, s);
        d[r] = p * p + q * q;
        break;
      }
      case RowKind::thermal_to: {
        double p = flow_value(l.t.p_to, s), q = flow_value(l.t.q_to, s);
        d[r] = p * p + q * q;
        break;
      }
      case RowKind::current_from: d[r] = flow_value(l.t.i2_from, s); break;
      case RowKind::current_to: d[r] = flow_value(l.t.i2_to, s); break;
      case RowKind::angle: d[r] = x[va(l.i)] - x[va(l.j)]; break;
    }
  }
  return d;
}

SparseMatrix AcopfProblem::equality_jacobian(const VectorXd& x) const {
  Triplets t;
  t.reserve(4 * nb_ + 2 * ng_ + 16 * links_.size());
  for (Index i = 0; i < nb_; ++i) {
    const auto& b = net_.buses[i];
    t.emplace_back(i, vm(i), -2 * b.shunt.real() * x[vm(i)]);
    t.emplace_back(nb_ + i, vm(i), 2 * b.shunt.imag() * x[vm(i)]);
    if (loadability_) {
      t.emplace_back(i, alpha(), -b.demand.real());
    }
  }
  for (Index k = 0; k < ng_; ++k) {
    t.emplace_back(gen_bus_[k], pg(k), 1.0);
    t.emplace_back(nb_ + gen_bus_[k], qg(k), 1.0);
  }
  for (const auto& l : links_) {
    auto s = state(l, x);
    auto cols = locals(l);
    auto put = [&](Index row, const FlowTemplate<double>& f) {
      Eigen::Vector4d g = flow_gradient(f, s);
      for (int a = 0; a < 4; ++a) {
        t.emplace_back(row, cols[a], -g[a]);
      }
    };
    put(l.i, l.t.p_from);
    put(nb_ + l.i, l.t.q_from);
    put(l.j, l.t.p_to);
    put(nb_ + l.j, l.t.q_to);
  }
  return assemble(2 * nb_, x.size(), t);
}

SparseMatrix AcopfProblem::inequality_jacobian(const VectorXd& x) const {
  Triplets t;
  t.reserve(4 * rows_.size());
  for (size_t r = 0; r < rows_.size(); ++r) {
    const auto& l = links_[rows_[r].branch];
    auto s = state(l, x);
    auto cols = locals(l);
    Eigen::Vector4d g;
    switch (rows_[r].kind) {
      case RowKind::thermal_from:
        g = 2 * flow_value(l.t.p_from, s) * flow_gradient(l.t.p_from, s) + 2 * flow_value(l.t.q_from, s) * flow_gradient(l.t.q_from, s);
        break;
      case RowKind::thermal_to:
        g = 2 * flow_value(l.t.p_to, s) * flow_gradient(l.t.p_to, s) + 2 * flow_value(l.t.q_to, s) * flow_gradient(l.t.q_to, s);
        break;
      case RowKind::current_from: g = flow_gradient(l.t.i2_from, s); break;
      case RowKind::current_to: g = flow_gradient(l.t.i2_to, s); break;
      case RowKind::angle: g << 1, -1, 0, 0; break;
    }
    const int width = rows_[r].kind == RowKind::angle ? 2 : 4;
    for (int a = 0; a < width; ++a) {
      t.emplace_back(static_cast<Index>(r), cols[a], g[a]);
    }
  }
  return assemble(static_cast<Index>(rows_.size()), x.size(), t);
}

SparseMatrix AcopfProblem::hessian(const VectorXd& x, double sigma, const VectorXd& y, const VectorXd& z) const {
  Triplets t;
  t.reserve(ng_ + nb_ + 10 * links_.size());
  if (!loadability_) {
    for (Index k = 0; k < ng_; ++k) {
      t.emplace_back(pg(k), pg(k), 2 * sigma * net_.gens[k].c2);
    }
  }
  for (Index i = 0; i < nb_; ++i) {
    const auto& b = net_.buses[i];
    t.emplace_back(vm(i), vm(i), -2 * b.shunt.real() * y[i] + 2 * b.shunt.imag() * y[nb_ + i]);
  }

  // Per branch: one combined template for every curvature term, plus the
  // outer-product parts of the squared thermal limits.
  std::vector<FlowTemplate<double>> combined(links_.size());
  std::vector<Eigen::Matrix4d> outer(links_.size(), Eigen::Matrix4d::Zero());
  for (size_t k = 0; k < links_.size(); ++k) {
    const auto& l = links_[k];
    auto& f = combined[k];
    f += -y[l.i] * l.t.p_from;
    f += -y[nb_ + l.i] * l.t.q_from;
    f += -y[l.j] * l.t.p_to;
    f += -y[nb_ + l.j] * l.t.q_to;
  }
  for (size_t r = 0; r < rows_.size(); ++r) {
    const int k = rows_[r].branch;
    const auto& l = links_[k];
    const double w = z[r];
    auto s = state(l, x);
    auto square = [&](const FlowTemplate<double>& p, const FlowTemplate<double>& q) {
      double pv = flow_value(p, s), qv = flow_value(q, s);
      combined[k] += (2 * w * pv) * p;
      combined[k] += (2 * w * qv) * q;
      Eigen::Vector4d gp = flow_gradient(p, s), gq = flow_gradient(q, s);
      outer[k] += 2 * w * (gp * gp.transpose() + gq * gq.transpose());
    };
    switch (rows_[r].kind) {
      case RowKind::thermal_from: square(l.t.p_from, l.t.q_from); break;
      case RowKind::thermal_to: square(l.t.p_to, l.t.q_to); break;
      case RowKind::current_from: combined[k] += w * l.t.i2_from; break;
      case RowKind::current_to: combined[k] += w * l.t.i2_to; break;
      case RowKind::angle: break;
    }
  }
  for (size_t k = 0; k < links_.size(); ++k) {
    const auto& l = links_[k];
    Eigen::Matrix4d H = flow_hessian(combined[k], state(l, x)) + outer[k];
    auto idx = locals(l);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b <= a; ++b) {
        t.emplace_back(std::max(idx[a], idx[b]), std::min(idx[a], idx[b]), H(a, b));
      }
    }
  }
  return assemble(x.size(), x.size(), t);
}

std::string AcopfProblem::variable_name(Index i) const {
  auto bus = [&](Index b) { return std::to_string(net_.buses[b].id); };
  auto gen = [&](Index g) { return std::to_string(net_.gens[g].id); };
  if (i < nb_) return "va[bus " + bus(i) + "]";
  if (i < 2 * nb_) return "vm[bus " + bus(i - nb_) + "]";
  if (i < 2 * nb_ + ng_) return "pg[gen " + gen(i - 2 * nb_) + "]";
  if (i < 2 * nb_ + 2 * ng_) return "qg[gen " + gen(i - 2 * nb_ - ng_) + "]";
  return "alpha";
}

std::string AcopfProblem::equality_name(Index i) const {
  return (i < nb_ ? "p_balance[bus " : "q_balance[bus ") + std::to_string(net_.buses[i % nb_].id) + "]";
}

std::string AcopfProblem::inequality_name(Index i) const {
  static const char* names[] = {"thermal_from", "thermal_to", "current_from", "current_to", "angle"};
  const auto& r = rows_[i];
  return std::string(names[static_cast<int>(r.kind)]) + "[branch " + std::to_string(net_.branches[r.branch].id) + "]";
}

OperatingPoint AcopfProblem::point(const VectorXd& x) const {
  return {x.segment(nb_, nb_), x.head(nb_), x.segment(2 * nb_, ng_), x.segment(2 * nb_ + ng_, ng_)};
}

VectorXd AcopfProblem::vector(const OperatingPoint& pt, double alpha_value) const {
  VectorXd x(num_variables());
  x << pt.va, pt.vm, pt.pg, pt.qg;
  if (loadability_) {
    x[alpha()] = alpha_value;
  }
  return x;
}

AcopfProblem build_acopf(const NetworkCase& net, FlowLimitMode mode) { return AcopfProblem(net, mode); }

namespace {

const Branch& find_branch(const NetworkCase& net, int id) {
  for (const auto& b : net.branches) {
    if (b.id == id) return b;
  }
  throw NetworkError("unknown branch id " + std::to_string(id));
}

std::pair<Complex, Complex> voltages(const NetworkCase& net, const OperatingPoint& pt, const Branch& br) {
  int i = net.bus_index(br.from), j = net.bus_index(br.to);
  return {std::polar(pt.vm[i], pt.va[i]), std::polar(pt.vm[j], pt.va[j])};
}

}  // namespace

Complex branch_flow(const NetworkCase& net, const OperatingPoint& pt, int branch_id, Direction dir) {
  const auto& br = find_branch(net, branch_id);
  auto [vi, vj] = voltages(net, pt, br);
  const Complex y = br.series_admittance, T = br.transformer;
  const Complex ysh = std::conj(y) - Complex(0, br.charging / 2);
  if (dir == Direction::from) {
    return ysh * std::norm(vi) / std::norm(T) - std::conj(y) * vi * std::conj(vj) / T;
  }
  return ysh * std::norm(vj) - std::conj(y) * std::conj(vi) * vj / std::conj(T);
}

Complex branch_current(const NetworkCase& net, const OperatingPoint& pt, int branch_id, Direction dir) {
  const auto& br = find_branch(net, branch_id);
  auto [vi, vj] = voltages(net, pt, br);
  const Complex y = br.series_admittance, T = br.transformer;
  const Complex ysh = y + Complex(0, br.charging / 2);
  if (dir == Direction::from) {
    return ysh * vi / std::norm(T) - y * vj / std::conj(T);
  }
  return ysh * vj - y * vi / T;
}

double objective_value(const NetworkCase& net, const OperatingPoint& pt) {
  double f = 0;
  for (size_t k = 0; k < net.gens.size(); ++k) {
    const auto& g = net.gens[k];
    double p = pt.pg[k];
    f += g.c2 * p * p + g.c1 * p + g.c0;
  }
  return f;
}

ResidualReport check_feasibility(const NetworkCase& net, const OperatingPoint& pt, double tol, FlowLimitMode mode) {
  ResidualReport rep;
  const size_t nb = net.buses.size();
  std::vector<Complex> mismatch(nb);
  auto excess = [](double v, double lo, double hi) { return std::max({0.0, lo - v, v - hi}); };

  for (size_t i = 0; i < nb; ++i) {
    const auto& b = net.buses[i];
    mismatch[i] = -b.demand - pt.vm[i] * pt.vm[i] * std::conj(b.shunt);
    rep.bounds = std::max(rep.bounds, excess(pt.vm[i], b.v_min, b.v_max));
    if (b.reference) {
      rep.bounds = std::max(rep.bounds, std::abs(pt.va[i]));
    }
  }
  for (size_t k = 0; k < net.gens.size(); ++k) {
    const auto& g = net.gens[k];
    mismatch[net.bus_index(g.bus)] += Complex(pt.pg[k], pt.qg[k]);
    rep.bounds = std::max(rep.bounds, excess(pt.pg[k], g.p_min, g.p_max));
    rep.bounds = std::max(rep.bounds, excess(pt.qg[k], g.q_min, g.q_max));
  }
  for (const auto& br : net.branches) {
    int i = net.bus_index(br.from), j = net.bus_index(br.to);
    Complex sf = branch_flow(net, pt, br.id, Direction::from);
    Complex st = branch_flow(net, pt, br.id, Direction::to);
    mismatch[i] -= sf;
    mismatch[j] -= st;
    if (uses_apparent(mode) && br.s_max) {
      rep.thermal = std::max({rep.thermal, std::abs(sf) - *br.s_max, std::abs(st) - *br.s_max});
    }
    if (uses_current(mode) && br.has_current_limit()) {
      double lim = br.current_limit();
      rep.current = std::max({rep.current, std::abs(branch_current(net, pt, br.id, Direction::from)) - lim,
                              std::abs(branch_current(net, pt, br.id, Direction::to)) - lim});
    }
    rep.angle = std::max(rep.angle, excess(pt.va[i] - pt.va[j], br.angle_min, br.angle_max));
  }
  for (const auto& m : mismatch) {
    rep.balance = std::max({rep.balance, std::abs(m.real()), std::abs(m.imag())});
  }
  rep.feasible = rep.max() <= tol;
  return rep;
}

}  // namespace opfbench

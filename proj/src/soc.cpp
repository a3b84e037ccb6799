#include "opfbench/soc.hpp"

#include <cmath>
#include <map>
#include <queue>

namespace opfbench {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix assemble(Index rows, Index cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

SocProblem::SocProblem(NetworkCase net) : net_{std::move(net)} {
  nb_ = static_cast<Index>(net_.buses.size());
  ng_ = static_cast<Index>(net_.gens.size());
  nl_ = static_cast<Index>(net_.branches.size());

  std::map<std::pair<int, int>, int> pair_index;
  for (const auto& br : net_.branches) {
    int i = net_.bus_index(br.from), j = net_.bus_index(br.to);
    auto key = std::minmax(i, j);
    if (pair_index.emplace(key, static_cast<int>(pairs_.size())).second) {
      pairs_.push_back(key);
    }
  }
  np_ = static_cast<Index>(pairs_.size());

  constexpr double half_pi = std::numbers::pi / 2;
  for (const auto& br : net_.branches) {
    if (br.angle_min <= -half_pi || br.angle_max >= half_pi) {
      throw NetworkError("branch " + std::to_string(br.id) +
                         " angle bound reaches 90 degrees; the tangent form is undefined");
    }
    Link l;
    l.i = net_.bus_index(br.from);
    l.j = net_.bus_index(br.to);
    l.pair = pair_index.at(std::minmax(l.i, l.j));
    l.sign = l.i < l.j ? 1.0 : -1.0;
    l.tan_lo = std::tan(br.angle_min);
    l.tan_hi = std::tan(br.angle_max);
    l.s_max = br.s_max;
    // vi vj cos(d) = wr cos(shift) + wi sin(shift), vi vj sin(d) = wi cos(shift) - wr sin(shift)
    BranchTemplates<double> t(br.series_admittance, br.charging, br.transformer);
    const double cs = std::cos(t.shift), sn = std::sin(t.shift);
    auto lin = [&](const FlowTemplate<double>& f) {
      return Linear{f.a_i, f.a_j, f.c * cs - f.s * sn, f.c * sn + f.s * cs};
    };
    l.p_from = lin(t.p_from);
    l.q_from = lin(t.q_from);
    l.p_to = lin(t.p_to);
    l.q_to = lin(t.q_to);
    links_.push_back(l);
  }

  const Index n = nb_ + 2 * np_ + 2 * ng_ + 4 * nl_;
  x_lower.setConstant(n, -inf);
  x_upper.setConstant(n, inf);
  for (Index i = 0; i < nb_; ++i) {
    const auto& b = net_.buses[i];
    x_lower[w(i)] = b.v_min * b.v_min;
    x_upper[w(i)] = b.v_max * b.v_max;
  }
  // wr >= 0 follows from the angle rows; the magnitude caps follow from the
  // cone and the w bounds. Stating them as bounds keeps the iterates bounded.
  for (Index k = 0; k < np_; ++k) {
    double cap = net_.buses[pairs_[k].first].v_max * net_.buses[pairs_[k].second].v_max;
    x_lower[wr(k)] = 0;
    x_upper[wr(k)] = cap;
    x_lower[wi(k)] = -cap;
    x_upper[wi(k)] = cap;
  }
  for (Index k = 0; k < ng_; ++k) {
    const auto& g = net_.gens[k];
    gen_bus_.push_back(net_.bus_index(g.bus));
    x_lower[pg(k)] = g.p_min;
    x_upper[pg(k)] = g.p_max;
    x_lower[qg(k)] = g.q_min;
    x_upper[qg(k)] = g.q_max;
  }
  num_eq = 2 * nb_ + 4 * nl_;

  std::vector<double> lo, hi;
  for (Index l = 0; l < nl_; ++l) {
    if (links_[l].s_max) {
      thermal_.push_back(static_cast<int>(l));
      double s2 = *links_[l].s_max * *links_[l].s_max;
      lo.insert(lo.end(), {-inf, -inf});
      hi.insert(hi.end(), {s2, s2});
    }
  }
  for (Index l = 0; l < nl_; ++l) {
    lo.insert(lo.end(), {-inf, 0});
    hi.insert(hi.end(), {0, inf});
  }
  for (Index k = 0; k < np_; ++k) {
    lo.push_back(-inf);
    hi.push_back(0);
  }
  d_lower = Eigen::Map<VectorXd>(lo.data(), static_cast<Index>(lo.size()));
  d_upper = Eigen::Map<VectorXd>(hi.data(), static_cast<Index>(hi.size()));
}

double SocProblem::linear(const Linear& f, const Link& l, const VectorXd& x) const {
  return f.a_i * x[w(l.i)] + f.a_j * x[w(l.j)] + f.cr * x[wr(l.pair)] + f.ci * l.sign * x[wi(l.pair)];
}

double SocProblem::objective(const VectorXd& x) const {
  double f = 0;
  for (Index k = 0; k < ng_; ++k) {
    const auto& g = net_.gens[k];
    double p = x[pg(k)];
    f += g.c2 * p * p + g.c1 * p + g.c0;
  }
  return f;
}

VectorXd SocProblem::gradient(const VectorXd& x) const {
  VectorXd g = VectorXd::Zero(x.size());
  for (Index k = 0; k < ng_; ++k) {
    g[pg(k)] = 2 * net_.gens[k].c2 * x[pg(k)] + net_.gens[k].c1;
  }
  return g;
}

VectorXd SocProblem::equalities(const VectorXd& x) const {
  VectorXd c(num_eq);
  for (Index i = 0; i < nb_; ++i) {
    const auto& b = net_.buses[i];
    c[i] = -b.demand.real() - b.shunt.real() * x[w(i)];
    c[nb_ + i] = -b.demand.imag() + b.shunt.imag() * x[w(i)];
  }
  for (Index k = 0; k < ng_; ++k) {
    c[gen_bus_[k]] += x[pg(k)];
    c[nb_ + gen_bus_[k]] += x[qg(k)];
  }
  for (Index l = 0; l < nl_; ++l) {
    const auto& k = links_[l];
    c[k.i] -= x[p_from(l)];
    c[nb_ + k.i] -= x[q_from(l)];
    c[k.j] -= x[p_to(l)];
    c[nb_ + k.j] -= x[q_to(l)];
    Index row = 2 * nb_ + 4 * l;
    c[row] = x[p_from(l)] - linear(k.p_from, k, x);
    c[row + 1] = x[q_from(l)] - linear(k.q_from, k, x);
    c[row + 2] = x[p_to(l)] - linear(k.p_to, k, x);
    c[row + 3] = x[q_to(l)] - linear(k.q_to, k, x);
  }
  return c;
}

VectorXd SocProblem::inequalities(const VectorXd& x) const {
  VectorXd d(d_lower.size());
  Index r = 0;
  for (int l : thermal_) {
    d[r++] = x[p_from(l)] * x[p_from(l)] + x[q_from(l)] * x[q_from(l)];
    d[r++] = x[p_to(l)] * x[p_to(l)] + x[q_to(l)] * x[q_to(l)];
  }
  for (const auto& k : links_) {
    double wij = k.sign * x[wi(k.pair)];
    d[r++] = wij - k.tan_hi * x[wr(k.pair)];
    d[r++] = wij - k.tan_lo * x[wr(k.pair)];
  }
  for (Index p = 0; p < np_; ++p) {
    d[r++] = x[wr(p)] * x[wr(p)] + x[wi(p)] * x[wi(p)] - x[w(pairs_[p].first)] * x[w(pairs_[p].second)];
  }
  return d;
}

SparseMatrix SocProblem::equality_jacobian(const VectorXd& x) const {
  Triplets t;
  t.reserve(2 * nb_ + 2 * ng_ + 24 * nl_);
  for (Index i = 0; i < nb_; ++i) {
    t.emplace_back(i, w(i), -net_.buses[i].shunt.real());
    t.emplace_back(nb_ + i, w(i), net_.buses[i].shunt.imag());
  }
  for (Index k = 0; k < ng_; ++k) {
    t.emplace_back(gen_bus_[k], pg(k), 1.0);
    t.emplace_back(nb_ + gen_bus_[k], qg(k), 1.0);
  }
  for (Index l = 0; l < nl_; ++l) {
    const auto& k = links_[l];
    t.emplace_back(k.i, p_from(l), -1.0);
    t.emplace_back(nb_ + k.i, q_from(l), -1.0);
    t.emplace_back(k.j, p_to(l), -1.0);
    t.emplace_back(nb_ + k.j, q_to(l), -1.0);
    Index row = 2 * nb_ + 4 * l;
    auto put = [&](Index r, Index var, const Linear& f) {
      t.emplace_back(r, var, 1.0);
      t.emplace_back(r, w(k.i), -f.a_i);
      t.emplace_back(r, w(k.j), -f.a_j);
      t.emplace_back(r, wr(k.pair), -f.cr);
      t.emplace_back(r, wi(k.pair), -f.ci * k.sign);
    };
    put(row, p_from(l), k.p_from);
    put(row + 1, q_from(l), k.q_from);
    put(row + 2, p_to(l), k.p_to);
    put(row + 3, q_to(l), k.q_to);
  }
  return assemble(num_eq, x.size(), t);
}

SparseMatrix SocProblem::inequality_jacobian(const VectorXd& x) const {
  Triplets t;
  Index r = 0;
  for (int l : thermal_) {
    t.emplace_back(r, p_from(l), 2 * x[p_from(l)]);
    t.emplace_back(r, q_from(l), 2 * x[q_from(l)]);
    ++r;
    t.emplace_back(r, p_to(l), 2 * x[p_to(l)]);
    t.emplace_back(r, q_to(l), 2 * x[q_to(l)]);
    ++r;
  }
  for (const auto& k : links_) {
    t.emplace_back(r, wi(k.pair), k.sign);
    t.emplace_back(r, wr(k.pair), -k.tan_hi);
    ++r;
    t.emplace_back(r, wi(k.pair), k.sign);
    t.emplace_back(r, wr(k.pair), -k.tan_lo);
    ++r;
  }
  for (Index p = 0; p < np_; ++p) {
    auto [a, b] = pairs_[p];
    t.emplace_back(r, wr(p), 2 * x[wr(p)]);
    t.emplace_back(r, wi(p), 2 * x[wi(p)]);
    t.emplace_back(r, w(a), -x[w(b)]);
    t.emplace_back(r, w(b), -x[w(a)]);
    ++r;
  }
  return assemble(d_lower.size(), x.size(), t);
}

SparseMatrix SocProblem::hessian(const VectorXd& x, double sigma, const VectorXd&, const VectorXd& z) const {
  Triplets t;
  for (Index k = 0; k < ng_; ++k) {
    t.emplace_back(pg(k), pg(k), 2 * sigma * net_.gens[k].c2);
  }
  Index r = 0;
  for (int l : thermal_) {
    t.emplace_back(p_from(l), p_from(l), 2 * z[r]);
    t.emplace_back(q_from(l), q_from(l), 2 * z[r]);
    ++r;
    t.emplace_back(p_to(l), p_to(l), 2 * z[r]);
    t.emplace_back(q_to(l), q_to(l), 2 * z[r]);
    ++r;
  }
  r += 2 * nl_;
  for (Index p = 0; p < np_; ++p) {
    auto [a, b] = pairs_[p];
    t.emplace_back(wr(p), wr(p), 2 * z[r]);
    t.emplace_back(wi(p), wi(p), 2 * z[r]);
    t.emplace_back(w(b), w(a), -z[r]);
    ++r;
  }
  return assemble(x.size(), x.size(), t);
}

void SocProblem::fill_flows(VectorXd& x) const {
  for (Index l = 0; l < nl_; ++l) {
    const auto& k = links_[l];
    x[p_from(l)] = linear(k.p_from, k, x);
    x[q_from(l)] = linear(k.q_from, k, x);
    x[p_to(l)] = linear(k.p_to, k, x);
    x[q_to(l)] = linear(k.q_to, k, x);
  }
}

VectorXd SocProblem::initial_point() const {
  VectorXd x = NlpProblem::initial_point();
  for (Index p = 0; p < np_; ++p) {
    x[wr(p)] = std::sqrt(x[w(pairs_[p].first)] * x[w(pairs_[p].second)]);
    x[wi(p)] = 0;
  }
  fill_flows(x);
  return x;
}

std::string SocProblem::variable_name(Index i) const {
  auto bus = [&](int b) { return std::to_string(net_.buses[b].id); };
  auto pair = [&](Index p) { return bus(pairs_[p].first) + "," + bus(pairs_[p].second); };
  auto branch = [&](Index l) { return std::to_string(net_.branches[l].id); };
  if (i < nb_) return "w[bus " + bus(static_cast<int>(i)) + "]";
  if (i < nb_ + np_) return "wr[" + pair(i - nb_) + "]";
  if (i < nb_ + 2 * np_) return "wi[" + pair(i - nb_ - np_) + "]";
  Index g = i - nb_ - 2 * np_;
  if (g < ng_) return "pg[gen " + std::to_string(net_.gens[g].id) + "]";
  if (g < 2 * ng_) return "qg[gen " + std::to_string(net_.gens[g - ng_].id) + "]";
  Index f = g - 2 * ng_;
  static const char* names[] = {"p_from", "q_from", "p_to", "q_to"};
  return std::string(names[f / nl_]) + "[branch " + branch(f % nl_) + "]";
}

SocVariables SocProblem::variables(const VectorXd& x) const {
  SocVariables v;
  v.w = x.segment(0, nb_);
  v.wr = x.segment(nb_, np_);
  v.wi = x.segment(nb_ + np_, np_);
  v.pg = x.segment(pg(0), ng_);
  v.qg = x.segment(nb_ + 2 * np_ + ng_, ng_);
  Index f = nb_ + 2 * np_ + 2 * ng_;
  v.p_from = x.segment(f, nl_);
  v.q_from = x.segment(f + nl_, nl_);
  v.p_to = x.segment(f + 2 * nl_, nl_);
  v.q_to = x.segment(f + 3 * nl_, nl_);
  v.pairs = pairs_;
  return v;
}

VectorXd SocProblem::lift(const OperatingPoint& pt) const {
  VectorXd x = VectorXd::Zero(num_variables());
  for (Index i = 0; i < nb_; ++i) {
    x[w(i)] = pt.vm[i] * pt.vm[i];
  }
  for (Index p = 0; p < np_; ++p) {
    auto [a, b] = pairs_[p];
    Complex prod = std::polar(pt.vm[a], pt.va[a]) * std::conj(std::polar(pt.vm[b], pt.va[b]));
    x[wr(p)] = prod.real();
    x[wi(p)] = prod.imag();
  }
  for (Index k = 0; k < ng_; ++k) {
    x[pg(k)] = pt.pg[k];
    x[qg(k)] = pt.qg[k];
  }
  fill_flows(x);
  return x;
}

SocProblem build_soc(const NetworkCase& net) { return SocProblem(net); }

OperatingPoint recover_point_estimate(const NetworkCase& net, const SocVariables& vars) {
  const int nb = static_cast<int>(net.buses.size());
  OperatingPoint pt;
  pt.vm = vars.w.cwiseMax(0.0).cwiseSqrt();
  pt.va = VectorXd::Zero(nb);
  pt.pg = vars.pg;
  pt.qg = vars.qg;

  std::vector<std::vector<int>> adj(nb);
  for (size_t p = 0; p < vars.pairs.size(); ++p) {
    adj[vars.pairs[p].first].push_back(static_cast<int>(p));
    adj[vars.pairs[p].second].push_back(static_cast<int>(p));
  }
  // wi/wr relaxes the product V_a conj(V_b), so va_a - va_b = atan2(wi, wr).
  std::vector<bool> seen(nb, false);
  std::queue<int> todo;
  int ref = net.reference_index();
  seen[ref] = true;
  todo.push(ref);
  while (!todo.empty()) {
    int u = todo.front();
    todo.pop();
    for (int p : adj[u]) {
      auto [a, b] = vars.pairs[p];
      int v = a == u ? b : a;
      if (seen[v]) continue;
      double diff = std::atan2(vars.wi[p], vars.wr[p]);
      pt.va[v] = a == u ? pt.va[u] - diff : pt.va[u] + diff;
      seen[v] = true;
      todo.push(v);
    }
  }
  return pt;
}

}  // namespace opfbench

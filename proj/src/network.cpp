#include "opfbench/network.hpp"

#include <cmath>
#include <set>

namespace opfbench {

int NetworkCase::bus_index(int id) const {
  auto it = lookup_.find(id);
  if (it == lookup_.end()) {
    throw NetworkError("unknown bus id " + std::to_string(id));
  }
  return it->second;
}

int NetworkCase::reference_index() const {
  for (size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].reference) {
      return static_cast<int>(i);
    }
  }
  throw NetworkError("network has no reference bus");
}

void NetworkCase::reindex() {
  lookup_.clear();
  for (size_t i = 0; i < buses.size(); ++i) {
    if (!lookup_.emplace(buses[i].id, static_cast<int>(i)).second) {
      throw NetworkError("duplicate bus id " + std::to_string(buses[i].id));
    }
  }
}

namespace {

// A raw bound is honored when it lies strictly inside (-90, 90) degrees;
// 0/0 and the +-360 "unbounded" markers fall back to +-30 degrees.
std::pair<double, double> angle_bounds(double angmin, double angmax) {
  if (angmin == 0 && angmax == 0) {
    return {-default_angle_bound, default_angle_bound};
  }
  double lo = angmin > -90 && angmin < 90 ? deg2rad(angmin) : -default_angle_bound;
  double hi = angmax > -90 && angmax < 90 ? deg2rad(angmax) : default_angle_bound;
  return {lo, hi};
}

}  // namespace

NetworkCase build_network(const RawCase& raw) {
  if (!(raw.base_mva > 0)) {
    throw NetworkError("baseMVA must be positive");
  }
  const double base = raw.base_mva;
  NetworkCase net;
  net.name = raw.name;
  net.base_mva = base;

  std::set<int> known, removed;
  int refs = 0;
  for (const auto& b : raw.bus_rows) {
    if (!known.insert(b.id).second) {
      throw NetworkError("duplicate bus id " + std::to_string(b.id));
    }
    if (b.type < 1 || b.type > 4) {
      throw NetworkError("bus " + std::to_string(b.id) + " has invalid type " + std::to_string(b.type));
    }
    if (b.type == 4) {
      removed.insert(b.id);
      continue;
    }
    if (b.vmin > b.vmax) {
      throw NetworkError("bus " + std::to_string(b.id) + " has v_min > v_max");
    }
    Bus bus;
    bus.id = b.id;
    bus.v_min = b.vmin;
    bus.v_max = b.vmax;
    bus.demand = {b.pd / base, b.qd / base};
    bus.shunt = {b.gs / base, b.bs / base};
    bus.base_kv = b.base_kv;
    bus.reference = b.type == 3;
    refs += bus.reference;
    net.buses.push_back(bus);
  }
  if (refs == 0) {
    throw NetworkError("no reference (type 3) bus");
  }
  if (refs > 1) {
    throw NetworkError("multiple reference (type 3) buses");
  }

  for (size_t k = 0; k < raw.gen_rows.size(); ++k) {
    const auto& g = raw.gen_rows[k];
    if (!known.count(g.bus)) {
      throw NetworkError("gen " + std::to_string(k) + " references unknown bus " + std::to_string(g.bus));
    }
    if (g.status <= 0 || removed.count(g.bus)) {
      continue;
    }
    Gen gen;
    gen.id = static_cast<int>(k);
    gen.bus = g.bus;
    gen.p_min = g.pmin / base;
    gen.p_max = g.pmax / base;
    gen.q_min = g.qmin / base;
    gen.q_max = g.qmax / base;
    gen.pg_setpoint = g.pg / base;
    if (!raw.gencost_rows.empty()) {
      const auto& c = raw.gencost_rows[k];
      if (c.model != 2) {
        throw NetworkError("gen " + std::to_string(k) + " has a piecewise-linear cost");
      }
      if (c.n > 3) {
        throw NetworkError("gen " + std::to_string(k) + " has a cost polynomial of degree " +
                           std::to_string(c.n - 1));
      }
      // coefficients are stored highest degree first
      double coef[3] = {0, 0, 0};
      for (int d = 0; d < c.n; ++d) {
        coef[d] = c.coefficients[c.n - 1 - d];
      }
      gen.c0 = coef[0];
      gen.c1 = coef[1] * base;
      gen.c2 = coef[2] * base * base;
    }
    net.gens.push_back(gen);
  }

  for (size_t k = 0; k < raw.branch_rows.size(); ++k) {
    const auto& l = raw.branch_rows[k];
    if (!known.count(l.from) || !known.count(l.to)) {
      throw NetworkError("branch " + std::to_string(k) + " references an unknown bus");
    }
    if (l.status <= 0 || removed.count(l.from) || removed.count(l.to)) {
      continue;
    }
    Branch br;
    br.id = static_cast<int>(k);
    br.from = l.from;
    br.to = l.to;
    br.r = l.r;
    br.x = l.x;
    try {
      br.series_admittance = branch_admittance(l.r, l.x);
    } catch (const NetworkError&) {
      throw NetworkError("branch " + std::to_string(k) + " has zero impedance");
    }
    br.charging = l.b;
    double tap = l.tap == 0 ? 1.0 : l.tap;
    br.transformer = transformer_phasor(tap, deg2rad(l.shift));
    if (l.rate_a > 0) {
      br.s_max = l.rate_a / base;
    }
    std::tie(br.angle_min, br.angle_max) = angle_bounds(l.angmin, l.angmax);
    net.branches.push_back(br);
  }

  net.reindex();
  validate(net);
  return net;
}

void validate(const NetworkCase& net) {
  auto fail = [](const std::string& what) { throw NetworkError(what); };
  int refs = 0;
  std::set<int> ids;
  for (const auto& b : net.buses) {
    if (!ids.insert(b.id).second) fail("duplicate bus id " + std::to_string(b.id));
    if (!(b.v_min > 0) || b.v_min > b.v_max) fail("bus " + std::to_string(b.id) + " voltage bounds invalid");
    refs += b.reference;
  }
  if (refs != 1) fail("network must have exactly one reference bus");
  for (const auto& g : net.gens) {
    if (!ids.count(g.bus)) fail("gen " + std::to_string(g.id) + " references unknown bus");
    if (g.p_min > g.p_max) fail("gen " + std::to_string(g.id) + " has p_min > p_max");
    if (g.q_min > g.q_max) fail("gen " + std::to_string(g.id) + " has q_min > q_max");
  }
  constexpr double half_pi = std::numbers::pi / 2;
  for (const auto& l : net.branches) {
    std::string name = "branch " + std::to_string(l.id);
    if (!ids.count(l.from) || !ids.count(l.to)) fail(name + " references unknown bus");
    if (l.from == l.to) fail(name + " is a self loop");
    if (!(std::abs(l.transformer) > 0)) fail(name + " has a zero transformer ratio");
    if (l.angle_min > 0 || l.angle_max < 0) fail(name + " angle bounds do not bracket zero");
    if (l.angle_min <= -half_pi || l.angle_max >= half_pi) fail(name + " angle bounds outside (-90, 90) degrees");
    if (l.s_max && !(*l.s_max > 0)) fail(name + " has a non-positive thermal limit");
    if (l.i_max && !(*l.i_max > 0)) fail(name + " has a non-positive current limit");
  }
}

RawCase apply_network(RawCase raw, const NetworkCase& net) {
  const double base = net.base_mva;
  raw.name = net.name;
  for (const auto& b : net.buses) {
    for (auto& row : raw.bus_rows) {
      if (row.id == b.id) {
        row.pd = b.demand.real() * base;
        row.qd = b.demand.imag() * base;
        row.vmin = b.v_min;
        row.vmax = b.v_max;
      }
    }
  }
  if (raw.gencost_rows.empty()) {
    raw.gencost_rows.assign(raw.gen_rows.size(), GencostRow{2, 0, 0, 3, {0, 0, 0}, {}});
  }
  for (const auto& g : net.gens) {
    auto& row = raw.gen_rows.at(g.id);
    row.pmin = g.p_min * base;
    row.pmax = g.p_max * base;
    row.qmin = g.q_min * base;
    row.qmax = g.q_max * base;
    auto& cost = raw.gencost_rows.at(g.id);
    cost.model = 2;
    cost.n = 3;
    cost.coefficients = {g.c2 / (base * base), g.c1 / base, g.c0};
  }
  for (const auto& l : net.branches) {
    auto& row = raw.branch_rows.at(l.id);
    row.rate_a = l.s_max ? *l.s_max * base : 0.0;
    row.angmin = rad2deg(l.angle_min);
    row.angmax = rad2deg(l.angle_max);
  }
  return raw;
}

}  // namespace opfbench

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "opfbench/acopf.hpp"
#include "opfbench/completion.hpp"
#include "opfbench/ipm.hpp"

using namespace opfbench;

namespace {

struct Moments {
  double mean = 0, std = 0, min = inf;
};

template <typename Draw>
Moments moments(int n, Draw draw) {
  double sum = 0, sq = 0, lo = inf;
  for (int k = 0; k < n; ++k) {
    double v = draw();
    sum += v;
    sq += v * v;
    lo = std::min(lo, v);
  }
  double mean = sum / n;
  return {mean, std::sqrt(sq / n - mean * mean), lo};
}

CompletionConfig two_fuel_config() {
  CompletionConfig cfg;
  cfg.bins.push_back({0, 100, {0.3, 0.7, 0, 0}});
  cfg.bins.push_back({100, FuelBin::inf_mw, {0, 0, 0, 1}});
  return cfg;
}

// The 14-bus fixture with its thermal limits and costs removed.
NetworkCase stripped_case14() {
  NetworkCase net = load_case("case14_ieee");
  for (auto& br : net.branches) {
    br.s_max.reset();
  }
  for (auto& g : net.gens) {
    g.c2 = g.c1 = g.c0 = 0;
  }
  return net;
}

}  // namespace

TEST_CASE("fuel names") {
  for (FuelType f : {FuelType::PEL, FuelType::NG, FuelType::COW, FuelType::NUC, FuelType::SYNC}) {
    CHECK(parse_fuel(to_string(f)) == f);
  }
  CHECK_THROWS(parse_fuel("WIND"));
}

TEST_CASE("classification") {
  Rng rng(1);
  CompletionConfig cfg = two_fuel_config();
  CHECK(classify_fuel(0, 0, cfg, rng) == FuelType::SYNC);
  CHECK(classify_fuel(0, 0, default_completion_config(), rng) == FuelType::SYNC);
  for (int k = 0; k < 100; ++k) {
    CHECK(classify_fuel(500, 0, cfg, rng) == FuelType::NUC);
  }
  int pel = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    FuelType f = classify_fuel(50, 0, cfg, rng);
    REQUIRE((f == FuelType::PEL || f == FuelType::NG));
    pel += f == FuelType::PEL;
  }
  CHECK(std::abs(pel / double(n) - 0.3) <= 0.01);
}

TEST_CASE("bin edges are closed above") {
  Rng rng(2);
  CompletionConfig cfg = two_fuel_config();
  CHECK(classify_fuel(100, 0, cfg, rng) != FuelType::NUC);
  CHECK(classify_fuel(100.0001, 0, cfg, rng) == FuelType::NUC);
}

TEST_CASE("configuration parsing and validation") {
  CompletionConfig file = load_completion_config(std::filesystem::path(OPFBENCH_DATA_DIR) / "fuel_bins.conf");
  CompletionConfig builtin = default_completion_config();
  REQUIRE(file.bins.size() == builtin.bins.size());
  for (size_t k = 0; k < file.bins.size(); ++k) {
    CHECK(file.bins[k].lower == builtin.bins[k].lower);
    CHECK(file.bins[k].upper == builtin.bins[k].upper);
    CHECK(file.bins[k].probability == builtin.bins[k].probability);
  }
  CHECK(file.heat_rate == builtin.heat_rate);
  CHECK_FALSE(file.cost_per_mmbtu);

  CHECK_THROWS(parse_completion_config("bin = 0 10 0.5 0.5 0 0\n"));
  CHECK_THROWS(parse_completion_config("bin = 0 inf 0.5 0.6 0 0\n"));
  CHECK_THROWS(parse_completion_config("bin = 5 inf 1 0 0 0\n"));
  CHECK_THROWS(parse_completion_config("bin = 0 inf 1 0 0\n"));
  CHECK(parse_completion_config("bin = 0 inf 1 0 0 0\ncost_basis = per_mmbtu\n").cost_per_mmbtu);
}

TEST_CASE("plan parsing") {
  CompletionPlan plan = load_plan(std::filesystem::path(OPFBENCH_DATA_DIR) / "plans" / "case14_ieee.plan");
  CHECK(plan.ag_stat);
  CHECK(plan.rg_am50);
  CHECK(plan.ac_stat);
  CHECK(plan.tl_stat);
  CHECK_FALSE(plan.tl_ub);
  CHECK(plan.angle_bound_deg == 30);
  CHECK(plan.seed == 14);
  CHECK_THROWS(parse_plan("colour = red\n"));
  CHECK_THROWS(parse_plan("ag_stat maybe\n"));
}

TEST_CASE("capacity draws exceed the current output") {
  Rng rng(3);
  for (FuelType f : {FuelType::PEL, FuelType::NG, FuelType::COW, FuelType::NUC}) {
    for (int k = 0; k < 2000; ++k) {
      CHECK(sample_active_capacity(f, 500, rng) > 500);
    }
  }
}

TEST_CASE("capacity moments") {
  const int n = 100000;
  Rng rng(4);
  Moments cow = moments(n, [&] { return sample_active_capacity(FuelType::COW, 0, rng); });
  CHECK(cow.mean == doctest::Approx(1 / 0.003201).epsilon(0.02));
  Moments pel = moments(n, [&] { return sample_active_capacity(FuelType::PEL, 0, rng); });
  CHECK(pel.mean == doctest::Approx(1 / 0.023254).epsilon(0.02));
  Moments ng = moments(n, [&] { return sample_active_capacity(FuelType::NG, 0, rng); });
  CHECK(ng.mean == doctest::Approx(1 / 0.009188).epsilon(0.02));
  CHECK(ng.std == doctest::Approx(1 / 0.009188).epsilon(0.02));
  Moments nuc = moments(n, [&] { return sample_active_capacity(FuelType::NUC, 0, rng); });
  CHECK(nuc.mean == doctest::Approx(1044.56).epsilon(0.01));
  CHECK(nuc.std == doctest::Approx(219.27).epsilon(0.02));
}

TEST_CASE("conditioned exponential draws keep the memoryless shape") {
  Rng rng(5);
  Moments m = moments(100000, [&] { return sample_active_capacity(FuelType::COW, 700, rng) - 700; });
  CHECK(m.mean == doctest::Approx(1 / 0.003201).epsilon(0.02));
}

TEST_CASE("unreachable normal capacity hits the draw cap") {
  Rng rng(6);
  CHECK_THROWS_AS(sample_active_capacity(FuelType::NUC, 1e5, rng), SamplingError);
}

TEST_CASE("reactive envelope") {
  using P = std::pair<double, double>;
  CHECK(clamp_reactive_bounds(100, -80, 80) == P{-50, 50});
  CHECK(clamp_reactive_bounds(100, -30, 30) == P{-30, 30});
  CHECK(clamp_reactive_bounds(100, -80, 20) == P{-50, 20});
  CHECK(clamp_reactive_bounds(100, 60, 80) == P{50, 50});
  CHECK(clamp_reactive_bounds(100, -90, -70) == P{-50, -50});
}

TEST_CASE("cost moments") {
  const int n = 100000;
  Rng rng(7);
  CHECK(sample_cost(FuelType::SYNC, rng) == 0);
  Moments nuc = moments(n, [&] { return sample_cost(FuelType::NUC, rng); });
  CHECK(nuc.mean == doctest::Approx(7.2504).epsilon(0.02));
  CHECK(nuc.std == doctest::Approx(0.7534).epsilon(0.02));
  Moments pel = moments(n, [&] { return sample_cost(FuelType::PEL, rng); });
  CHECK(pel.mean == doctest::Approx(111.3398).epsilon(0.01));
  CHECK(pel.std == doctest::Approx(9.6736).epsilon(0.02));
  Moments ng = moments(n, [&] { return sample_cost(FuelType::NG, rng); });
  CHECK(ng.mean == doctest::Approx(34.2731).epsilon(0.02));
  CHECK(ng.min >= 0);
  Moments cow = moments(n, [&] { return sample_cost(FuelType::COW, rng); });
  CHECK(cow.mean == doctest::Approx(24.7919).epsilon(0.02));
  CHECK(cow.min >= 0);
}

TEST_CASE("fuel price basis scales by heat rate") {
  CompletionConfig cfg = default_completion_config();
  cfg.cost_per_mmbtu = true;
  Rng a(8), b(8);
  double per_mwh = sample_cost(FuelType::COW, a);
  CHECK(sample_cost(FuelType::COW, b, cfg) == doctest::Approx(per_mwh * 10.493));
}

TEST_CASE("statistical thermal limit") {
  CHECK(*thermal_limit_stat(0.1, 0.1, 100) == doctest::Approx(0.616664715268767).epsilon(1e-9));
  CHECK(*thermal_limit_stat(0.01, 0.1, 100) == doctest::Approx(1.850329612917979).epsilon(1e-9));
  CHECK(*thermal_limit_stat(0.01, 0.1, 100) == doctest::Approx(1.8504).epsilon(1e-4));
  CHECK(*thermal_limit_stat(0.01, 0.05, 230) == doctest::Approx(2 * *thermal_limit_stat(0.01, 0.05, 115)));
  CHECK_FALSE(thermal_limit_stat(0, 0.1, 100));
  CHECK_FALSE(thermal_limit_stat(0.01, 0.1, 0));
  CHECK_FALSE(thermal_limit_stat(0.01, -0.1, 100));
}

TEST_CASE("upper-bound thermal limit") {
  CHECK(thermal_limit_ub(10, 1, 1, 0) == 0);
  CHECK(thermal_limit_ub(10, 1.1, 1.1, std::numbers::pi / 6) == doctest::Approx(6.263420891481002).epsilon(1e-9));
  CHECK(thermal_limit_ub(10, 1.1, 0, 0.3) == doctest::Approx(12.1));
}

TEST_CASE("upper-bound limit covers every admissible series flow") {
  NetworkCase net = load_case("case14_ieee");
  for (auto& br : net.branches) {
    br.charging = 0;
    br.transformer = 1;
  }
  AcopfProblem prob = build_acopf(net, FlowLimitMode::none);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    OperatingPoint pt = prob.point(random_interior_point(prob, seed));
    for (const auto& br : net.branches) {
      int i = net.bus_index(br.from), j = net.bus_index(br.to);
      if (pt.va[i] - pt.va[j] < br.angle_min || pt.va[i] - pt.va[j] > br.angle_max) {
        continue;
      }
      double theta = std::max(std::abs(br.angle_min), std::abs(br.angle_max));
      double limit = thermal_limit_ub(std::abs(br.series_admittance), net.buses[i].v_max, net.buses[j].v_max, theta);
      CHECK(std::abs(branch_flow(net, pt, br.id, Direction::from)) <= limit + 1e-12);
    }
  }
}

TEST_CASE("angle bounds") {
  NetworkCase net = load_case("case5_pjm");
  NetworkCase once = apply_angle_bounds(net, 30);
  for (const auto& br : once.branches) {
    CHECK(br.angle_min == doctest::Approx(-std::numbers::pi / 6));
    CHECK(br.angle_max == doctest::Approx(std::numbers::pi / 6));
  }
  NetworkCase twice = apply_angle_bounds(once, 30);
  for (size_t k = 0; k < once.branches.size(); ++k) {
    CHECK(twice.branches[k].angle_max == once.branches[k].angle_max);
  }
  CHECK_THROWS(apply_angle_bounds(net, 0));
  CHECK_THROWS(apply_angle_bounds(net, 90));

  SolveReport wide = solve(build_acopf(once));
  SolveReport tight = solve(build_acopf(apply_angle_bounds(net, 5)));
  REQUIRE(wide.status == SolveStatus::optimal);
  REQUIRE(tight.status == SolveStatus::optimal);
  CHECK(tight.objective >= wide.objective * (1 - 1e-8));
}

TEST_CASE("empty plan is the identity") {
  NetworkCase net = load_case("case14_ieee");
  CompletionResult out = complete_case(net, CompletionPlan{});
  CHECK(out.report.empty());
  RawCase raw = read_case(case_path("case14_ieee"));
  CHECK(apply_network(raw, out.net) == apply_network(raw, net));
}

TEST_CASE("14-bus plan fills every limit and cost") {
  NetworkCase net = stripped_case14();
  CompletionPlan plan = load_plan(std::filesystem::path(OPFBENCH_DATA_DIR) / "plans" / "case14_ieee.plan");
  CompletionResult out = complete_case(net, plan);
  for (const auto& br : out.net.branches) {
    REQUIRE(br.s_max);
    CHECK(std::isfinite(*br.s_max));
    CHECK(*br.s_max > 0);
  }
  REQUIRE(out.fuels.size() == net.gens.size());
  for (size_t k = 0; k < net.gens.size(); ++k) {
    const auto& g = out.net.gens[k];
    CHECK(g.c2 == 0);
    CHECK(g.c0 == 0);
    CHECK((out.fuels[k] == FuelType::SYNC) == (g.c1 == 0));
    if (g.p_max > 0) {
      CHECK(g.q_max <= 0.5 * g.p_max + 1e-12);
      CHECK(g.q_min >= -0.5 * g.p_max - 1e-12);
    }
  }
  // the IEEE 14-bus data carries no nominal voltages, so every limit is TL-UB
  int ub = 0;
  for (const auto& e : out.report) {
    ub += e.model == "TL-UB";
  }
  CHECK(ub == static_cast<int>(net.branches.size()));

  RawCase raw = apply_network(read_case(case_path("case14_ieee")), out.net);
  RawCase again = parse_case(write_case(raw));
  for (size_t k = 0; k < again.branch_rows.size(); ++k) {
    CHECK(again.branch_rows[k].rate_a == doctest::Approx(*out.net.branches[k].s_max * 100));
  }
  CHECK(build_network(again).branches.size() == net.branches.size());
}

TEST_CASE("statistical limits where nominal voltages match") {
  NetworkCase net = stripped_case14();
  for (auto& b : net.buses) {
    b.base_kv = b.id <= 5 ? 132 : 33;
  }
  CompletionPlan plan;
  plan.tl_stat = true;
  plan.angle_bound_deg = 30;
  CompletionResult out = complete_case(net, plan);
  for (const auto& e : out.report) {
    const Branch& br = out.net.branches[static_cast<size_t>(e.id)];
    bool same_kv = net.buses[net.bus_index(br.from)].base_kv == net.buses[net.bus_index(br.to)].base_kv;
    CAPTURE(e.id);
    CHECK(e.model == (same_kv && br.r > 0 ? "TL-Stat" : "TL-UB"));
    if (e.model == "TL-Stat") {
      CHECK(e.new_value == doctest::Approx(*thermal_limit_stat(br.r, br.x, net.buses[net.bus_index(br.from)].base_kv) * 100));
    }
  }
}

TEST_CASE("completion is seeded") {
  NetworkCase net = stripped_case14();
  CompletionPlan plan = load_plan(std::filesystem::path(OPFBENCH_DATA_DIR) / "plans" / "case14_ieee.plan");
  CHECK(provenance_json(complete_case(net, plan)) == provenance_json(complete_case(net, plan)));
  CompletionPlan other = plan;
  other.seed = plan.seed + 1;
  CHECK(provenance_json(complete_case(net, plan)) != provenance_json(complete_case(net, other)));
}

TEST_CASE("thermal models need an angle bound") {
  CompletionPlan plan;
  plan.tl_ub = true;
  CHECK_THROWS(complete_case(stripped_case14(), plan));
}

TEST_CASE("provenance records old and new values") {
  CompletionPlan plan;
  plan.tl_ub = true;
  plan.angle_bound_deg = 30;
  CompletionResult out = complete_case(stripped_case14(), plan);
  REQUIRE(out.report.size() == 20);
  CHECK(out.report[0].element == "branch");
  CHECK(out.report[0].field == "s_max");
  CHECK(out.report[0].model == "TL-UB");
  CHECK(out.report[0].new_value == doctest::Approx(*out.net.branches[0].s_max * 100));
  CHECK(provenance_json(out).find("\"TL-UB\"") != std::string::npos);
}

TEST_CASE("shipped 300-bus case limits every branch") {
  RawCase shipped = read_case(case_path("case300_ieee"));
  NetworkCase net = build_network(shipped);
  for (const auto& br : net.branches) {
    CHECK(br.s_max);
  }
}

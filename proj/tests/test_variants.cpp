#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "opfbench/variants.hpp"

using namespace opfbench;

namespace {

double ac_objective(const NetworkCase& net) {
  SolveReport rep = solve(build_acopf(net));
  REQUIRE(rep.status == SolveStatus::optimal);
  return rep.objective;
}

std::string text_of(const NetworkCase& net, const std::string& fixture) {
  return write_case(apply_network(read_case(case_path(fixture)), net));
}

}  // namespace

TEST_CASE("kind names") {
  CHECK(parse_variant_kind("api") == VariantKind::api);
  CHECK(parse_variant_kind("SAD") == VariantKind::sad);
  CHECK_THROWS(parse_variant_kind("xyz"));
  CHECK(variant_name("case5_pjm", VariantKind::api) == "case5_pjm__api");
  CHECK(variant_name("case3", VariantKind::sad) == "case3__sad");
}

TEST_CASE("single line loadability") {
  NetworkCase net = parse_network(two_bus_text(0, 0.1, 0, 100, 50, 1000));
  LoadabilityResult lr = max_loadability(net);
  CHECK(lr.alpha == doctest::Approx(2).epsilon(0.01));
  CHECK(lr.alpha <= 2);
}

TEST_CASE("thermally binding base case has unit loadability") {
  // 0.99 p.u. of demand behind a 1 p.u. line
  NetworkCase net = parse_network(two_bus_text(0, 0.1, 0, 100, 99, 1000));
  CHECK(max_loadability(net).alpha == doctest::Approx(1).epsilon(0.01));
}

TEST_CASE("zero demand has no loadability") {
  NetworkCase net = parse_network(two_bus_text(0.01, 0.1, 0, 100, 0, 1000));
  CHECK_THROWS_AS(max_loadability(net), VariantError);
}

TEST_CASE("active demand scaling is exact") {
  NetworkCase net = load_case("case14_ieee");
  const double alpha = 1.2345678;
  NetworkCase scaled = scale_active_demand(net, alpha);
  for (size_t i = 0; i < net.buses.size(); ++i) {
    CHECK(scaled.buses[i].demand.real() == alpha * net.buses[i].demand.real());
    CHECK(scaled.buses[i].demand.imag() == net.buses[i].demand.imag());
  }
}

TEST_CASE("API variant of the 5-bus case") {
  NetworkCase net = load_case("case5_pjm");
  VariantConfig cfg;
  cfg.seed = 1;
  VariantResult a = generate_api(net, cfg);
  CHECK(a.net.name == "case5_pjm__api");
  CHECK(a.alpha > 1);
  CHECK(a.alpha == doctest::Approx(a.alpha_max * (1 - cfg.load_backoff)));
  CHECK_NOTHROW(validate(a.net));
  CHECK(ac_feasible(a.net, {}, 1e-6));
  CHECK(ac_objective(a.net) > ac_objective(net));
  for (size_t i = 0; i < net.buses.size(); ++i) {
    CHECK(a.net.buses[i].demand.real() == a.alpha * net.buses[i].demand.real());
    CHECK(a.net.buses[i].demand.imag() == net.buses[i].demand.imag());
  }

  VariantResult b = generate_api(net, cfg);
  CHECK(text_of(a.net, "case5_pjm") == text_of(b.net, "case5_pjm"));
  CHECK(a.log == b.log);
}

TEST_CASE("API with unit scaling only refreshes binding generators") {
  NetworkCase net = load_case("case5_pjm");
  VariantConfig cfg;
  cfg.alpha = 1.0;
  VariantResult out = generate_api(net, cfg);
  CHECK(out.alpha == 1);
  for (size_t i = 0; i < net.buses.size(); ++i) {
    CHECK(out.net.buses[i].demand == net.buses[i].demand);
  }
  for (size_t k = 0; k < net.gens.size(); ++k) {
    if (out.net.gens[k].p_max != net.gens[k].p_max) {
      CHECK(out.net.gens[k].p_max > net.gens[k].p_max);
    } else {
      CHECK(out.net.gens[k].c1 == net.gens[k].c1);
    }
  }
  CHECK(out.net.branches.size() == net.branches.size());
}

TEST_CASE("SAD bracket on the 3-bus case") {
  NetworkCase net = load_case("case3_lmbd");
  VariantConfig cfg;
  cfg.kind = VariantKind::sad;
  VariantResult out = generate_variant(net, cfg);
  CHECK(out.net.name == "case3_lmbd__sad");
  CHECK(out.theta > out.theta_infeasible);
  CHECK(out.theta - out.theta_infeasible <= cfg.angle_tolerance);
  CHECK(out.violation_at_theta <= cfg.feasibility_threshold);
  CHECK(out.violation_at_infeasible > cfg.feasibility_threshold);
  CHECK(ac_feasible(out.net, {}, cfg.feasibility_threshold));
  CHECK_FALSE(ac_feasible(apply_angle_bounds(net, rad2deg(out.theta_infeasible)), {}, cfg.feasibility_threshold));
  for (const auto& br : out.net.branches) {
    CHECK(br.angle_max == out.theta);
    CHECK(br.angle_min == -out.theta);
  }
  CHECK(ac_objective(out.net) >= ac_objective(net) * (1 - 1e-8));
}

TEST_CASE("SAD respects the observed angle spread") {
  NetworkCase net = parse_network(two_bus_text(0.01, 0.1, 0, 500, 10, 1000));
  AcopfProblem prob = build_acopf(net);
  SolveReport rep = solve(prob);
  REQUIRE(rep.status == SolveStatus::optimal);
  OperatingPoint pt = prob.point(rep.x);
  double spread = std::abs(pt.va[0] - pt.va[1]);
  REQUIRE(spread <= deg2rad(1));
  VariantConfig cfg;
  cfg.kind = VariantKind::sad;
  VariantResult out = generate_sad(net, cfg);
  CHECK(out.theta <= deg2rad(1) + cfg.angle_tolerance);
  CHECK(out.theta >= spread - cfg.angle_tolerance);
}

TEST_CASE("SAD needs a feasible base") {
  VariantConfig cfg;
  cfg.kind = VariantKind::sad;
  CHECK_THROWS_AS(generate_sad(load_case("case2_infeasible"), cfg), VariantError);
  cfg.angle_tolerance = 0;
  CHECK_THROWS(generate_sad(load_case("case3_lmbd"), cfg));
}

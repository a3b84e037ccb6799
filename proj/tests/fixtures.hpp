#pragma once

#include <filesystem>
#include <string>

#include "opfbench/matpower_io.hpp"
#include "opfbench/network.hpp"

inline std::filesystem::path case_path(const std::string& name) {
  return std::filesystem::path(OPFBENCH_DATA_DIR) / "cases" / (name + ".m");
}

inline opfbench::NetworkCase load_case(const std::string& name) {
  return opfbench::build_network(opfbench::read_case(case_path(name)));
}

inline opfbench::NetworkCase parse_network(const std::string& text) {
  return opfbench::build_network(opfbench::parse_case(text));
}

// Two buses joined by one line; the generator sits on bus 1.
inline std::string two_bus_text(double r, double x, double b, double rate_mva, double pd_mw, double pmax_mw,
                                double angle_deg = 30) {
  auto num = [](double v) { return std::to_string(v); };
  return "function mpc = two_bus\nmpc.baseMVA = 100;\nmpc.bus = [\n"
         "1 3 0 0 0 0 1 1 0 230 1 1.1 0.9;\n"
         "2 1 " + num(pd_mw) + " 0 0 0 1 1 0 230 1 1.1 0.9;\n];\n"
         "mpc.gen = [\n1 0 0 500 -500 1 100 1 " + num(pmax_mw) + " 0;\n];\n"
         "mpc.gencost = [\n2 0 0 3 0 10 0;\n];\n"
         "mpc.branch = [\n1 2 " + num(r) + " " + num(x) + " " + num(b) + " " + num(rate_mva) + " 0 0 0 0 1 " +
         num(-angle_deg) + " " + num(angle_deg) + ";\n];\n";
}

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opfbench/acopf.hpp"
#include "opfbench/ipm.hpp"

namespace opfbench {

enum class RunMode { ac, soc, both };

RunMode parse_run_mode(const std::string& text);
std::string to_string(RunMode mode);

struct GapRecord {
  std::string name;
  int buses = 0, branches = 0;
  std::optional<SolveStatus> ac_status, soc_status;  // empty when not run
  std::optional<double> ac_objective, soc_objective, gap;  // $/h, $/h, percent
  double ac_runtime = 0, soc_runtime = 0;                   // seconds
  std::string error;  // load or solver exception, empty when none

  bool operator==(const GapRecord&) const = default;
};

struct BenchOptions {
  RunMode mode = RunMode::both;
  FlowLimitMode flow_limit = FlowLimitMode::apparent_power;
  SolverOptions solver;
  int jobs = 1;
};

// 100 (ac - relax) / ac; throws std::domain_error when ac <= 0.
double optimality_gap(double ac, double relax);

GapRecord benchmark_case(const NetworkCase& net, const BenchOptions& opts);
GapRecord benchmark_file(const std::filesystem::path& path, const BenchOptions& opts);
// Records come back in input order whatever the number of jobs.
std::vector<GapRecord> run_benchmark(const std::vector<std::filesystem::path>& paths, const BenchOptions& opts);

std::string format_csv(const std::vector<GapRecord>& records);
std::vector<GapRecord> parse_csv(const std::string& text);
std::string format_table(const std::vector<GapRecord>& records);

// Nonzero iff a record hit a numerical failure, a load or solver exception,
// or a gap below -0.01 %.
int bench_exit_code(const std::vector<GapRecord>& records);

}  // namespace opfbench

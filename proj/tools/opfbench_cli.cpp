#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "opfbench/bench.hpp"
#include "opfbench/completion.hpp"
#include "opfbench/soc.hpp"
#include "opfbench/variants.hpp"

using namespace opfbench;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string mode = "both";
  std::string flow_limit = "apparent";
  double tol = 1e-8;
  std::optional<std::uint64_t> seed;
  std::string out = "table";
  int jobs = 1;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

int run_bench(const std::vector<std::string>& files, const Common& c) {
  BenchOptions opts;
  opts.mode = parse_run_mode(c.mode);
  opts.flow_limit = parse_flow_limit_mode(c.flow_limit);
  opts.solver.tolerance = c.tol;
  opts.jobs = c.jobs;
  auto records = run_benchmark({files.begin(), files.end()}, opts);
  std::cout << (c.out == "csv" ? format_csv(records) : format_table(records));
  for (const auto& r : records) {
    if (!r.error.empty()) {
      std::cerr << r.name << ": " << r.error << "\n";
    }
  }
  return bench_exit_code(records);
}

int run_complete(const std::string& file, const std::string& plan_path, const std::string& config_path,
                 const std::string& output, const Common& c) {
  RawCase raw = read_case(file);
  NetworkCase net = build_network(raw);
  CompletionPlan plan = load_plan(plan_path);
  if (c.seed) {
    plan.seed = *c.seed;
  }
  CompletionConfig config = config_path.empty() ? default_completion_config() : load_completion_config(config_path);
  CompletionResult result = complete_case(net, plan, config);
  RawCase done = apply_network(raw, result.net);
  fs::path out = output.empty() ? fs::path(raw.name + "_completed.m") : fs::path(output);
  done.name = out.stem().string();
  save_case(done, out);
  fs::path report = out;
  report.replace_extension(".provenance.json");
  write_text(report, provenance_json(result));
  std::cout << fmt::format("wrote {} ({} changes), {}\n", out.string(), result.report.size(), report.string());
  return 0;
}

int run_variant(const std::string& file, const std::string& kind, double angle_tol, const std::string& outdir,
                const Common& c) {
  RawCase raw = read_case(file);
  NetworkCase net = build_network(raw);
  VariantConfig cfg;
  cfg.kind = parse_variant_kind(kind);
  cfg.angle_tolerance = angle_tol;
  cfg.solver.tolerance = c.tol;
  cfg.seed = c.seed.value_or(0);
  VariantResult result = generate_variant(net, cfg);
  RawCase done = apply_network(raw, result.net);
  done.name = result.net.name;
  fs::path dir = outdir.empty() ? fs::path(".") : fs::path(outdir);
  fs::create_directories(dir);
  fs::path out = dir / (done.name + ".m");
  save_case(done, out);
  std::string log;
  for (const auto& line : result.log) {
    log += line + "\n";
  }
  write_text(dir / (done.name + ".log"), log);
  std::cout << log << "wrote " << out.string() << "\n";
  return 0;
}

void dump_ac(const AcopfProblem& prob, const SolveReport& rep) {
  const auto& net = prob.network();
  const double base = net.base_mva;
  OperatingPoint pt = prob.point(rep.x);
  std::cout << "bus        vm        va_deg\n";
  for (size_t i = 0; i < net.buses.size(); ++i) {
    std::cout << fmt::format("{:<6} {:>10.6f} {:>12.6f}\n", net.buses[i].id, pt.vm[i], rad2deg(pt.va[i]));
  }
  std::cout << "gen  bus         pg_mw       qg_mvar\n";
  for (size_t k = 0; k < net.gens.size(); ++k) {
    std::cout << fmt::format("{:<4} {:<6} {:>12.4f} {:>12.4f}\n", net.gens[k].id + 1, net.gens[k].bus,
                             pt.pg[k] * base, pt.qg[k] * base);
  }
  std::cout << "branch  from  to       p_from      q_from        p_to        q_to\n";
  for (const auto& br : net.branches) {
    Complex sf = branch_flow(net, pt, br.id, Direction::from) * base;
    Complex st = branch_flow(net, pt, br.id, Direction::to) * base;
    std::cout << fmt::format("{:<7} {:<5} {:<5} {:>11.4f} {:>11.4f} {:>11.4f} {:>11.4f}\n", br.id + 1, br.from, br.to,
                             sf.real(), sf.imag(), st.real(), st.imag());
  }
}

void dump_soc(const SocProblem& prob, const SolveReport& rep) {
  const auto& net = prob.network();
  const double base = net.base_mva;
  SocVariables v = prob.variables(rep.x);
  std::cout << "bus        w\n";
  for (size_t i = 0; i < net.buses.size(); ++i) {
    std::cout << fmt::format("{:<6} {:>10.6f}\n", net.buses[i].id, v.w[i]);
  }
  std::cout << "gen  bus         pg_mw       qg_mvar\n";
  for (size_t k = 0; k < net.gens.size(); ++k) {
    std::cout << fmt::format("{:<4} {:<6} {:>12.4f} {:>12.4f}\n", net.gens[k].id + 1, net.gens[k].bus,
                             v.pg[k] * base, v.qg[k] * base);
  }
  std::cout << "branch  from  to       p_from      q_from        p_to        q_to\n";
  for (size_t l = 0; l < net.branches.size(); ++l) {
    const auto& br = net.branches[l];
    std::cout << fmt::format("{:<7} {:<5} {:<5} {:>11.4f} {:>11.4f} {:>11.4f} {:>11.4f}\n", br.id + 1, br.from, br.to,
                             v.p_from[l] * base, v.q_from[l] * base, v.p_to[l] * base, v.q_to[l] * base);
  }
}

int run_solve(const std::string& file, const Common& c) {
  NetworkCase net = build_network(read_case(file));
  SolverOptions opts;
  opts.tolerance = c.tol;
  RunMode mode = parse_run_mode(c.mode);
  int code = 0;
  auto header = [&](const char* what, const SolveReport& rep) {
    std::cout << fmt::format("{} {}: status {}, objective {:.6f} $/h, {} iterations, {:.3f} s, max violation {:.2e}\n",
                             what, net.name, to_string(rep.status), rep.objective, rep.iterations, rep.wall_time,
                             rep.max_violation);
    if (rep.status == SolveStatus::numerical_failure) {
      code = 1;
    }
  };
  if (mode != RunMode::soc) {
    AcopfProblem prob = build_acopf(net, parse_flow_limit_mode(c.flow_limit));
    SolveReport rep = solve(prob, opts);
    header("AC", rep);
    dump_ac(prob, rep);
  }
  if (mode != RunMode::ac) {
    SocProblem prob = build_soc(net);
    SolveReport rep = solve(prob, opts);
    header("SOC", rep);
    dump_soc(prob, rep);
  }
  return code;
}

void add_common(CLI::App* app, Common& c, bool with_mode) {
  if (with_mode) {
    app->add_option("--mode", c.mode, "ac, soc or both")->check(CLI::IsMember({"ac", "soc", "both"}));
    app->add_option("--flow-limit", c.flow_limit, "AC branch limit: apparent, current, both or none")
        ->check(CLI::IsMember({"apparent", "current", "both", "none"}));
  }
  app->add_option("--tol", c.tol, "solver tolerance")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "RNG seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AC-OPF benchmark tools"};
  app.require_subcommand(1);
  Common c;

  std::vector<std::string> bench_files;
  auto* bench = app.add_subcommand("bench", "AC and SOC solves with optimality gaps");
  bench->add_option("cases", bench_files, "Matpower case files");
  add_common(bench, c, true);
  bench->add_option("--out", c.out, "table or csv")->check(CLI::IsMember({"table", "csv"}));
  bench->add_option("--jobs", c.jobs, "parallel workers")->check(CLI::PositiveNumber);

  std::string case_file, plan_file, config_file, output;
  auto* complete = app.add_subcommand("complete", "fill missing case data from a plan file");
  complete->add_option("case", case_file, "Matpower case file")->required();
  complete->add_option("--plan", plan_file, "completion plan")->required();
  complete->add_option("--config", config_file, "fuel bin configuration");
  complete->add_option("-o,--output", output, "output case file");
  add_common(complete, c, false);

  std::string kind = "api";
  double angle_tol = 1e-3;
  auto* variant = app.add_subcommand("variant", "generate an API or SAD stress variant");
  variant->add_option("case", case_file, "Matpower case file")->required();
  variant->add_option("--kind", kind, "api or sad")->check(CLI::IsMember({"api", "sad"}));
  variant->add_option("--angle-tol", angle_tol, "SAD bisection width in radians")->check(CLI::PositiveNumber);
  variant->add_option("-o,--output-dir", output, "output directory");
  add_common(variant, c, false);

  auto* solve_cmd = app.add_subcommand("solve", "solve one case and print the full solution");
  solve_cmd->add_option("case", case_file, "Matpower case file")->required();
  add_common(solve_cmd, c, true);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*bench) return run_bench(bench_files, c);
    if (*complete) return run_complete(case_file, plan_file, config_file, output, c);
    if (*variant) return run_variant(case_file, kind, angle_tol, output, c);
    if (*solve_cmd) return run_solve(case_file, c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

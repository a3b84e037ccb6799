#include "opfbench/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "opfbench/soc.hpp"

namespace opfbench {

namespace {

constexpr const char* csv_header =
    "case,buses,branches,ac_status,ac_objective,ac_runtime,soc_status,soc_objective,soc_runtime,gap,error";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

double parse_double(const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number in CSV: " + s);
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) {
    return std::nullopt;
  }
  return parse_double(s);
}

std::string status_cell(const std::optional<SolveStatus>& s) { return s ? to_string(*s) : std::string(); }

std::optional<SolveStatus> parse_status(const std::string& s) {
  if (s.empty()) {
    return std::nullopt;
  }
  return parse_solve_status(s);
}

std::string runtime_cell(double seconds) { return seconds < 1 ? "<1" : fmt::format("{:.0f}", seconds); }

}  // namespace

RunMode parse_run_mode(const std::string& text) {
  if (text == "ac") return RunMode::ac;
  if (text == "soc") return RunMode::soc;
  if (text == "both") return RunMode::both;
  throw std::invalid_argument("unknown mode " + text);
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::ac: return "ac";
    case RunMode::soc: return "soc";
    case RunMode::both: return "both";
  }
  return "?";
}

double optimality_gap(double ac, double relax) {
  if (!(ac > 0)) {
    throw std::domain_error("optimality gap is undefined for a nonpositive AC objective");
  }
  return 100 * (ac - relax) / ac;
}

GapRecord benchmark_case(const NetworkCase& net, const BenchOptions& opts) {
  GapRecord rec;
  rec.name = net.name;
  rec.buses = static_cast<int>(net.buses.size());
  rec.branches = static_cast<int>(net.branches.size());
  try {
    if (opts.mode != RunMode::soc) {
      SolveReport r = solve(build_acopf(net, opts.flow_limit), opts.solver);
      rec.ac_status = r.status;
      rec.ac_runtime = r.wall_time;
      if (r.status == SolveStatus::optimal) {
        rec.ac_objective = r.objective;
      }
    }
    if (opts.mode != RunMode::ac) {
      SolveReport r = solve(build_soc(net), opts.solver);
      rec.soc_status = r.status;
      rec.soc_runtime = r.wall_time;
      if (r.status == SolveStatus::optimal) {
        rec.soc_objective = r.objective;
      }
    }
    if (rec.ac_objective && rec.soc_objective && *rec.ac_objective > 0) {
      rec.gap = optimality_gap(*rec.ac_objective, *rec.soc_objective);
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

GapRecord benchmark_file(const std::filesystem::path& path, const BenchOptions& opts) {
  NetworkCase net;
  try {
    net = build_network(read_case(path));
    validate(net);
  } catch (const std::exception& e) {
    GapRecord rec;
    rec.name = path.stem().string();
    rec.error = e.what();
    return rec;
  }
  return benchmark_case(net, opts);
}

std::vector<GapRecord> run_benchmark(const std::vector<std::filesystem::path>& paths, const BenchOptions& opts) {
  std::vector<GapRecord> records(paths.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k; (k = next++) < paths.size();) {
      records[k] = benchmark_file(paths[k], opts);
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(paths.size())));
  std::vector<std::jthread> pool;
  for (int j = 1; j < jobs; ++j) {
    pool.emplace_back(worker);
  }
  worker();
  return records;
}

std::string format_csv(const std::vector<GapRecord>& records) {
  std::string out = std::string(csv_header) + "\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(r.name), r.buses, r.branches,
                       status_cell(r.ac_status), csv_number(r.ac_objective), r.ac_runtime, status_cell(r.soc_status),
                       csv_number(r.soc_objective), r.soc_runtime, csv_number(r.gap), csv_field(r.error));
  }
  return out;
}

std::vector<GapRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header) {
    throw std::invalid_argument("CSV header mismatch");
  }
  std::vector<GapRecord> out;
  while (std::getline(in, line)) {
    // a quoted field may span lines
    while (std::count(line.begin(), line.end(), '"') % 2 == 1) {
      std::string more;
      if (!std::getline(in, more)) {
        throw std::invalid_argument("unterminated quote in CSV");
      }
      line += "\n" + more;
    }
    if (line.empty()) {
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 11) {
      throw std::invalid_argument("CSV row needs 11 fields: " + line);
    }
    GapRecord r;
    r.name = f[0];
    r.buses = std::stoi(f[1]);
    r.branches = std::stoi(f[2]);
    r.ac_status = parse_status(f[3]);
    r.ac_objective = parse_optional(f[4]);
    r.ac_runtime = parse_double(f[5]);
    r.soc_status = parse_status(f[6]);
    r.soc_objective = parse_optional(f[7]);
    r.soc_runtime = parse_double(f[8]);
    r.gap = parse_optional(f[9]);
    r.error = f[10];
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_table(const std::vector<GapRecord>& records) {
  std::vector<std::array<std::string, 7>> rows;
  rows.push_back({"Case", "|N|", "|E|", "AC ($/h)", "Gap (%)", "AC (s)", "SOC (s)"});
  for (const auto& r : records) {
    std::string ac = r.ac_objective ? fmt::format("{:.4e}", *r.ac_objective) : r.ac_status ? "n.s." : "-";
    std::string gap = r.soc_status == SolveStatus::infeasible_certified ? "inf."
                      : r.gap                                          ? fmt::format("{:.2f}", *r.gap)
                                                                       : "-";
    rows.push_back({r.name, std::to_string(r.buses), std::to_string(r.branches), ac, gap, r.ac_status ? runtime_cell(r.ac_runtime) : "-",
                    r.soc_status ? runtime_cell(r.soc_runtime) : "-"});
  }
  std::array<size_t, 7> width{};
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line = fmt::format("{:<{}}", row[0], width[0]);
    for (size_t c = 1; c < row.size(); ++c) {
      line += fmt::format("  {:>{}}", row[c], width[c]);
    }
    out += line + "\n";
  }
  return out;
}

int bench_exit_code(const std::vector<GapRecord>& records) {
  for (const auto& r : records) {
    if (!r.error.empty() || r.ac_status == SolveStatus::numerical_failure ||
        r.soc_status == SolveStatus::numerical_failure || (r.gap && *r.gap < -0.01)) {
      return 1;
    }
  }
  return 0;
}

}  // namespace opfbench

#include "opfbench/completion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace opfbench {

namespace {

constexpr int max_draws = 1'000'000;

struct CapacityModel {
  bool normal;
  double a, b;  // rate for exponential; mean and std for normal
};

// Indexed by FuelType (PEL, NG, COW, NUC).
constexpr CapacityModel capacity_models[4] = {
    {false, 0.023254, 0},
    {false, 0.009188, 0},
    {false, 0.003201, 0},
    {true, 1044.56, 219.27},
};

// Mirrors data/fuel_bins.conf. Bin edges and probabilities are illustrative
// defaults, not fitted values.
constexpr const char* default_config_text = R"(
bin = 0 25 0.35 0.55 0.10 0.00
bin = 25 100 0.15 0.65 0.20 0.00
bin = 100 300 0.05 0.55 0.40 0.00
bin = 300 700 0.02 0.38 0.55 0.05
bin = 700 1000 0.00 0.30 0.50 0.20
bin = 1000 inf 0.00 0.15 0.35 0.50
heat_rate.PEL = 10811
heat_rate.NG = 7870
heat_rate.COW = 10493
heat_rate.NUC = 10459
cost_basis = per_mwh
)";

constexpr double cost_mean[4] = {111.3398, 34.2731, 24.7919, 7.2504};
constexpr double cost_std[4] = {9.6736, 10.9810, 8.0866, 0.7534};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// key = value lines, '#' comments. Repeated keys keep every value in order.
std::vector<std::pair<std::string, std::string>> key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) {
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(n) + ": expected key = value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

double to_number(const std::string& s) {
  if (s == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) {
    throw std::invalid_argument("not a number: " + s);
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "on" || s == "1") {
    return true;
  }
  if (s == "false" || s == "off" || s == "0") {
    return false;
  }
  throw std::invalid_argument("not a flag: " + s);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int fuel_slot(FuelType fuel) {
  if (fuel == FuelType::SYNC) {
    throw std::invalid_argument("SYNC has no sampling model");
  }
  return static_cast<int>(fuel);
}

}  // namespace

std::string to_string(FuelType fuel) {
  switch (fuel) {
    case FuelType::PEL: return "PEL";
    case FuelType::NG: return "NG";
    case FuelType::COW: return "COW";
    case FuelType::NUC: return "NUC";
    case FuelType::SYNC: return "SYNC";
  }
  return "?";
}

FuelType parse_fuel(const std::string& text) {
  for (auto f : {FuelType::PEL, FuelType::NG, FuelType::COW, FuelType::NUC, FuelType::SYNC}) {
    if (to_string(f) == text) {
      return f;
    }
  }
  throw std::invalid_argument("unknown fuel type " + text);
}

CompletionConfig default_completion_config() {
  return parse_completion_config(default_config_text);
}

CompletionConfig parse_completion_config(const std::string& text) {
  CompletionConfig cfg;
  for (const auto& [key, value] : key_values(text)) {
    if (key == "bin") {
      std::istringstream in(value);
      std::vector<std::string> parts;
      for (std::string p; in >> p;) {
        parts.push_back(p);
      }
      if (parts.size() != 6) {
        throw std::invalid_argument("bin needs lower upper PEL NG COW NUC");
      }
      FuelBin bin;
      bin.lower = to_number(parts[0]);
      bin.upper = to_number(parts[1]);
      for (int k = 0; k < 4; ++k) {
        bin.probability[k] = to_number(parts[2 + k]);
      }
      cfg.bins.push_back(bin);
    } else if (key.starts_with("heat_rate.")) {
      cfg.heat_rate[fuel_slot(parse_fuel(key.substr(10)))] = to_number(value);
    } else if (key == "cost_basis") {
      if (value != "per_mwh" && value != "per_mmbtu") {
        throw std::invalid_argument("cost_basis must be per_mwh or per_mmbtu");
      }
      cfg.cost_per_mmbtu = value == "per_mmbtu";
    } else {
      throw std::invalid_argument("unknown config key " + key);
    }
  }
  validate(cfg);
  return cfg;
}

CompletionConfig load_completion_config(const std::filesystem::path& path) {
  return parse_completion_config(read_file(path));
}

void validate(const CompletionConfig& config) {
  if (config.bins.empty()) {
    throw std::invalid_argument("config has no fuel bins");
  }
  double edge = 0;
  for (const auto& bin : config.bins) {
    if (bin.lower != edge || !(bin.upper > bin.lower)) {
      throw std::invalid_argument("fuel bins must partition (0, inf) in order");
    }
    double sum = 0;
    for (double p : bin.probability) {
      if (p < 0) {
        throw std::invalid_argument("negative bin probability");
      }
      sum += p;
    }
    if (std::abs(sum - 1) > 1e-9) {
      throw std::invalid_argument("bin probabilities must sum to 1");
    }
    edge = bin.upper;
  }
  if (!std::isinf(edge)) {
    throw std::invalid_argument("last fuel bin must extend to inf");
  }
}

CompletionPlan parse_plan(const std::string& text) {
  CompletionPlan plan;
  std::map<std::string, bool*> flags = {
      {"gf_stat", &plan.gf_stat}, {"ag_stat", &plan.ag_stat}, {"rg_am50", &plan.rg_am50},
      {"ac_stat", &plan.ac_stat}, {"tl_stat", &plan.tl_stat}, {"tl_ub", &plan.tl_ub},
  };
  for (const auto& [key, value] : key_values(text)) {
    if (auto it = flags.find(key); it != flags.end()) {
      *it->second = to_bool(value);
    } else if (key == "angle_bound") {
      plan.angle_bound_deg = to_number(value);
    } else if (key == "seed") {
      plan.seed = std::stoull(value);
    } else {
      throw std::invalid_argument("unknown plan key " + key);
    }
  }
  return plan;
}

CompletionPlan load_plan(const std::filesystem::path& path) { return parse_plan(read_file(path)); }

FuelType classify_fuel(double p_max_mw, double p_min_mw, const CompletionConfig& config, Rng& rng) {
  if (p_max_mw == 0 && p_min_mw == 0) {
    return FuelType::SYNC;
  }
  const FuelBin* bin = &config.bins.front();
  for (const auto& b : config.bins) {
    if (p_max_mw > b.lower && p_max_mw <= b.upper) {
      bin = &b;
      break;
    }
  }
  std::discrete_distribution<int> die(bin->probability.begin(), bin->probability.end());
  return static_cast<FuelType>(die(rng));
}

double sample_active_capacity(FuelType fuel, double current_mw, Rng& rng) {
  const auto& m = capacity_models[fuel_slot(fuel)];
  if (!m.normal) {
    // The exponential is memoryless: a draw conditioned on exceeding the
    // current value is that value plus a fresh draw, which is what rejection
    // would return without its unbounded tail cost.
    std::exponential_distribution<double> exponential(m.a);
    double draw = 0;
    while (!(draw > 0)) {
      draw = exponential(rng);
    }
    return std::max(current_mw, 0.0) + draw;
  }
  std::normal_distribution<double> normal(m.a, m.b);
  for (int k = 0; k < max_draws; ++k) {
    double draw = normal(rng);
    if (draw > current_mw) {
      return draw;
    }
  }
  throw SamplingError(to_string(fuel) + " capacity never exceeded " + std::to_string(current_mw) + " MW");
}

std::pair<double, double> clamp_reactive_bounds(double nameplate, double q_min, double q_max) {
  double half = 0.5 * nameplate;
  double lo = std::max(q_min, -half), hi = std::min(q_max, half);
  // Input range entirely outside the envelope: pin to the nearest edge.
  if (lo > hi) {
    return q_min > half ? std::pair{half, half} : std::pair{-half, -half};
  }
  return {lo, hi};
}

double sample_cost(FuelType fuel, Rng& rng, const CompletionConfig& config) {
  if (fuel == FuelType::SYNC) {
    return 0;
  }
  int k = fuel_slot(fuel);
  std::normal_distribution<double> normal(cost_mean[k], cost_std[k]);
  for (int n = 0; n < max_draws; ++n) {
    double draw = normal(rng);
    if (draw >= 0) {
      return config.cost_per_mmbtu ? draw * config.heat_rate[k] / 1000 : draw;
    }
  }
  throw SamplingError("cost draw for " + to_string(fuel) + " never nonnegative");
}

std::optional<double> thermal_limit_stat(double r, double x, double base_kv) {
  if (!(r > 0) || !(x / r > 0) || !(base_kv > 0)) {
    return std::nullopt;
  }
  return base_kv * std::exp(-5.0886) * std::pow(x / r, 0.4772);
}

double thermal_limit_ub(double y_mag, double vu_i, double vu_j, double angle_max) {
  double inner = vu_i * vu_i + vu_j * vu_j - 2 * vu_i * vu_j * std::cos(angle_max);
  return std::sqrt(vu_i * vu_i * y_mag * y_mag * std::max(inner, 0.0));
}

NetworkCase apply_angle_bounds(NetworkCase net, double bound_deg) {
  if (!(bound_deg > 0 && bound_deg < 90)) {
    throw std::invalid_argument("angle bound must lie in (0, 90) degrees");
  }
  double a = deg2rad(bound_deg);
  for (auto& br : net.branches) {
    br.angle_min = -a;
    br.angle_max = a;
  }
  return net;
}

CompletionResult complete_case(const NetworkCase& input, const CompletionPlan& plan,
                               const CompletionConfig& config) {
  if ((plan.tl_ub || plan.tl_stat) && !plan.angle_bound_deg) {
    throw std::invalid_argument("thermal limit models need the angle bound set in the plan");
  }
  validate(config);

  CompletionResult out;
  out.net = input;
  auto& net = out.net;
  const double base = net.base_mva;
  Rng rng(plan.seed);
  auto record = [&](std::string element, int id, std::string field, double before, double after,
                    std::string model, std::string note = {}) {
    out.report.push_back({std::move(element), id, std::move(field), before, after, std::move(model),
                          std::move(note)});
  };

  if (plan.gf_stat || plan.ag_stat || plan.ac_stat) {
    for (const auto& g : net.gens) {
      FuelType f = classify_fuel(g.p_max * base, g.p_min * base, config, rng);
      out.fuels.push_back(f);
      record("gen", g.id, "fuel", 0, 0, "GF-Stat", to_string(f));
    }
  }

  if (plan.ag_stat) {
    for (size_t k = 0; k < net.gens.size(); ++k) {
      auto& g = net.gens[k];
      if (out.fuels[k] == FuelType::SYNC) {
        continue;
      }
      double current = std::max(g.pg_setpoint * base, 0.0);
      double p_max = sample_active_capacity(out.fuels[k], current, rng) / base;
      record("gen", g.id, "p_max", g.p_max * base, p_max * base, "AG-Stat");
      g.p_max = p_max;
      if (g.p_min > g.p_max) {
        record("gen", g.id, "p_min", g.p_min * base, g.p_max * base, "AG-Stat");
        g.p_min = g.p_max;
      }
    }
  }

  if (plan.rg_am50) {
    for (auto& g : net.gens) {
      if (!(g.p_max > 0)) {
        continue;
      }
      auto [q_min, q_max] = clamp_reactive_bounds(g.p_max, g.q_min, g.q_max);
      if (q_min != g.q_min) {
        record("gen", g.id, "q_min", g.q_min * base, q_min * base, "RG-AM50");
      }
      if (q_max != g.q_max) {
        record("gen", g.id, "q_max", g.q_max * base, q_max * base, "RG-AM50");
      }
      g.q_min = q_min;
      g.q_max = q_max;
    }
  }

  if (plan.ac_stat) {
    for (size_t k = 0; k < net.gens.size(); ++k) {
      auto& g = net.gens[k];
      double c1 = sample_cost(out.fuels[k], rng, config) * base;
      record("gen", g.id, "c1", g.c1 / base, c1 / base, "AC-Stat");
      g.c2 = 0;
      g.c1 = c1;
      g.c0 = 0;
    }
  }

  if (plan.angle_bound_deg) {
    net = apply_angle_bounds(std::move(net), *plan.angle_bound_deg);
  }

  if (plan.tl_stat || plan.tl_ub) {
    for (auto& br : net.branches) {
      if (br.s_max) {
        continue;
      }
      const auto& bi = net.buses[net.bus_index(br.from)];
      const auto& bj = net.buses[net.bus_index(br.to)];
      std::optional<double> limit;
      std::string model;
      if (plan.tl_stat && bi.base_kv == bj.base_kv) {
        limit = thermal_limit_stat(br.r, br.x, bi.base_kv);
        model = "TL-Stat";
      }
      if (!limit) {
        double theta = std::max(std::abs(br.angle_min), std::abs(br.angle_max));
        limit = thermal_limit_ub(std::abs(br.series_admittance), bi.v_max, bj.v_max, theta);
        model = "TL-UB";
      }
      record("branch", br.id, "s_max", 0, *limit * base, model);
      br.s_max = limit;
    }
  }

  validate(net);
  return out;
}

std::string provenance_json(const CompletionResult& result) {
  nlohmann::json doc;
  doc["case"] = result.net.name;
  auto& changes = doc["changes"] = nlohmann::json::array();
  for (const auto& e : result.report) {
    nlohmann::json row = {{"element", e.element}, {"id", e.id}, {"field", e.field}, {"model", e.model}};
    if (e.note.empty()) {
      row["old"] = e.old_value;
      row["new"] = e.new_value;
    } else {
      row["value"] = e.note;
    }
    changes.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

}  // namespace opfbench

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "opfbench/network.hpp"

namespace opfbench {

using Rng = std::mt19937_64;

enum class FuelType { PEL, NG, COW, NUC, SYNC };

std::string to_string(FuelType fuel);
FuelType parse_fuel(const std::string& text);

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nameplate interval (lower, upper] in MW with probabilities for PEL, NG,
// COW, NUC in that order.
struct FuelBin {
  double lower = 0, upper = inf_mw;
  std::array<double, 4> probability{};

  static constexpr double inf_mw = std::numeric_limits<double>::infinity();
};

struct CompletionConfig {
  std::vector<FuelBin> bins;
  std::array<double, 4> heat_rate{10811, 7870, 10493, 10459};  // BTU/kWh
  // Cost draws are $/MWh by default; "per_mmbtu" multiplies them by the heat
  // rate in MMBtu/MWh.
  bool cost_per_mmbtu = false;
};

CompletionConfig default_completion_config();
CompletionConfig parse_completion_config(const std::string& text);
CompletionConfig load_completion_config(const std::filesystem::path& path);
// Throws std::invalid_argument when a bin does not sum to 1 or the bins do
// not partition (0, inf).
void validate(const CompletionConfig& config);

struct CompletionPlan {
  bool gf_stat = false;
  bool ag_stat = false;
  bool rg_am50 = false;
  bool ac_stat = false;
  bool tl_stat = false;
  bool tl_ub = false;
  std::optional<double> angle_bound_deg;
  std::uint64_t seed = 0;
};

CompletionPlan parse_plan(const std::string& text);
CompletionPlan load_plan(const std::filesystem::path& path);

FuelType classify_fuel(double p_max_mw, double p_min_mw, const CompletionConfig& config, Rng& rng);
double sample_active_capacity(FuelType fuel, double current_mw, Rng& rng);
std::pair<double, double> clamp_reactive_bounds(double nameplate, double q_min, double q_max);
double sample_cost(FuelType fuel, Rng& rng, const CompletionConfig& config = {});

// Statistical limit v * e^-5.0886 * (x/r)^0.4772, read as p.u. on the system
// base. Empty when the model does not apply (r <= 0, x/r <= 0, kv <= 0).
std::optional<double> thermal_limit_stat(double r, double x, double base_kv);
double thermal_limit_ub(double y_mag, double vu_i, double vu_j, double angle_max);

NetworkCase apply_angle_bounds(NetworkCase net, double bound_deg);

struct ProvenanceEntry {
  std::string element;  // "gen" or "branch"
  int id = 0;
  std::string field;
  double old_value = 0, new_value = 0;
  std::string model;
  std::string note;
};

struct CompletionResult {
  NetworkCase net;
  std::vector<FuelType> fuels;  // aligned with net.gens when classification ran
  std::vector<ProvenanceEntry> report;
};

CompletionResult complete_case(const NetworkCase& net, const CompletionPlan& plan,
                               const CompletionConfig& config = default_completion_config());

std::string provenance_json(const CompletionResult& result);

}  // namespace opfbench

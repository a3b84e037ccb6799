#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opfbench/acopf.hpp"
#include "opfbench/completion.hpp"
#include "opfbench/ipm.hpp"

namespace opfbench {

enum class VariantKind { api, sad };

std::string to_string(VariantKind kind);
VariantKind parse_variant_kind(const std::string& text);

class VariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VariantConfig {
  VariantKind kind = VariantKind::api;
  double angle_tolerance = 1e-3;  // radians, SAD bisection width
  // l1 constraint violation below which a feasibility solve counts as feasible.
  double feasibility_threshold = 1e-6;
  SolverOptions solver;
  std::uint64_t seed = 0;
  // Skips the loadability solve and scales by this factor (API).
  std::optional<double> alpha;
  // Relative step back from the maximal loading. At the exact optimum the
  // scaled case has no strictly feasible interior and interior point
  // solvers stall on it.
  double load_backoff = 1e-4;
  CompletionConfig completion = default_completion_config();
};

struct LoadabilityResult {
  double alpha = 0;
  OperatingPoint point;  // dispatch at the maximal loading
};

struct VariantResult {
  NetworkCase net;
  double alpha = 1;        // API scaling factor applied to active demand
  double alpha_max = 1;    // loadability optimum before the backoff
  // SAD bracket: `theta` is the smallest bound found feasible, `theta_infeasible`
  // the largest tested infeasible (0 when none was tested).
  double theta = 0, theta_infeasible = 0;
  double violation_at_theta = 0, violation_at_infeasible = 0;
  std::vector<std::string> log;
};

LoadabilityResult max_loadability(const NetworkCase& net, const SolverOptions& opts = {});

// Active demand scaled by alpha, reactive demand unchanged.
NetworkCase scale_active_demand(NetworkCase net, double alpha);

// Feasibility of the AC constraint set; `violation` receives the l1 residual.
bool ac_feasible(const NetworkCase& net, const SolverOptions& opts, double threshold, double* violation = nullptr,
                 VectorXd* witness = nullptr);

VariantResult generate_api(const NetworkCase& net, const VariantConfig& cfg);
VariantResult generate_sad(const NetworkCase& net, const VariantConfig& cfg);
VariantResult generate_variant(const NetworkCase& net, const VariantConfig& cfg);

// Case name with the "__api" / "__sad" suffix.
std::string variant_name(const std::string& base, VariantKind kind);

}  // namespace opfbench

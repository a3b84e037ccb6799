#pragma once

#include <array>
#include <string>
#include <vector>

#include "opfbench/flow_template.hpp"
#include "opfbench/network.hpp"
#include "opfbench/nlp.hpp"

namespace opfbench {

enum class FlowLimitMode { apparent_power, current_magnitude, both, none };

FlowLimitMode parse_flow_limit_mode(const std::string& text);
std::string to_string(FlowLimitMode mode);

enum class Direction { from, to };

// Vectors are aligned with net.buses and net.gens.
struct OperatingPoint {
  VectorXd vm, va, pg, qg;
};

struct ResidualReport {
  double balance = 0, bounds = 0, thermal = 0, current = 0, angle = 0;
  bool feasible = false;

  double max() const;
};

class AcopfProblem : public NlpProblem {
 public:
  enum class RowKind { thermal_from, thermal_to, current_from, current_to, angle };
  struct Row {
    RowKind kind;
    int branch;  // index into net.branches
  };

  // With `loadability` an extra variable alpha scales every active demand and
  // the objective becomes -alpha.
  AcopfProblem(NetworkCase net, FlowLimitMode mode, bool loadability = false);

  double objective(const VectorXd& x) const override;
  VectorXd gradient(const VectorXd& x) const override;
  VectorXd equalities(const VectorXd& x) const override;
  VectorXd inequalities(const VectorXd& x) const override;
  SparseMatrix equality_jacobian(const VectorXd& x) const override;
  SparseMatrix inequality_jacobian(const VectorXd& x) const override;
  SparseMatrix hessian(const VectorXd& x, double sigma, const VectorXd& y, const VectorXd& z) const override;
  std::string variable_name(Index i) const override;
  std::string equality_name(Index i) const override;
  std::string inequality_name(Index i) const override;

  Index va(Index bus) const { return bus; }
  Index vm(Index bus) const { return nb_ + bus; }
  Index pg(Index gen) const { return 2 * nb_ + gen; }
  Index qg(Index gen) const { return 2 * nb_ + ng_ + gen; }
  Index alpha() const { return 2 * nb_ + 2 * ng_; }

  OperatingPoint point(const VectorXd& x) const;
  VectorXd vector(const OperatingPoint& pt, double alpha = 1.0) const;

  const NetworkCase& network() const { return net_; }
  const std::vector<Row>& rows() const { return rows_; }
  FlowLimitMode mode() const { return mode_; }
  bool loadability() const { return loadability_; }

 private:
  struct Link {
    int i, j;
    BranchTemplates<double> t;
  };

  BranchState<double> state(const Link& l, const VectorXd& x) const;
  std::array<Index, 4> locals(const Link& l) const;
  double demand_scale(const VectorXd& x) const { return loadability_ ? x[alpha()] : 1.0; }

  NetworkCase net_;
  FlowLimitMode mode_;
  bool loadability_;
  Index nb_, ng_;
  std::vector<int> gen_bus_;
  std::vector<Link> links_;
  std::vector<Row> rows_;
};

AcopfProblem build_acopf(const NetworkCase& net, FlowLimitMode mode = FlowLimitMode::apparent_power);

// Complex power entering the branch at the given end, straight from the
// pi-model equations.
Complex branch_flow(const NetworkCase& net, const OperatingPoint& pt, int branch_id, Direction dir);
Complex branch_current(const NetworkCase& net, const OperatingPoint& pt, int branch_id, Direction dir);

double objective_value(const NetworkCase& net, const OperatingPoint& pt);

ResidualReport check_feasibility(const NetworkCase& net, const OperatingPoint& pt, double tol,
                                 FlowLimitMode mode = FlowLimitMode::apparent_power);

}  // namespace opfbench

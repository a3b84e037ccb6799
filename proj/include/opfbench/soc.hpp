#pragma once

#include <string>
#include <utility>
#include <vector>

#include "opfbench/acopf.hpp"

namespace opfbench {

// Lifted point. Pair k couples buses pairs[k] = (a, b) with a < b (indices
// into net.buses); wr/wi relax Re/Im of V_a conj(V_b). Flow vectors are
// aligned with net.branches.
struct SocVariables {
  VectorXd w, wr, wi, pg, qg;
  VectorXd p_from, q_from, p_to, q_to;
  std::vector<std::pair<int, int>> pairs;
};

class SocProblem : public NlpProblem {
 public:
  explicit SocProblem(NetworkCase net);

  double objective(const VectorXd& x) const override;
  VectorXd gradient(const VectorXd& x) const override;
  VectorXd equalities(const VectorXd& x) const override;
  VectorXd inequalities(const VectorXd& x) const override;
  SparseMatrix equality_jacobian(const VectorXd& x) const override;
  SparseMatrix inequality_jacobian(const VectorXd& x) const override;
  SparseMatrix hessian(const VectorXd& x, double sigma, const VectorXd& y, const VectorXd& z) const override;
  VectorXd initial_point() const override;
  std::string variable_name(Index i) const override;

  Index w(Index bus) const { return bus; }
  Index wr(Index pair) const { return nb_ + pair; }
  Index wi(Index pair) const { return nb_ + np_ + pair; }
  Index pg(Index gen) const { return nb_ + 2 * np_ + gen; }
  Index qg(Index gen) const { return nb_ + 2 * np_ + ng_ + gen; }
  Index p_from(Index l) const { return nb_ + 2 * np_ + 2 * ng_ + l; }
  Index q_from(Index l) const { return p_from(l) + nl_; }
  Index p_to(Index l) const { return p_from(l) + 2 * nl_; }
  Index q_to(Index l) const { return p_from(l) + 3 * nl_; }

  SocVariables variables(const VectorXd& x) const;
  // Maps an AC operating point into the lifted space.
  VectorXd lift(const OperatingPoint& pt) const;

  const NetworkCase& network() const { return net_; }
  Index num_pairs() const { return np_; }

 private:
  // Linear form a_i w_i + a_j w_j + cr wr + ci wi of one flow component.
  struct Linear {
    double a_i, a_j, cr, ci;
  };
  struct Link {
    int i, j, pair;
    Linear p_from, q_from, p_to, q_to;
    double tan_lo, tan_hi, sign;
    std::optional<double> s_max;
  };

  double linear(const Linear& f, const Link& l, const VectorXd& x) const;
  void fill_flows(VectorXd& x) const;

  NetworkCase net_;
  Index nb_, np_, ng_, nl_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> gen_bus_;
  std::vector<Link> links_;
  std::vector<int> thermal_;  // branch index per thermal row pair
};

SocProblem build_soc(const NetworkCase& net);

// vm = sqrt(w); angles accumulated over a spanning tree from the reference bus.
OperatingPoint recover_point_estimate(const NetworkCase& net, const SocVariables& vars);

}  // namespace opfbench

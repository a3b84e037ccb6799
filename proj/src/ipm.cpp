#include "opfbench/ipm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCholesky>

namespace opfbench {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible_certified: return "infeasible_certified";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

SolveStatus parse_solve_status(const std::string& text) {
  for (auto s : {SolveStatus::optimal, SolveStatus::infeasible_certified, SolveStatus::iteration_limit,
                 SolveStatus::numerical_failure}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown solve status '" + text + "'");
}

double max_violation(const NlpProblem& prob, const VectorXd& x) {
  double v = 0;
  if (prob.num_equalities() > 0) {
    v = prob.equalities(x).cwiseAbs().maxCoeff();
  }
  if (prob.num_inequalities() > 0) {
    VectorXd d = prob.inequalities(x);
    v = std::max(v, (prob.d_lower - d).cwiseMax(d - prob.d_upper).cwiseMax(0.0).maxCoeff());
  }
  if (x.size() > 0) {
    v = std::max(v, (prob.x_lower - x).cwiseMax(x - prob.x_upper).cwiseMax(0.0).maxCoeff());
  }
  return v;
}

double l1_violation(const NlpProblem& prob, const VectorXd& x) {
  double v = 0;
  if (prob.num_equalities() > 0) {
    v += prob.equalities(x).lpNorm<1>();
  }
  if (prob.num_inequalities() > 0) {
    VectorXd d = prob.inequalities(x);
    v += (prob.d_lower - d).cwiseMax(d - prob.d_upper).cwiseMax(0.0).sum();
  }
  return v;
}

namespace {

using Clock = std::chrono::steady_clock;
using Triplets = std::vector<Eigen::Triplet<double>>;

// The problem in the form the iteration works on:
//   min f(z)  s.t.  C(z) = 0,  L <= z <= U
// with z = (free variables, inequality slacks). Fixed variables are removed,
// the objective and each constraint row are scaled so that their gradients at
// the starting point are at most 100 in magnitude.
class Standard {
 public:
  Standard(const NlpProblem& p, const VectorXd& x0) : p_{p} {
    n_ = p.num_variables();
    me_ = p.num_equalities();
    mi_ = p.num_inequalities();
    base_ = x0;
    map_.assign(n_, -1);
    for (Index i = 0; i < n_; ++i) {
      if (p.x_lower[i] == p.x_upper[i]) {
        base_[i] = p.x_lower[i];
      } else {
        map_[i] = static_cast<Index>(free_.size());
        free_.push_back(i);
      }
    }
    nx_ = static_cast<Index>(free_.size());
    nz_ = nx_ + mi_;
    m_ = me_ + mi_;

    VectorXd x = base_;
    VectorXd g = p.gradient(x);
    double gmax = 0;
    for (Index i : free_) gmax = std::max(gmax, std::abs(g[i]));
    obj_scale_ = gmax > 100 ? 100 / gmax : 1.0;

    row_scale_ = VectorXd::Ones(m_);
    auto row_max = [&](const SparseMatrix& J, Index offset) {
      VectorXd mx = VectorXd::Zero(J.rows());
      for (Index k = 0; k < J.outerSize(); ++k) {
        if (map_[k] < 0) continue;
        for (SparseMatrix::InnerIterator it(J, k); it; ++it) {
          mx[it.row()] = std::max(mx[it.row()], std::abs(it.value()));
        }
      }
      for (Index r = 0; r < J.rows(); ++r) {
        if (mx[r] > 100) row_scale_[offset + r] = 100 / mx[r];
      }
    };
    if (me_ > 0) row_max(p.equality_jacobian(x), 0);
    if (mi_ > 0) row_max(p.inequality_jacobian(x), me_);

    L_.resize(nz_);
    U_.resize(nz_);
    for (Index k = 0; k < nx_; ++k) {
      L_[k] = p.x_lower[free_[k]];
      U_[k] = p.x_upper[free_[k]];
    }
    for (Index r = 0; r < mi_; ++r) {
      L_[nx_ + r] = row_scale_[me_ + r] * p.d_lower[r];
      U_[nx_ + r] = row_scale_[me_ + r] * p.d_upper[r];
    }
  }

  Index nz() const { return nz_; }
  Index m() const { return m_; }
  Index nx() const { return nx_; }
  Index me() const { return me_; }
  Index mi() const { return mi_; }
  const VectorXd& L() const { return L_; }
  const VectorXd& U() const { return U_; }
  double obj_scale() const { return obj_scale_; }
  const VectorXd& row_scale() const { return row_scale_; }

  VectorXd full(const VectorXd& z) const {
    VectorXd x = base_;
    for (Index k = 0; k < nx_; ++k) x[free_[k]] = z[k];
    return x;
  }

  VectorXd start(const VectorXd& x0) const {
    VectorXd z(nz_);
    for (Index k = 0; k < nx_; ++k) z[k] = x0[free_[k]];
    if (mi_ > 0) {
      VectorXd x = full(z);
      z.tail(mi_) = row_scale_.tail(mi_).cwiseProduct(p_.inequalities(x));
    }
    return z;
  }

  double objective(const VectorXd& x) const { return obj_scale_ * p_.objective(x); }

  VectorXd constraints(const VectorXd& x, const VectorXd& z) const {
    VectorXd c(m_);
    if (me_ > 0) c.head(me_) = p_.equalities(x);
    if (mi_ > 0) c.tail(mi_) = p_.inequalities(x);
    c = c.cwiseProduct(row_scale_);
    if (mi_ > 0) c.tail(mi_) -= z.tail(mi_);
    return c;
  }

  VectorXd gradient(const VectorXd& x) const {
    VectorXd g = p_.gradient(x);
    VectorXd out = VectorXd::Zero(nz_);
    for (Index k = 0; k < nx_; ++k) out[k] = obj_scale_ * g[free_[k]];
    return out;
  }

  SparseMatrix jacobian(const VectorXd& x) const {
    Triplets t;
    auto put = [&](const SparseMatrix& J, Index offset) {
      for (Index k = 0; k < J.outerSize(); ++k) {
        if (map_[k] < 0) continue;
        for (SparseMatrix::InnerIterator it(J, k); it; ++it) {
          Index r = offset + it.row();
          t.emplace_back(r, map_[k], row_scale_[r] * it.value());
        }
      }
    };
    if (me_ > 0) put(p_.equality_jacobian(x), 0);
    if (mi_ > 0) put(p_.inequality_jacobian(x), me_);
    for (Index r = 0; r < mi_; ++r) t.emplace_back(me_ + r, nx_ + r, -1.0);
    SparseMatrix J(m_, nz_);
    J.setFromTriplets(t.begin(), t.end());
    return J;
  }

  // Lower triangle of the Lagrangian Hessian in z coordinates.
  void hessian(const VectorXd& x, const VectorXd& y, Triplets& t) const {
    VectorXd ys = y.cwiseProduct(row_scale_);
    SparseMatrix H = p_.hessian(x, obj_scale_, ys.head(me_), ys.tail(mi_));
    for (Index k = 0; k < H.outerSize(); ++k) {
      if (map_[k] < 0) continue;
      for (SparseMatrix::InnerIterator it(H, k); it; ++it) {
        Index r = map_[it.row()];
        if (r < 0) continue;
        t.emplace_back(std::max(r, map_[k]), std::min(r, map_[k]), it.value());
      }
    }
  }

  // First non-finite row in original numbering, or -1.
  Index bad_row(const VectorXd& c) const {
    for (Index r = 0; r < c.size(); ++r) {
      if (!std::isfinite(c[r])) return r < me_ ? r : r - me_;
    }
    return -1;
  }

  const NlpProblem& problem() const { return p_; }

 private:
  const NlpProblem& p_;
  Index n_, me_, mi_, nx_, nz_, m_;
  VectorXd base_;
  std::vector<Index> free_;
  std::vector<Index> map_;
  double obj_scale_ = 1;
  VectorXd row_scale_;
  VectorXd L_, U_;
};

enum class Outcome { converged, line_search_failed, iteration_limit, evaluation_failed, factorization_failed };

struct Result {
  Outcome outcome;
  VectorXd z, y, zl, zu;
  int iterations = 0;
  Index bad_row = -1;
};

class Interior {
 public:
  Interior(const Standard& s, const SolverOptions& o) : s_{s}, o_{o} {
    const Index nz = s.nz();
    has_l_.resize(nz);
    has_u_.resize(nz);
    for (Index i = 0; i < nz; ++i) {
      has_l_[i] = std::isfinite(s.L()[i]);
      has_u_[i] = std::isfinite(s.U()[i]);
    }
  }

  Result run(const VectorXd& x0, int max_iter) {
    const Index nz = s_.nz(), m = s_.m();
    const double tol = o_.tolerance;
    const double mu_min = tol / 10;
    Result res;
    VectorXd z = push_interior(s_.start(x0));
    VectorXd zl = VectorXd::Zero(nz), zu = VectorXd::Zero(nz);
    for (Index i = 0; i < nz; ++i) {
      if (has_l_[i]) zl[i] = 1;
      if (has_u_[i]) zu[i] = 1;
    }
    double mu = o_.mu_init;

    VectorXd x = s_.full(z);
    double f = s_.objective(x);
    VectorXd c = s_.constraints(x, z);
    if (!std::isfinite(f) || !c.allFinite()) {
      res.outcome = Outcome::evaluation_failed;
      res.bad_row = s_.bad_row(c);
      res.z = z;
      res.y = VectorXd::Zero(m);
      res.zl = zl;
      res.zu = zu;
      return res;
    }
    VectorXd g = s_.gradient(x);
    SparseMatrix J = s_.jacobian(x);
    VectorXd y = initial_multipliers(g, J, zl, zu);

    const double theta0 = c.lpNorm<1>();
    const double theta_max = 1e4 * std::max(1.0, theta0);
    const double theta_min = 1e-4 * std::max(1.0, theta0);
    filter_.clear();
    delta_w_last_ = 0;

    int iter = 0;
    for (;; ++iter) {
      VectorXd dual = g + J.transpose() * y - zl + zu;
      auto errors = [&](double mu_) {
        double sd = scaling(y, zl, zu, true);
        double sc = scaling(y, zl, zu, false);
        double comp = 0;
        for (Index i = 0; i < nz; ++i) {
          if (has_l_[i]) comp = std::max(comp, std::abs((z[i] - s_.L()[i]) * zl[i] - mu_));
          if (has_u_[i]) comp = std::max(comp, std::abs((s_.U()[i] - z[i]) * zu[i] - mu_));
        }
        double primal = m > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;
        double d = nz > 0 ? dual.lpNorm<Eigen::Infinity>() : 0.0;
        return std::max({d / sd, primal, comp / sc});
      };

      double e0 = errors(0);
      if (o_.verbose) {
        std::printf("%4d  f=% .10e  inf_pr=%.2e  err=%.2e  mu=%.1e  dw=%.1e\n", iter, f / s_.obj_scale(),
                    m > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0, e0, mu, delta_w_last_);
      }
      if (!std::isfinite(e0)) {
        res.outcome = Outcome::factorization_failed;
        break;
      }
      if (mu <= mu_min && e0 <= tol && max_violation(s_.problem(), x) <= tol) {
        res.outcome = Outcome::converged;
        break;
      }
      if (iter >= max_iter) {
        res.outcome = Outcome::iteration_limit;
        break;
      }
      while (mu > mu_min && errors(mu) <= 10 * mu) {
        mu = std::max(mu_min, std::min(o_.kappa_mu * mu, std::pow(mu, o_.theta_mu)));
        filter_.clear();
      }
      const double tau = std::max(o_.tau_min, 1 - mu);

      // Newton direction
      VectorXd sigma = VectorXd::Zero(nz);
      VectorXd grad_phi = g;
      for (Index i = 0; i < nz; ++i) {
        if (has_l_[i]) {
          double sl = z[i] - s_.L()[i];
          sigma[i] += zl[i] / sl;
          grad_phi[i] -= mu / sl;
          if (!has_u_[i]) grad_phi[i] += kappa_d * mu;
        }
        if (has_u_[i]) {
          double su = s_.U()[i] - z[i];
          sigma[i] += zu[i] / su;
          grad_phi[i] += mu / su;
          if (!has_l_[i]) grad_phi[i] -= kappa_d * mu;
        }
      }
      Triplets h;
      s_.hessian(x, y, h);
      VectorXd rhs(nz + m);
      rhs.head(nz) = -(grad_phi + J.transpose() * y);
      rhs.tail(m) = -c;
      VectorXd sol;
      if (!factor_and_solve(h, J, sigma, mu, rhs, sol) || !sol.allFinite()) {
        res.outcome = Outcome::factorization_failed;
        break;
      }
      VectorXd dz = sol.head(nz), dy = sol.tail(m);
      VectorXd dzl = VectorXd::Zero(nz), dzu = VectorXd::Zero(nz);
      for (Index i = 0; i < nz; ++i) {
        if (has_l_[i]) {
          double sl = z[i] - s_.L()[i];
          dzl[i] = mu / sl - zl[i] - zl[i] / sl * dz[i];
        }
        if (has_u_[i]) {
          double su = s_.U()[i] - z[i];
          dzu[i] = mu / su - zu[i] + zu[i] / su * dz[i];
        }
      }

      // fraction to the boundary
      double alpha_max = 1, alpha_z = 1;
      for (Index i = 0; i < nz; ++i) {
        if (has_l_[i] && dz[i] < 0) alpha_max = std::min(alpha_max, -tau * (z[i] - s_.L()[i]) / dz[i]);
        if (has_u_[i] && dz[i] > 0) alpha_max = std::min(alpha_max, tau * (s_.U()[i] - z[i]) / dz[i]);
        if (has_l_[i] && dzl[i] < 0) alpha_z = std::min(alpha_z, -tau * zl[i] / dzl[i]);
        if (has_u_[i] && dzu[i] < 0) alpha_z = std::min(alpha_z, -tau * zu[i] / dzu[i]);
      }

      // filter line search on (||C||_1, barrier objective)
      const double theta = m > 0 ? c.lpNorm<1>() : 0.0;
      const double phi = barrier(f, z, mu);
      const double slope = grad_phi.dot(dz);
      double alpha_min = gamma_theta;
      if (slope < 0) {
        alpha_min = std::min({gamma_theta, gamma_phi * theta / -slope,
                              std::pow(theta, s_theta) / std::pow(-slope, s_phi)});
      }
      alpha_min *= gamma_alpha;
      alpha_min = std::max(alpha_min, 1e-14);

      double alpha = alpha_max;
      bool accepted = false;
      VectorXd zt, xt, ct;
      double ft = 0;
      while (alpha >= alpha_min) {
        zt = z + alpha * dz;
        xt = s_.full(zt);
        ft = s_.objective(xt);
        ct = s_.constraints(xt, zt);
        if (std::isfinite(ft) && ct.allFinite()) {
          double theta_t = m > 0 ? ct.lpNorm<1>() : 0.0;
          double phi_t = barrier(ft, zt, mu);
          bool in_filter = false;
          for (auto [tf, pf] : filter_) {
            if (theta_t >= tf && phi_t >= pf) {
              in_filter = true;
              break;
            }
          }
          if (theta_t <= theta_max && !in_filter) {
            bool switching = theta <= theta_min && slope < 0 &&
                             alpha * std::pow(-slope, s_phi) > std::pow(theta, s_theta);
            if (switching) {
              if (phi_t <= phi + eta * alpha * slope) {
                accepted = true;
              }
            } else if (theta_t <= (1 - gamma_theta) * theta || phi_t <= phi - gamma_phi * theta) {
              filter_.emplace_back((1 - gamma_theta) * theta, phi - gamma_phi * theta);
              accepted = true;
            }
          }
        }
        if (accepted) break;
        alpha /= 2;
      }
      if (!accepted) {
        res.outcome = Outcome::line_search_failed;
        break;
      }

      z = zt;
      x = xt;
      f = ft;
      c = ct;
      y += alpha * dy;
      zl += alpha_z * dzl;
      zu += alpha_z * dzu;
      for (Index i = 0; i < nz; ++i) {
        if (has_l_[i]) {
          double sl = z[i] - s_.L()[i];
          zl[i] = std::clamp(zl[i], mu / (kappa_sigma * sl), kappa_sigma * mu / sl);
        }
        if (has_u_[i]) {
          double su = s_.U()[i] - z[i];
          zu[i] = std::clamp(zu[i], mu / (kappa_sigma * su), kappa_sigma * mu / su);
        }
      }
      g = s_.gradient(x);
      J = s_.jacobian(x);
    }
    res.iterations = iter;
    res.z = z;
    res.y = y;
    res.zl = zl;
    res.zu = zu;
    return res;
  }

 private:
  static constexpr double kappa_d = 1e-4;
  static constexpr double kappa_sigma = 1e10;
  static constexpr double gamma_theta = 1e-5, gamma_phi = 1e-5, gamma_alpha = 0.05;
  static constexpr double s_theta = 1.1, s_phi = 2.3, eta = 1e-4;
  static constexpr double delta_c = 1e-9;

  VectorXd push_interior(VectorXd z) const {
    constexpr double k1 = 1e-2, k2 = 1e-2;
    for (Index i = 0; i < z.size(); ++i) {
      double lo = s_.L()[i], hi = s_.U()[i];
      if (has_l_[i] && has_u_[i]) {
        double pl = std::min(k1 * std::max(1.0, std::abs(lo)), k2 * (hi - lo));
        double pu = std::min(k1 * std::max(1.0, std::abs(hi)), k2 * (hi - lo));
        z[i] = std::clamp(z[i], lo + pl, hi - pu);
      } else if (has_l_[i]) {
        z[i] = std::max(z[i], lo + k1 * std::max(1.0, std::abs(lo)));
      } else if (has_u_[i]) {
        z[i] = std::min(z[i], hi - k1 * std::max(1.0, std::abs(hi)));
      }
    }
    return z;
  }

  double barrier(double f, const VectorXd& z, double mu) const {
    double phi = f;
    for (Index i = 0; i < z.size(); ++i) {
      if (has_l_[i]) {
        phi -= mu * std::log(z[i] - s_.L()[i]);
        if (!has_u_[i]) phi += kappa_d * mu * (z[i] - s_.L()[i]);
      }
      if (has_u_[i]) {
        phi -= mu * std::log(s_.U()[i] - z[i]);
        if (!has_l_[i]) phi += kappa_d * mu * (s_.U()[i] - z[i]);
      }
    }
    return phi;
  }

  double scaling(const VectorXd& y, const VectorXd& zl, const VectorXd& zu, bool dual) const {
    constexpr double s_max = 100;
    Index count = 0;
    for (Index i = 0; i < zl.size(); ++i) count += has_l_[i] + has_u_[i];
    double sum = zl.lpNorm<1>() + zu.lpNorm<1>();
    if (dual) {
      sum += y.lpNorm<1>();
      count += y.size();
    }
    if (count == 0) return 1;
    return std::max(s_max, sum / static_cast<double>(count)) / s_max;
  }

  // Least-squares multiplier estimate, discarded when large.
  VectorXd initial_multipliers(const VectorXd& g, const SparseMatrix& J, const VectorXd& zl, const VectorXd& zu) {
    const Index nz = s_.nz(), m = s_.m();
    VectorXd y = VectorXd::Zero(m);
    if (m == 0) return y;
    Triplets t;
    for (Index i = 0; i < nz; ++i) t.emplace_back(i, i, 1.0);
    append_jacobian(J, t);
    for (Index r = 0; r < m; ++r) t.emplace_back(nz + r, nz + r, -delta_c);
    SparseMatrix K(nz + m, nz + m);
    K.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt(K);
    if (ldlt.info() != Eigen::Success) return y;
    VectorXd rhs = VectorXd::Zero(nz + m);
    rhs.head(nz) = -(g - zl + zu);
    VectorXd sol = ldlt.solve(rhs);
    if (!sol.allFinite() || sol.tail(m).lpNorm<Eigen::Infinity>() > 1e3) return y;
    return sol.tail(m);
  }

  void append_jacobian(const SparseMatrix& J, Triplets& t) const {
    const Index nz = s_.nz();
    for (Index k = 0; k < J.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(J, k); it; ++it) {
        t.emplace_back(nz + it.row(), it.col(), it.value());
      }
    }
  }

  // Factors [H + Sigma + dw I, J^T; J, -dc I] with dw raised until the
  // inertia is (nz, m, 0), then solves with iterative refinement.
  bool factor_and_solve(const Triplets& h, const SparseMatrix& J, const VectorXd& sigma, double mu,
                        const VectorXd& rhs, VectorXd& sol) {
    const Index nz = s_.nz(), m = s_.m();
    Triplets base = h;
    append_jacobian(J, base);
    double dw = 0;
    double dc = delta_c * std::pow(mu, 0.25);
    bool first = true;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Triplets t = base;
      for (Index i = 0; i < nz; ++i) t.emplace_back(i, i, sigma[i] + dw);
      for (Index r = 0; r < m; ++r) t.emplace_back(nz + r, nz + r, -dc);
      SparseMatrix K(nz + m, nz + m);
      K.setFromTriplets(t.begin(), t.end());
      ldlt_.compute(K);
      if (ldlt_.info() == Eigen::Success) {
        const VectorXd& d = ldlt_.vectorD();
        Index pos = (d.array() > 0).count(), neg = (d.array() < 0).count();
        if (pos == nz && neg == m && d.allFinite()) {
          sol = ldlt_.solve(rhs);
          const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
          double res = inf;
          for (int k = 0; k <= 3 && sol.allFinite(); ++k) {
            VectorXd r = rhs - K.selfadjointView<Eigen::Lower>() * sol;
            res = r.lpNorm<Eigen::Infinity>();
            if (res <= 1e-14 * scale || k == 3) break;
            sol += ldlt_.solve(r);
          }
          // Correct inertia with an inaccurate solve means the pivots were
          // unstable; treat it like wrong inertia and perturb further.
          if (sol.allFinite() && res <= 1e-8 * scale) {
            if (dw > 0) delta_w_last_ = dw;
            return true;
          }
        }
      }
      if (first) {
        dw = delta_w_last_ == 0 ? 1e-4 : std::max(1e-20, delta_w_last_ / 3);
        first = false;
      } else {
        dw *= delta_w_last_ == 0 ? 100 : 8;
      }
      if (dw > 1e40) return false;
    }
    return false;
  }

  const Standard& s_;
  const SolverOptions& o_;
  std::vector<bool> has_l_, has_u_;
  std::vector<std::pair<double, double>> filter_;
  double delta_w_last_ = 0;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
};

// Elastic version of a problem: every row r gets p_r, n_r >= 0 added as
// row + p_r - n_r, and the objective is sum(p + n).
class Elastic : public NlpProblem {
 public:
  explicit Elastic(const NlpProblem& p) : p_{p} {
    n_ = p.num_variables();
    m_ = p.num_equalities() + p.num_inequalities();
    x_lower.resize(n_ + 2 * m_);
    x_upper.resize(n_ + 2 * m_);
    x_lower << p.x_lower, VectorXd::Zero(2 * m_);
    x_upper << p.x_upper, VectorXd::Constant(2 * m_, inf);
    d_lower = p.d_lower;
    d_upper = p.d_upper;
    num_eq = p.num_equalities();
  }

  double objective(const VectorXd& v) const override { return v.tail(2 * m_).sum(); }

  VectorXd gradient(const VectorXd& v) const override {
    VectorXd g = VectorXd::Zero(v.size());
    g.tail(2 * m_).setOnes();
    return g;
  }

  VectorXd equalities(const VectorXd& v) const override {
    return p_.equalities(v.head(n_)) + elastic(v, 0, num_eq);
  }

  VectorXd inequalities(const VectorXd& v) const override {
    return p_.inequalities(v.head(n_)) + elastic(v, num_eq, d_lower.size());
  }

  SparseMatrix equality_jacobian(const VectorXd& v) const override {
    return widen(p_.equality_jacobian(v.head(n_)), 0);
  }

  SparseMatrix inequality_jacobian(const VectorXd& v) const override {
    return widen(p_.inequality_jacobian(v.head(n_)), num_eq);
  }

  SparseMatrix hessian(const VectorXd& v, double, const VectorXd& y, const VectorXd& z) const override {
    SparseMatrix H = p_.hessian(v.head(n_), 0.0, y, z);
    Triplets t;
    for (Index k = 0; k < H.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(H, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    }
    SparseMatrix out(v.size(), v.size());
    out.setFromTriplets(t.begin(), t.end());
    return out;
  }

  // Elastic variables start at the smallest values that make every row hold.
  VectorXd start(const VectorXd& x) const {
    VectorXd v = VectorXd::Zero(n_ + 2 * m_);
    v.head(n_) = x;
    const double eps = 1e-4;
    Index me = num_eq, mi = d_lower.size();
    if (me > 0) {
      VectorXd c = p_.equalities(x);
      for (Index r = 0; r < me; ++r) {
        v[n_ + r] = std::max(-c[r], 0.0) + eps;
        v[n_ + m_ + r] = std::max(c[r], 0.0) + eps;
      }
    }
    if (mi > 0) {
      VectorXd d = p_.inequalities(x);
      for (Index r = 0; r < mi; ++r) {
        v[n_ + me + r] = std::max(d_lower[r] - d[r], 0.0) + eps;
        v[n_ + m_ + me + r] = std::max(d[r] - d_upper[r], 0.0) + eps;
      }
    }
    return v;
  }

 private:
  VectorXd elastic(const VectorXd& v, Index offset, Index count) const {
    return v.segment(n_ + offset, count) - v.segment(n_ + m_ + offset, count);
  }

  SparseMatrix widen(const SparseMatrix& J, Index offset) const {
    Triplets t;
    for (Index k = 0; k < J.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(J, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    }
    for (Index r = 0; r < J.rows(); ++r) {
      t.emplace_back(r, n_ + offset + r, 1.0);
      t.emplace_back(r, n_ + m_ + offset + r, -1.0);
    }
    SparseMatrix out(J.rows(), n_ + 2 * m_);
    out.setFromTriplets(t.begin(), t.end());
    return out;
  }

  const NlpProblem& p_;
  Index n_, m_;
};

VectorXd clamp_to_bounds(const NlpProblem& p, VectorXd x) {
  return x.cwiseMax(p.x_lower).cwiseMin(p.x_upper);
}

void fill_report(SolveReport& rep, const NlpProblem& p, const Standard& s, const Result& r) {
  rep.x = s.full(r.z);
  rep.objective = p.objective(rep.x);
  rep.max_violation = max_violation(p, rep.x);
  const double os = s.obj_scale();
  VectorXd y = r.y.cwiseProduct(s.row_scale()) / os;
  rep.eq_multipliers = y.head(s.me());
  rep.ineq_multipliers = y.tail(s.mi());
  rep.lower_bound_multipliers = VectorXd::Zero(p.num_variables());
  rep.upper_bound_multipliers = VectorXd::Zero(p.num_variables());
  Index k = 0;
  for (Index i = 0; i < p.num_variables(); ++i) {
    if (p.x_lower[i] == p.x_upper[i]) continue;
    rep.lower_bound_multipliers[i] = r.zl[k] / os;
    rep.upper_bound_multipliers[i] = r.zu[k] / os;
    ++k;
  }
}

}  // namespace

FeasibilityResult feasibility_phase(const NlpProblem& prob, const SolverOptions& opts) {
  Elastic elastic{prob};
  SolverOptions inner = opts;
  inner.feasibility_phase = false;
  VectorXd x0 = clamp_to_bounds(prob, opts.warm_start ? *opts.warm_start : prob.initial_point());
  inner.warm_start = elastic.start(x0);
  SolveReport rep = solve(elastic, inner);
  FeasibilityResult out;
  out.status = rep.status;
  out.iterations = rep.iterations;
  out.x = rep.x.size() > 0 ? VectorXd(rep.x.head(prob.num_variables())) : x0;
  out.violation = l1_violation(prob, out.x);
  return out;
}

SolveReport solve(const NlpProblem& prob, const SolverOptions& opts) {
  if (!(opts.tolerance > 0) || opts.max_iterations < 1) {
    throw std::invalid_argument("solver options: tolerance must be positive and max_iterations >= 1");
  }
  const auto t0 = Clock::now();
  SolveReport rep;
  VectorXd x0 = clamp_to_bounds(prob, opts.warm_start ? *opts.warm_start : prob.initial_point());
  const double certify = std::sqrt(opts.tolerance);
  int budget = opts.max_iterations;

  auto certify_infeasible = [&](const VectorXd& from) {
    SolverOptions fo = opts;
    fo.warm_start = from;
    FeasibilityResult fr = feasibility_phase(prob, fo);
    rep.iterations += fr.iterations;
    rep.infeasibility = fr.violation;
    return fr;
  };

  for (int restarts = 0;; ++restarts) {
    Standard std_form{prob, x0};
    Interior ipm{std_form, opts};
    Result r = ipm.run(x0, budget);
    rep.iterations += r.iterations;
    budget -= r.iterations;
    fill_report(rep, prob, std_form, r);

    if (r.outcome == Outcome::converged) {
      rep.status = SolveStatus::optimal;
      break;
    }
    if (r.outcome == Outcome::evaluation_failed) {
      rep.status = SolveStatus::numerical_failure;
      rep.failed_row = r.bad_row;
      rep.message = "non-finite evaluation at the starting point";
      break;
    }
    const bool stuck = r.outcome == Outcome::line_search_failed || r.outcome == Outcome::factorization_failed;
    if (!opts.feasibility_phase) {
      rep.status = stuck ? SolveStatus::numerical_failure : SolveStatus::iteration_limit;
      rep.message = r.outcome == Outcome::line_search_failed     ? "line search failed"
                    : r.outcome == Outcome::factorization_failed ? "KKT factorization failed"
                                                                 : "iteration limit";
      break;
    }
    FeasibilityResult fr = certify_infeasible(rep.x);
    if (fr.violation > certify && fr.status == SolveStatus::optimal) {
      rep.status = SolveStatus::infeasible_certified;
      rep.x = fr.x;
      rep.objective = prob.objective(fr.x);
      rep.max_violation = max_violation(prob, fr.x);
      rep.message = "feasibility phase minimum violation " + std::to_string(fr.violation);
      break;
    }
    if (!stuck || budget <= 0 || restarts >= 3 || fr.violation > certify) {
      rep.status = stuck ? SolveStatus::numerical_failure : SolveStatus::iteration_limit;
      rep.message = stuck ? "restoration did not recover" : "iteration limit";
      break;
    }
    x0 = fr.x;  // restore from the feasibility point
  }
  rep.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

}  // namespace opfbench

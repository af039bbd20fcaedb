#include "rswarm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rswarm {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

MatX QpProblem::G() const {
  MatX out(static_cast<Eigen::Index>(rows.size()), num_vars());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = rows[k].coeffs.transpose();
  return out;
}

VecX QpProblem::g() const {
  VecX out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<Eigen::Index>(k)) = rows[k].rhs;
  return out;
}

int QpProblem::var_index(const std::string& name) const {
  auto it = std::find(var_map.begin(), var_map.end(), name);
  return it == var_map.end() ? -1 : static_cast<int>(it - var_map.begin());
}

double KktReport::residual() const {
  return std::max({primal, std::max(0.0, -dual), complementarity, stationarity});
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr double kActiveTol = 1e-7;

// Dense tableau: rows [0, nrows) are constraints, row nrows holds reduced
// costs, the last column holds the right-hand side (objective row: -value).
class Tableau {
 public:
  Tableau(int nrows, int ncols) : t_(MatX::Zero(nrows + 1, ncols + 1)), basis_(nrows, -1) {}

  MatX& data() { return t_; }
  std::vector<int>& basis() { return basis_; }
  int nrows() const { return static_cast<int>(t_.rows()) - 1; }
  int ncols() const { return static_cast<int>(t_.cols()) - 1; }
  double rhs(int r) const { return t_(r, ncols()); }
  double objective() const { return -t_(nrows(), ncols()); }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int k = 0; k <= nrows(); ++k) {
      if (k == r) continue;
      const double f = t_(k, c);
      if (f != 0.0) t_.row(k) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  void set_objective(const VecX& cost) {
    t_.row(nrows()).setZero();
    t_.row(nrows()).head(ncols()) = cost.transpose();
    for (int r = 0; r < nrows(); ++r) {
      const double cb = cost(basis_[r]);
      if (cb != 0.0) t_.row(nrows()) -= cb * t_.row(r);
    }
  }

  // Bland's rule; columns with allowed[j] == false never enter.
  SolveStatus optimize(const std::vector<bool>& allowed, int& iterations, int max_iterations) {
    const int obj = nrows();
    while (iterations < max_iterations) {
      int enter = -1;
      for (int j = 0; j < ncols(); ++j) {
        if (allowed[j] && t_(obj, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return SolveStatus::Optimal;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      const double col_tol = kPivotTol * std::max(1.0, t_.col(enter).head(nrows()).cwiseAbs().maxCoeff());
      for (int r = 0; r < nrows(); ++r) {
        const double a = t_(r, enter);
        if (a <= col_tol) continue;
        const double ratio = std::max(0.0, rhs(r)) / a;
        if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return SolveStatus::Unbounded;
      pivot(leave, enter);
      ++iterations;
    }
    return SolveStatus::IterationLimit;
  }

 private:
  MatX t_;
  std::vector<int> basis_;
};

struct SimplexResult {
  SolveStatus status = SolveStatus::Infeasible;
  VecX u;
  VecX duals;  // shadow prices of A u <= b, >= 0
  int iterations = 0;
};

// min c^T u s.t. A u <= b with u split as u+ - u-.
SimplexResult simplex(const VecX& c, const MatX& A, const VecX& b) {
  const int m = static_cast<int>(A.cols());
  const int q = static_cast<int>(A.rows());
  int n_art = 0;
  for (int k = 0; k < q; ++k) n_art += b(k) < 0 ? 1 : 0;
  const int n_struct = 2 * m + q;
  const int ncols = n_struct + n_art;
  Tableau tab(q, ncols);
  MatX& t = tab.data();
  int art = n_struct;
  for (int k = 0; k < q; ++k) {
    const double sign = b(k) < 0 ? -1.0 : 1.0;
    t.row(k).head(m) = sign * A.row(k);
    t.row(k).segment(m, m) = -sign * A.row(k);
    t(k, 2 * m + k) = sign;
    t(k, ncols) = sign * b(k);
    if (sign < 0) {
      t(k, art) = 1.0;
      tab.basis()[k] = art++;
    } else {
      tab.basis()[k] = 2 * m + k;
    }
  }
  SimplexResult res;
  const int max_iter = 50 * (ncols + q + 10);
  std::vector<bool> allowed(ncols, true);
  if (n_art > 0) {
    VecX phase1 = VecX::Zero(ncols);
    phase1.tail(n_art).setOnes();
    tab.set_objective(phase1);
    const SolveStatus st = tab.optimize(allowed, res.iterations, max_iter);
    if (st == SolveStatus::IterationLimit) {
      res.status = st;
      return res;
    }
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (tab.objective() > kFeasTol * scale) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
    for (int r = 0; r < q; ++r) {
      if (tab.basis()[r] < n_struct) continue;
      for (int j = 0; j < n_struct; ++j) {
        if (std::abs(t(r, j)) > 1e-9) {
          tab.pivot(r, j);
          break;
        }
      }
    }
    for (int j = n_struct; j < ncols; ++j) allowed[j] = false;
  }
  VecX cost = VecX::Zero(ncols);
  cost.head(m) = c;
  cost.segment(m, m) = -c;
  tab.set_objective(cost);
  res.status = tab.optimize(allowed, res.iterations, max_iter);
  if (res.status != SolveStatus::Optimal) return res;
  VecX x = VecX::Zero(ncols);
  for (int r = 0; r < q; ++r) x(tab.basis()[r]) = tab.rhs(r);
  res.u = x.head(m) - x.segment(m, m);
  res.duals = VecX(q);
  for (int k = 0; k < q; ++k) res.duals(k) = std::max(0.0, t(q, 2 * m + k));
  return res;
}

std::vector<int> tight_rows(const MatX& G, const VecX& g, const VecX& z) {
  std::vector<int> out;
  const VecX slack = G * z - g;
  for (Eigen::Index k = 0; k < slack.size(); ++k) {
    const double scale = 1.0 + std::abs(g(k));
    if (std::abs(slack(k)) <= kActiveTol * scale) out.push_back(static_cast<int>(k));
  }
  return out;
}

}  // namespace

KktReport check_kkt(const VecX& H, const VecX& F, const MatX& G, const VecX& g, const VecX& z,
                    const VecX& lambda) {
  KktReport rep;
  VecX grad = 2.0 * H.cwiseProduct(z) + F;
  if (G.rows() > 0) {
    const VecX slack = G * z - g;
    rep.primal = std::max(0.0, slack.maxCoeff());
    rep.dual = lambda.minCoeff();
    rep.complementarity = lambda.cwiseProduct(slack).cwiseAbs().maxCoeff();
    grad += G.transpose() * lambda;
  }
  rep.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  return rep;
}

KktReport check_kkt(const QpProblem& prob, const Solution& sol) {
  return check_kkt(prob.H, prob.F, prob.G(), prob.g(), sol.z, sol.multipliers);
}

KktReport check_kkt(const LpProblem& prob, const Solution& sol) {
  return check_kkt(VecX::Zero(prob.c.size()), prob.c, prob.A, prob.b, sol.z, sol.multipliers);
}

Solution solve_lp(const LpProblem& prob) {
  const int m = static_cast<int>(prob.c.size());
  require(prob.A.cols() == m && prob.A.rows() == prob.b.size(), "solve_lp: dimension mismatch");
  require(prob.c.allFinite() && prob.A.allFinite() && prob.b.allFinite(), "solve_lp: non-finite data");
  Solution sol;
  const SimplexResult sx = simplex(prob.c, prob.A, prob.b);
  sol.status = sx.status;
  sol.iterations = sx.iterations;
  if (sx.status != SolveStatus::Optimal) return sol;
  const double opt = prob.c.dot(sx.u);

  // Minimum-norm point of the optimal face {A u <= b, c^T u <= opt}.
  QpProblem face;
  face.H = VecX::Ones(m);
  face.F = VecX::Zero(m);
  for (Eigen::Index k = 0; k < prob.A.rows(); ++k) face.rows.push_back({prob.A.row(k).transpose(), prob.b(k), {}});
  if (prob.c.cwiseAbs().maxCoeff() > 0.0) {
    const double eps = 1e-12 * (1.0 + std::abs(opt));
    face.rows.push_back({prob.c, opt + eps, "objective"});
  }
  const Solution polished = solve_qp(face);
  sol.z = polished.optimal() ? polished.z : sx.u;
  sol.objective = prob.c.dot(sol.z);
  sol.multipliers = sx.duals;
  sol.active_set = tight_rows(prob.A, prob.b, sol.z);
  sol.kkt_residual = check_kkt(prob, sol).residual();
  return sol;
}

namespace {

struct ActiveSetResult {
  bool converged = false;
  VecX z;
  std::vector<int> work;
  VecX lambda;
  int iterations = 0;
};

// Primal active-set iterations for min z'diag(H)z + F'z s.t. G z <= g from a feasible z0.
ActiveSetResult primal_active_set(const VecX& H, const VecX& F, const MatX& G, const VecX& g, VecX z) {
  const int n = static_cast<int>(H.size());
  const int k = static_cast<int>(G.rows());
  const VecX qinv = (2.0 * H).cwiseInverse();
  ActiveSetResult res;
  std::vector<int> work;
  VecX lambda_w;
  const int max_iter = 50 * (n + k + 10);
  bool stalled = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    const VecX grad = 2.0 * H.cwiseProduct(z) + F;
    VecX p;
    const int w = static_cast<int>(work.size());
    if (w == 0) {
      lambda_w.resize(0);
      p = -qinv.cwiseProduct(grad);
    } else {
      MatX AwT(n, w);
      for (int r = 0; r < w; ++r) AwT.col(r) = G.row(work[r]).transpose();
      // Null-space step: p = -Z (Z' D Z)^-1 Z' grad with Z spanning ker(Aw).
      const Eigen::ColPivHouseholderQR<MatX> qr(AwT);
      const int rank = static_cast<int>(qr.rank());
      if (rank < n) {
        const MatX Q = qr.householderQ() * MatX::Identity(n, n);
        const MatX Z = Q.rightCols(n - rank);
        const MatX reduced = Z.transpose() * (2.0 * H).asDiagonal() * Z;
        p = -Z * reduced.llt().solve(Z.transpose() * grad);
      } else {
        p = VecX::Zero(n);
      }
      lambda_w = AwT.completeOrthogonalDecomposition().solve(-(grad + 2.0 * H.cwiseProduct(p)));
    }
    const double p_tol = 1e-10 * (1.0 + z.cwiseAbs().maxCoeff() + qinv.cwiseProduct(grad).cwiseAbs().maxCoeff());
    if (p.cwiseAbs().maxCoeff() <= p_tol) {
      // Most negative multiplier, or the lowest row index once the step has stalled (anti-cycling).
      int drop = -1;
      double most_negative = -1e-12;
      for (int r = 0; r < w; ++r) {
        if (lambda_w(r) >= -1e-12) continue;
        const bool better = stalled ? (drop < 0 || work[r] < work[drop]) : lambda_w(r) < most_negative;
        if (better) {
          most_negative = lambda_w(r);
          drop = r;
        }
      }
      if (drop < 0) {
        res.converged = true;
        break;
      }
      work.erase(work.begin() + drop);
      continue;
    }
    double alpha = 1.0;
    int blocking = -1;
    const double p_scale = p.cwiseAbs().maxCoeff();
    for (int r = 0; r < k; ++r) {
      if (std::find(work.begin(), work.end(), r) != work.end()) continue;
      const double ap = G.row(r).dot(p);
      if (ap <= 1e-12 * p_scale) continue;
      const double stepr = std::max(0.0, (g(r) - G.row(r).dot(z)) / ap);
      if (stepr < alpha - 1e-15) {
        alpha = stepr;
        blocking = r;
      }
    }
    z += alpha * p;
    stalled = alpha <= 1e-15;
    if (blocking >= 0) work.push_back(blocking);
  }
  res.z = std::move(z);
  res.work = std::move(work);
  res.lambda = std::move(lambda_w);
  res.iterations = it;
  return res;
}

}  // namespace

Solution solve_qp(const QpProblem& prob) {
  const int n = prob.num_vars();
  require(n > 0, "solve_qp: empty decision vector");
  require(prob.F.size() == n, "solve_qp: F dimension mismatch");
  require((prob.H.array() > 0.0).all(), "solve_qp: H must be positive definite");
  for (const auto& row : prob.rows) {
    require(row.coeffs.size() == n, "solve_qp: row dimension mismatch");
    require(row.coeffs.allFinite() && std::isfinite(row.rhs), "solve_qp: non-finite row");
  }
  const int k_all = static_cast<int>(prob.rows.size());
  Solution sol;
  sol.multipliers = VecX::Zero(k_all);

  // Row-normalized copy; all-zero rows are checked and dropped.
  std::vector<int> kept;
  std::vector<double> scale;
  for (int k = 0; k < k_all; ++k) {
    const double s = prob.rows[k].coeffs.cwiseAbs().maxCoeff();
    if (s == 0.0) {
      if (prob.rows[k].rhs < -kFeasTol) {
        sol.status = SolveStatus::Infeasible;
        sol.certificate = {k};
        return sol;
      }
      continue;
    }
    kept.push_back(k);
    scale.push_back(s);
  }
  const int k = static_cast<int>(kept.size());
  MatX G(k, n);
  VecX g(k);
  for (int r = 0; r < k; ++r) {
    G.row(r) = prob.rows[kept[r]].coeffs.transpose() / scale[r];
    g(r) = prob.rows[kept[r]].rhs / scale[r];
  }

  VecX z = -(2.0 * prob.H).cwiseInverse().cwiseProduct(prob.F);
  const bool unconstrained_ok = k == 0 || ((G * z - g).array() <= kFeasTol).all();
  if (!unconstrained_ok) {
    // Phase 1: min s + eps (|z - z_unc|^2 + s^2) s.t. G z - s <= g, started at s = max violation.
    constexpr double eps = 1e-6;
    VecX H1 = VecX::Constant(n + 1, eps);
    VecX F1(n + 1);
    F1.head(n) = -2.0 * eps * z;
    F1(n) = 1.0;
    MatX G1(k, n + 1);
    G1.leftCols(n) = G;
    G1.col(n).setConstant(-1.0);
    VecX z1(n + 1);
    z1.head(n) = z;
    z1(n) = (G * z - g).maxCoeff();
    const ActiveSetResult ph1 = primal_active_set(H1, F1, G1, g, z1);
    if (!ph1.converged) {
      sol.status = SolveStatus::IterationLimit;
      sol.iterations = ph1.iterations;
      return sol;
    }
    const double worst = (G * ph1.z.head(n) - g).maxCoeff();
    if (worst > kFeasTol * (1.0 + g.cwiseAbs().maxCoeff())) {
      sol.status = SolveStatus::Infeasible;
      sol.iterations = ph1.iterations;
      for (std::size_t r = 0; r < ph1.work.size(); ++r) {
        if (ph1.lambda(static_cast<Eigen::Index>(r)) > 0.0) sol.certificate.push_back(kept[ph1.work[r]]);
      }
      std::sort(sol.certificate.begin(), sol.certificate.end());
      return sol;
    }
    z = ph1.z.head(n);
  }

  const ActiveSetResult as = primal_active_set(prob.H, prob.F, G, g, z);
  sol.iterations = as.iterations;
  sol.z = as.z;
  sol.objective = sol.z.dot(prob.H.cwiseProduct(sol.z)) + prob.F.dot(sol.z);
  if (!as.converged) {
    sol.status = SolveStatus::IterationLimit;
    return sol;
  }
  sol.status = SolveStatus::Optimal;
  for (std::size_t r = 0; r < as.work.size(); ++r) {
    const int idx = as.work[r];
    sol.multipliers(kept[idx]) = std::max(0.0, as.lambda(static_cast<Eigen::Index>(r))) / scale[idx];
  }
  sol.active_set = tight_rows(prob.G(), prob.g(), sol.z);
  sol.kkt_residual = check_kkt(prob, sol).residual();
  return sol;
}

VecX project_onto_polytope(const InputPolytope& polytope, const VecX& target) {
  QpProblem qp;
  const int m = polytope.dim();
  qp.H = VecX::Ones(m);
  qp.F = -2.0 * target;
  for (int r = 0; r < polytope.rows(); ++r) qp.rows.push_back({polytope.A.row(r).transpose(), polytope.b(r), {}});
  const Solution sol = solve_qp(qp);
  if (!sol.optimal()) throw std::runtime_error("project_onto_polytope: " + to_string(sol.status));
  return sol.z;
}

std::vector<std::string> check_polytope(const InputPolytope& polytope) {
  std::vector<std::string> problems;
  if (polytope.A.rows() != polytope.b.size() || polytope.A.cols() < 1) {
    problems.emplace_back("A and b dimensions disagree");
    return problems;
  }
  if (!polytope.A.allFinite() || !polytope.b.allFinite()) {
    problems.emplace_back("non-finite entries");
    return problems;
  }
  const int m = polytope.dim();
  const SimplexResult feas = simplex(VecX::Zero(m), polytope.A, polytope.b);
  if (feas.status == SolveStatus::Infeasible) {
    problems.emplace_back("polytope is empty");
    return problems;
  }
  for (int axis = 0; axis < m; ++axis) {
    for (double sign : {1.0, -1.0}) {
      VecX c = VecX::Zero(m);
      c(axis) = sign;
      if (simplex(c, polytope.A, polytope.b).status != SolveStatus::Optimal) {
        problems.push_back("polytope is unbounded along " + std::string(sign > 0 ? "-" : "+") + "u" +
                           std::to_string(axis + 1));
      }
    }
  }
  return problems;
}

Solution solve_extremal(const InputPolytope& polytope, const VecX& cost) {
  Solution sol = solve_lp({cost, polytope.A, polytope.b});
  if (!sol.optimal()) throw std::runtime_error("extremal_control: input polytope LP " + to_string(sol.status));
  return sol;
}

VecX extremal_control(const InputPolytope& polytope, const VecX& cost) { return solve_extremal(polytope, cost).z; }

VecX composite_input_gradient(const PointwiseContext& ctx) {
  if (ctx.terms.empty()) return VecX::Zero(ctx.model.m);
  std::vector<double> values;
  values.reserve(ctx.terms.size());
  for (const auto& term : ctx.terms) values.push_back(term.value);
  const auto lse = lse_compose<double>(values);
  Vec2 grad = Vec2::Zero();
  for (std::size_t k = 0; k < ctx.terms.size(); ++k) grad += lse.weights[k] * ctx.terms[k].grad_i;
  return position_input_matrix(ctx.state, ctx.model).transpose() * grad;
}

VecX best_case_control(const PointwiseContext& ctx) {
  return extremal_control(ctx.polytope, composite_input_gradient(ctx));
}

VecX worst_case_control(const PointwiseContext& ctx) {
  return extremal_control(ctx.polytope, -composite_input_gradient(ctx));
}

}  // namespace rswarm

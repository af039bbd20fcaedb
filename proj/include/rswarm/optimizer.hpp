#pragma once

// Dense LP/QP solvers for the small per-agent problems solved every step.

#include <span>
#include <string>
#include <vector>

#include "rswarm/barriers.hpp"
#include "rswarm/core.hpp"
#include "rswarm/dynamics.hpp"

namespace rswarm {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(SolveStatus status);

/// min c^T u  s.t.  A u <= b, u free.
struct LpProblem {
  VecX c;
  MatX A;
  VecX b;
};

/// One row coeffs . z <= rhs of a stacked decision problem.
struct ConstraintRow {
  VecX coeffs;
  double rhs = 0.0;
  std::string label;
};

/// min z^T diag(H) z + F^T z  s.t.  rows.
struct QpProblem {
  VecX H;  // diagonal weights, all > 0
  VecX F;
  std::vector<ConstraintRow> rows;
  std::vector<std::string> var_map;  // name of each decision entry

  int num_vars() const { return static_cast<int>(H.size()); }
  MatX G() const;
  VecX g() const;
  /// Index of a named decision entry, or -1.
  int var_index(const std::string& name) const;
};

struct Solution {
  VecX z;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<int> active_set;  // rows tight within 1e-7
  VecX multipliers;             // one per row, >= 0 at optimum
  double kkt_residual = 0.0;    // max of the residuals in KktReport
  std::vector<int> certificate; // violated rows of the phase-1 minimizer when infeasible
  int iterations = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct KktReport {
  double primal = 0.0;          // max(G z - g)_+
  double dual = 0.0;            // min(lambda), should be >= 0
  double complementarity = 0.0; // max |lambda_k (G_k z - g_k)|
  double stationarity = 0.0;    // |grad f + G^T lambda|_inf

  double residual() const;
};

/// Simplex (Bland's rule) followed by a minimum-norm pass over the optimal face.
Solution solve_lp(const LpProblem& prob);

/// Primal active-set method for a strictly convex QP.
Solution solve_qp(const QpProblem& prob);

KktReport check_kkt(const VecX& H, const VecX& F, const MatX& G, const VecX& g, const VecX& z,
                    const VecX& lambda);
KktReport check_kkt(const QpProblem& prob, const Solution& sol);
/// KKT check for an LP solution (zero Hessian).
KktReport check_kkt(const LpProblem& prob, const Solution& sol);

/// Euclidean projection of target onto the polytope.
VecX project_onto_polytope(const InputPolytope& polytope, const VecX& target);

/// Problems found when probing {u : A u <= b} for feasibility and boundedness.
std::vector<std::string> check_polytope(const InputPolytope& polytope);

/// argmin over the polytope of cost . u (min-norm tie-break).
VecX extremal_control(const InputPolytope& polytope, const VecX& cost);
/// Same LP, returning the full solution; throws unless it is optimal.
Solution solve_extremal(const InputPolytope& polytope, const VecX& cost);

/// Barrier terms seen by one agent together with its admissible inputs.
struct PointwiseContext {
  AgentState state;
  DynamicsModel model;
  InputPolytope polytope;
  std::vector<BarrierEval> terms;
};

/// L_g h^S for the LSE composite of the context terms (zero when there are none).
VecX composite_input_gradient(const PointwiseContext& ctx);

/// Control that makes the composite barrier decrease fastest.
VecX best_case_control(const PointwiseContext& ctx);

/// Control that makes the composite (inter-agent) barrier increase fastest.
VecX worst_case_control(const PointwiseContext& ctx);

}  // namespace rswarm

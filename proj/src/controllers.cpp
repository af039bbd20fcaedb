#include "rswarm/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace rswarm {

WorldSnapshot make_snapshot(const Scenario& sc, double t, std::vector<AgentState> states,
                            std::vector<VecX> prev_u) {
  WorldSnapshot w;
  w.scenario = &sc;
  w.t = t;
  w.states = std::move(states);
  w.prev_u = std::move(prev_u);
  const int n = w.size();
  w.neighbors.assign(n, {});
  w.sensed_obstacles.assign(n, {});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double r = (w.states[i].p - w.states[j].p).norm();
      if (r <= kSingularDistance) {
        if (i < j) w.coincident.emplace_back(i, j);
        continue;
      }
      if (r <= sc.safety.R_s) w.neighbors[i].push_back(j);
    }
    for (std::size_t o = 0; o < sc.obstacles.size(); ++o) {
      const double v = (w.states[i].p - sc.obstacles[o].center).norm();
      if (v > kSingularDistance && v <= sc.safety.R_s + sc.obstacles[o].radius) {
        w.sensed_obstacles[i].push_back(static_cast<int>(o));
      }
    }
  }
  return w;
}

int current_task_index(const AgentSpec& agent, double t) {
  int idx = -1;
  for (std::size_t k = 0; k < agent.tasks.size(); ++k) {
    if (agent.tasks[k].t_start <= t) idx = static_cast<int>(k);
  }
  return idx;
}

std::optional<GoalTask> current_task(const AgentSpec& agent, double t) {
  const int idx = current_task_index(agent, t);
  if (idx < 0) return std::nullopt;
  return agent.tasks[idx];
}

std::vector<int> formation_neighbors(const WorldSnapshot& w, int i) {
  std::vector<int> out;
  const auto& f = w.scenario->formation;
  if (!f || !f->contains(w.spec(i).id)) return out;
  for (int j : w.neighbors[i]) {
    if (f->contains(w.spec(j).id)) out.push_back(j);
  }
  return out;
}

namespace {

// Builds rows over a decision vector whose first m entries are the control.
class RowBuilder {
 public:
  RowBuilder(QpProblem& qp, int m) : qp_(qp), m_(m) {}

  ConstraintRow blank(const std::string& label) const {
    return {VecX::Zero(qp_.num_vars()), 0.0, label};
  }

  void polytope(const InputPolytope& poly) {
    for (int r = 0; r < poly.rows(); ++r) {
      ConstraintRow row = blank("input_" + std::to_string(r));
      row.coeffs.head(m_) = poly.A.row(r).transpose();
      row.rhs = poly.b(r);
      qp_.rows.push_back(std::move(row));
    }
  }

  void upper(int var, double bound) {
    ConstraintRow row = blank(qp_.var_map[var] + "_max");
    row.coeffs(var) = 1.0;
    row.rhs = bound;
    qp_.rows.push_back(std::move(row));
  }

  void nonnegative(int var) {
    ConstraintRow row = blank(qp_.var_map[var] + "_min");
    row.coeffs(var) = -1.0;
    qp_.rows.push_back(std::move(row));
  }

  /// grad . (f^p + g^p u) <= -slack * value.
  void lie_row(const std::string& label, const Vec2& grad, const AgentState& state, const DynamicsModel& model,
               int slack, double value, double constant = 0.0) {
    ConstraintRow row = blank(label);
    row.coeffs.head(m_) = position_input_matrix(state, model).transpose() * grad;
    row.coeffs(slack) = value;
    row.rhs = -grad.dot(position_drift(state, model)) - constant;
    qp_.rows.push_back(std::move(row));
  }

 private:
  QpProblem& qp_;
  int m_;
};

void init_vars(QpProblem& qp, const AgentSpec& spec, const QpWeights& wts, int extra_slacks,
               const std::vector<std::string>& slack_names, double pair_weight, int pair_count) {
  const int m = spec.model.m;
  const int n = m + extra_slacks + pair_count;
  qp.H = VecX(n);
  qp.F = VecX::Zero(n);
  qp.var_map.clear();
  for (int k = 0; k < m; ++k) {
    qp.H(k) = wts.w_u;
    qp.var_map.push_back("u" + std::to_string(k + 1));
  }
  for (int k = 0; k < extra_slacks; ++k) {
    qp.H(m + k) = wts.w_slack;
    qp.var_map.push_back(slack_names[k]);
  }
  for (int k = 0; k < pair_count; ++k) {
    qp.H(m + extra_slacks + k) = pair_weight;
    qp.var_map.push_back("delta_pair" + std::to_string(k));
  }
}

std::vector<Vec2> member_positions(const WorldSnapshot& w, std::vector<int>& indices) {
  std::vector<Vec2> pos;
  const auto& f = *w.scenario->formation;
  for (AgentId id : f.members) {
    const int idx = w.scenario->index_of(id);
    indices.push_back(idx);
    pos.push_back(w.states[idx].p);
  }
  return pos;
}

// Centroid CLF row for member i with the given per-member weights.
bool add_centroid_row(RowBuilder& rb, const WorldSnapshot& w, int i, const std::vector<double>& weights, int slack) {
  std::vector<int> idx;
  const auto pos = member_positions(w, idx);
  double total = 0.0;
  for (double c : weights) total += c;
  if (!(total > 1e-9)) return false;
  const auto clf = centroid_clf<double>(pos, weights, w.scenario->formation->goal);
  const auto it = std::find(idx.begin(), idx.end(), i);
  const Vec2 grad = clf.grads[it - idx.begin()];
  rb.lie_row("centroid_clf", grad, w.states[i], w.spec(i).model, slack, clf.value);
  return true;
}

bool add_formation_row(RowBuilder& rb, const WorldSnapshot& w, int i, const std::vector<int>& fnb,
                       const std::vector<double>& weights, int slack) {
  if (fnb.empty()) return false;
  double total = 0.0;
  for (double c : weights) total += c;
  if (!(total > 1e-9)) return false;
  std::vector<Vec2> pos, off;
  const auto& f = *w.scenario->formation;
  const AgentId id_i = w.spec(i).id;
  for (int j : fnb) {
    pos.push_back(w.states[j].p);
    off.push_back(f.offset(id_i, w.spec(j).id));
  }
  const Vec2 target = formation_target<double>(pos, off, weights);
  const auto hf = formation_function<double>(w.states[i].p, target);
  rb.lie_row("formation", hf.grad, w.states[i], w.spec(i).model, slack, hf.value);
  return true;
}

}  // namespace

QpProblem assemble_nominal_qp(const WorldSnapshot& w, int i) {
  const Scenario& sc = *w.scenario;
  const AgentSpec& spec = w.spec(i);
  const AgentState& st = w.states[i];
  const int m = spec.model.m;
  const int d1 = m, d2 = m + 1, d3 = m + 2;

  QpProblem qp;
  init_vars(qp, spec, sc.weights, 3, {"delta1", "delta2", "delta3"}, sc.weights.w_pair, 0);
  RowBuilder rb(qp, m);
  rb.polytope(spec.polytope);
  for (int s : {d1, d2, d3}) rb.upper(s, sc.weights.slack_max);
  rb.nonnegative(d3);

  const bool member = sc.formation && sc.formation->contains(spec.id);
  if (member) {
    const std::vector<double> uniform(sc.formation->members.size(), 1.0);
    if (add_centroid_row(rb, w, i, uniform, d1)) qp.F(d1) = -sc.weights.q;
    const auto fnb = formation_neighbors(w, i);
    if (add_formation_row(rb, w, i, fnb, std::vector<double>(fnb.size(), 1.0), d2)) {
      qp.F(d2) = -sc.weights.q_formation;
    }
  } else if (const auto task = current_task(spec, w.t)) {
    const auto clf = goal_clf<double>(st.p, task->target);
    rb.lie_row("goal_clf", clf.grad, st, spec.model, d1, clf.value);
    qp.F(d1) = -sc.weights.q;
  }

  for (int j : w.neighbors[i]) {
    const auto h = pair_barrier<double>(st.p, w.states[j].p, sc.safety.d, spec.id, w.spec(j).id);
    rb.lie_row("safety_" + std::to_string(w.spec(j).id), h.grad_i, st, spec.model, d3, h.value);
  }
  for (int o : w.sensed_obstacles[i]) {
    const auto h = obstacle_barrier<double>(st.p, sc.obstacles[o], spec.id);
    rb.lie_row("obstacle_" + std::to_string(o), h.grad_i, st, spec.model, d3, h.value);
  }
  return qp;
}

QpProblem assemble_resilient_qp(const WorldSnapshot& w, int i, const ResilientContext& ctx) {
  const Scenario& sc = *w.scenario;
  const AgentSpec& spec = w.spec(i);
  const AgentState& st = w.states[i];
  const int m = spec.model.m;
  const int d1 = m, d2 = m + 1, d3 = m + 2, d4 = m + 3;
  const auto& nb = w.neighbors[i];
  require(ctx.eta.size() == nb.size() && ctx.neighbor_worst.size() == nb.size(),
          "assemble_resilient_qp: context does not match the neighbor set");

  QpProblem qp;
  init_vars(qp, spec, sc.weights, 4, {"delta1", "delta2", "delta3", "delta4"}, sc.weights.w_pair,
            static_cast<int>(nb.size()));
  RowBuilder rb(qp, m);
  rb.polytope(spec.polytope);
  for (int s : {d1, d2, d3, d4}) rb.upper(s, sc.weights.slack_max);
  rb.nonnegative(d3);

  const bool member = sc.formation && sc.formation->contains(spec.id);
  if (member) {
    std::vector<double> conf;
    for (AgentId id : sc.formation->members) {
      const int idx = sc.index_of(id);
      conf.push_back(ctx.confidence.empty() ? 1.0 : ctx.confidence[idx]);
    }
    if (add_centroid_row(rb, w, i, conf, d2)) qp.F(d2) = -sc.weights.q;
    const auto fnb = formation_neighbors(w, i);
    std::vector<double> weights = ctx.task_weight;
    if (weights.size() != fnb.size()) weights.assign(fnb.size(), 1.0);
    if (add_formation_row(rb, w, i, fnb, weights, d4)) qp.F(d4) = -sc.weights.q_formation;
  } else if (const auto task = current_task(spec, w.t)) {
    const auto clf = goal_clf<double>(st.p, task->target);
    rb.lie_row("goal_clf", clf.grad, st, spec.model, d1, clf.value);
    qp.F(d1) = -sc.weights.q;
  }

  for (int o : w.sensed_obstacles[i]) {
    const auto h = obstacle_barrier<double>(st.p, sc.obstacles[o], spec.id);
    rb.lie_row("obstacle_" + std::to_string(o), h.grad_i, st, spec.model, d3, h.value);
  }

  for (std::size_t k = 0; k < nb.size(); ++k) {
    const int j = nb[k];
    const int slack = m + 4 + static_cast<int>(k);
    rb.upper(slack, sc.weights.slack_max);
    rb.nonnegative(slack);
    const AgentSpec& sj = w.spec(j);
    const AgentState& xj = w.states[j];
    const auto h = pair_barrier<double>(st.p, xj.p, sc.safety.d, spec.id, sj.id);
    const double h_bar = h.value + ctx.eta[k] / sc.sim.n;
    const VecX& u_j = ctx.adversaries.count(sj.id) ? ctx.neighbor_worst[k] : w.prev_u[j];
    const double pi = h.grad_j.dot(position_drift(xj, sj.model) + position_input_matrix(xj, sj.model) * u_j);
    rb.lie_row("resilient_safety_" + std::to_string(sj.id), h.grad_i, st, spec.model, slack, h_bar, pi);
  }
  return qp;
}

VecX chase_control(const WorldSnapshot& w, int j, int target) {
  const Scenario& sc = *w.scenario;
  PointwiseContext ctx{w.states[j], w.spec(j).model, w.spec(j).polytope, {}};
  if ((w.states[j].p - w.states[target].p).norm() > kSingularDistance) {
    ctx.terms.push_back(pair_barrier<double>(w.states[j].p, w.states[target].p, sc.safety.d, w.spec(j).id,
                                             w.spec(target).id));
  }
  return worst_case_control(ctx);
}

VecX mislead_control(const InputPolytope& polytope, const VecX& nominal, const Vec2& bias) {
  const VecX raw = nominal + bias;
  if (polytope.contains(raw, 0.0)) return raw;
  return project_onto_polytope(polytope, raw);
}

}  // namespace rswarm

#include "rswarm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "rswarm/criticality.hpp"
#include "rswarm/metrics.hpp"

namespace rswarm {

std::vector<const Event*> RunLog::events_of(const std::string& kind) const {
  std::vector<const Event*> out;
  for (const auto& e : events) {
    if (e.kind == kind) out.push_back(&e);
  }
  return out;
}

std::optional<DetectionVerdict> RunLog::verdict_for(AgentId id) const {
  for (const auto& v : verdicts) {
    if (v.suspect == id) return v;
  }
  return std::nullopt;
}

namespace {

// Per-agent goal-progress bookkeeping across steps.
struct Progress {
  int task = -2;
  Vec2 segment_start = Vec2::Zero();
  double lambda = 0.0;
  bool valid = false;
};

struct Monitor {
  VecX u_min;
  std::vector<VecX> neighbor_worst;  // u_j^max toward i per neighbor entry
};

class Simulator {
 public:
  Simulator(const Scenario& sc, bool resilient, bool detect)
      : sc_(sc), resilient_(resilient), detect_(detect), detector_(sc.sim.n) {
    log_.scenario = sc.name;
    for (const auto& a : sc.agents) log_.ids.push_back(a.id);
    progress_.assign(sc.agents.size(), {});
    if (sc.formation) {
      for (AgentId id : sc.formation->members) centroid0_ += sc.agents[sc.index_of(id)].p0;
      centroid0_ /= static_cast<double>(sc.formation->members.size());
    }
  }

  RunLog run() {
    const int n = static_cast<int>(sc_.agents.size());
    if (n == 0) return log_;
    std::vector<AgentState> states;
    std::vector<VecX> prev_u;
    for (const auto& a : sc_.agents) {
      states.push_back({a.id, a.p0, a.phi0, 0.0});
      prev_u.push_back(VecX::Zero(a.model.m));
    }
    const double dt = sc_.sim.dt;
    const long steps = std::lround(sc_.sim.t_end / dt);
    for (long k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      for (auto& s : states) s.t = t;
      const WorldSnapshot w = make_snapshot(sc_, t, states, prev_u);
      StepRecord rec;
      rec.t = t;
      rec.states = states;
      sense(w);
      std::vector<Monitor> mon(n);
      rec.behavior.resize(n);
      for (int i = 0; i < n; ++i) monitor(w, i, mon[i], rec.behavior[i]);
      formation_monitor(w, rec);
      if (detect_) detect(w, rec);
      rec.controls.resize(n);
      rec.mode.resize(n);
      for (int i = 0; i < n; ++i) control(w, i, mon, rec, rec.controls[i], rec.mode[i]);
      prev_u = rec.controls;
      if (k < steps) {
        for (int i = 0; i < n; ++i) states[i] = step(states[i], sc_.agents[i].model, rec.controls[i], dt);
      }
      log_.steps.push_back(std::move(rec));
    }
    return std::move(log_);
  }

 private:
  void emit(std::string kind, double t, std::vector<AgentId> agents, std::vector<std::pair<std::string, double>> values,
            std::string detail = {}) {
    log_.events.push_back({std::move(kind), t, std::move(agents), std::move(values), std::move(detail)});
  }

  bool is_member(int i) const { return sc_.formation && sc_.formation->contains(sc_.agents[i].id); }

  bool scripted_now(int i, double t) const {
    const AdversarySpec* adv = sc_.adversary(sc_.agents[i].id);
    return adv && t >= adv->t_start;
  }

  void sense(const WorldSnapshot& w) {
    const double t = w.t;
    for (const auto& [a, b] : w.coincident) {
      const auto key = std::make_pair(a, b);
      if (coincident_.insert(key).second) {
        emit("singularity", t, {w.spec(a).id, w.spec(b).id}, {}, "coincident agents excluded from neighbor sets");
      }
    }
    for (int i = 0; i < w.size(); ++i) {
      for (int j = i + 1; j < w.size(); ++j) {
        const double r = (w.states[i].p - w.states[j].p).norm();
        const auto key = std::make_pair(i, j);
        const bool inside = r <= sc_.safety.d;
        if (inside && !pair_violating_.count(key)) {
          emit("safety_violation", t, {w.spec(i).id, w.spec(j).id}, {{"distance", r}});
        }
        if (inside) pair_violating_.insert(key); else pair_violating_.erase(key);
      }
      for (std::size_t o = 0; o < sc_.obstacles.size(); ++o) {
        const double v = (w.states[i].p - sc_.obstacles[o].center).norm();
        const auto key = std::make_pair(i, static_cast<int>(o));
        const bool inside = v <= sc_.obstacles[o].radius;
        if (inside && !obstacle_violating_.count(key)) {
          emit("obstacle_violation", t, {w.spec(i).id}, {{"obstacle", static_cast<double>(o)}, {"distance", v}});
        }
        if (inside) obstacle_violating_.insert(key); else obstacle_violating_.erase(key);
      }
      const AgentSpec& spec = w.spec(i);
      for (std::size_t k = 0; k < spec.tasks.size(); ++k) {
        const auto& task = spec.tasks[k];
        const GoalRegion* region = sc_.goal(task.region);
        if (t < task.t_start || t > task.t_end || !region) continue;
        const auto key = std::make_pair(i, static_cast<int>(k));
        if (arrived_.count(key)) continue;
        if ((w.states[i].p - region->center).norm() <= region->radius) {
          arrived_.insert(key);
          emit("goal_arrival", t, {spec.id}, {{"task", static_cast<double>(k)}}, region->name);
        }
      }
    }
  }

  // Extremal inputs, critical times and zones, and the metrics of agent i.
  void monitor(const WorldSnapshot& w, int i, Monitor& m, BehaviorRecord& b) {
    const AgentSpec& spec = w.spec(i);
    const AgentState& st = w.states[i];
    const auto& nb = w.neighbors[i];
    const auto& so = w.sensed_obstacles[i];
    const int n_c = sc_.metrics.n_c;
    b.id = spec.id;

    PointwiseContext best{st, spec.model, spec.polytope, {}};
    for (int j : nb) best.terms.push_back(pair_barrier<double>(st.p, w.states[j].p, sc_.safety.d, spec.id, w.spec(j).id));
    for (int o : so) best.terms.push_back(obstacle_barrier<double>(st.p, sc_.obstacles[o], spec.id));
    m.u_min = extremal(spec.polytope, composite_input_gradient(best));

    double T_s = std::numeric_limits<double>::infinity();
    std::vector<Vec2> nb_pos;
    for (int j : nb) {
      const AgentSpec& sj = w.spec(j);
      const AgentState& xj = w.states[j];
      PointwiseContext chase{xj, sj.model, sj.polytope,
                             {pair_barrier<double>(xj.p, st.p, sc_.safety.d, sj.id, spec.id)}};
      m.neighbor_worst.push_back(extremal(sj.polytope, -composite_input_gradient(chase)));
      const double r = (st.p - xj.p).norm();
      double T = kCriticalTimeCap;
      try {
        T = critical_time_pair(r, sc_.safety.d, spec.model.b_f, spec.model.b_g, m.u_min, m.neighbor_worst.back(),
                               xj.p);
      } catch (const UnsafeStateError&) {
        T = 0.0;
      } catch (const ContractViolation&) {
        T = kCriticalTimeCap;
      }
      T_s = std::min(T_s, T);
      b.neighbor_ids.push_back(sj.id);
      nb_pos.push_back(xj.p);
    }
    if (nb.empty()) T_s = sc_.sim.max_horizon;
    b.T_s = T_s;
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const int j = nb[k];
      b.eta.push_back(critical_zone_pair(st, spec.model, m.u_min, w.states[j], w.spec(j).model,
                                         m.neighbor_worst[k], sc_.sim.n * T_s, sc_.sim.dt, sc_.sim.max_horizon));
    }

    double T_o = sc_.sim.max_horizon;
    std::vector<Obstacle> obs;
    for (int o : so) {
      const Obstacle& ob = sc_.obstacles[o];
      PointwiseContext toward{st, spec.model, spec.polytope, {obstacle_barrier<double>(st.p, ob, spec.id)}};
      const VecX u_max = extremal(spec.polytope, -composite_input_gradient(toward));
      const double v = (st.p - ob.center).norm();
      double T = kCriticalTimeCap;
      try {
        T = critical_time_obstacle(v, ob.radius, spec.model.b_f, spec.model.b_g, u_max);
      } catch (const UnsafeStateError&) {
        T = 0.0;
      } catch (const ContractViolation&) {
        T = kCriticalTimeCap;
      }
      T_o = std::min(T_o, T);
      b.eta_obstacle.push_back(
          critical_zone_obstacle(st, spec.model, u_max, sc_.sim.n * T, sc_.sim.dt, sc_.sim.max_horizon));
      obs.push_back(ob);
    }
    b.T_s_obstacle = T_o;

    const auto S = safety_metric<double>(st.p, nb_pos, obs, sc_.safety.d, n_c);
    const auto Sw = worst_case_safety_metric<double>(st.p, nb_pos, obs, b.eta, b.eta_obstacle, n_c);
    b.S_R = S.S;
    b.Gamma = S.Gamma;
    b.S_R_w = Sw.S_w;
    b.gamma_S = Sw.gamma;
    b.Gamma_w = Sw.Gamma_w;
    b.condition_a = !safety_threshold_check(b.S_R, b.gamma_S);

    Progress& pr = progress_[i];
    const int task = current_task_index(spec, w.t);
    if (task >= 0 && !is_member(i)) {
      const Vec2 target = spec.tasks[task].target;
      const bool switched = task != pr.task;
      if (switched || (pr.segment_start - target).norm() <= kSingularDistance) pr.segment_start = st.p;
      b.has_goal = true;
      if ((pr.segment_start - target).norm() > kSingularDistance) {
        const auto g = goal_metric<double>(st.p, pr.segment_start, target, n_c);
        b.lambda = g.lambda;
        b.G_R = g.G_R;
      }
      b.lambda_dot = (pr.valid && !switched) ? (b.lambda - pr.lambda) / sc_.sim.dt : 0.0;
      b.deviating = pr.valid && !switched &&
                    goal_deviation_flag(b.lambda, b.lambda_dot, sc_.metrics.tol_dev, sc_.metrics.tol_goal);
      pr.lambda = b.lambda;
      pr.valid = true;
    } else {
      pr.valid = false;
    }
    pr.task = task;
  }

  void formation_monitor(const WorldSnapshot& w, StepRecord& rec) {
    const int n = w.size();
    confidence_.assign(n, 1.0);
    if (!sc_.formation) return;
    const auto& f = *sc_.formation;
    const int n_c = sc_.metrics.n_c;
    const TaskThreshold thr = task_threshold(sc_.metrics, w.t);

    Vec2 c = Vec2::Zero();
    for (AgentId id : f.members) c += w.states[sc_.index_of(id)].p;
    c /= static_cast<double>(f.members.size());
    rec.centroid = c;
    const double lambda_bar = formation_goal_metric<double>(c, centroid0_, f.goal);
    const double lambda_bar_dot = lambda_bar_valid_ ? (lambda_bar - lambda_bar_prev_) / sc_.sim.dt : 0.0;
    lambda_bar_prev_ = lambda_bar;
    lambda_bar_valid_ = true;

    std::vector<int> rows;
    std::vector<std::vector<double>> metrics;
    for (int i = 0; i < n; ++i) {
      if (!is_member(i)) continue;
      BehaviorRecord& b = rec.behavior[i];
      b.lambda = lambda_bar;
      b.lambda_dot = lambda_bar_dot;
      b.G_R = detail::bounded_exp(lambda_bar, n_c);
      b.gamma_F = thr.gamma_F;
      std::vector<double> counted;
      for (int j : formation_neighbors(w, i)) {
        const AgentId id_j = w.spec(j).id;
        const double c_ij = f.offset(b.id, id_j).norm();
        const double F = task_metric<double>(w.states[i].p, w.states[j].p, c_ij, n_c);
        b.formation_ids.push_back(id_j);
        b.F_R.push_back(F);
        b.F_R_min = std::min(b.F_R_min, F);
        // Disagreement with a convicted member says nothing about agent i.
        if (!suspected_.count(id_j)) counted.push_back(F);
      }
      rows.push_back(i);
      metrics.push_back(std::move(counted));
    }
    if (w.t + 1e-9 < f.settle_time) {
      rec.weighted_centroid = c;
      return;
    }
    const FormationCheck check = run_algorithm2(metrics, thr.gamma_F, n_c);
    Vec2 acc = Vec2::Zero();
    double total = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const int i = rows[r];
      confidence_[i] = check.confidence[r];
      if (detect_ && check.flagged[r]) flag_formation(w, i, check.deviating[r], metrics[r].size());
      // A convicted member keeps its lowest confidence, even once out of range.
      if (const auto it = latched_.find(w.spec(i).id); it != latched_.end()) {
        it->second = std::min(it->second, confidence_[i]);
        confidence_[i] = it->second;
      }
      rec.behavior[i].C = confidence_[i];
      acc += confidence_[i] * w.states[i].p;
      total += confidence_[i];
    }
    if (total > 1e-12) rec.weighted_centroid = acc / total;
  }

  void flag_formation(const WorldSnapshot& w, int i, int deviating, std::size_t N) {
    const AgentId id = w.spec(i).id;
    latched_.emplace(id, confidence_[i]);
    if (suspected_.count(id)) return;
    suspected_.insert(id);
    DetectionVerdict v;
    v.suspect = id;
    v.kind = AdversaryKind::FormationAdversary;
    v.t_detect = w.t;
    v.monitor = id;
    v.t_window_start = w.t;
    char buf[96];
    std::snprintf(buf, sizeof buf, "index=%d N=%zu C=%.9g", deviating, N, confidence_[i]);
    v.evidence = buf;
    record_verdict(v);
  }

  void record_verdict(const DetectionVerdict& v) {
    log_.verdicts.push_back(v);
    emit("detection", v.t_detect, {v.suspect, v.monitor},
         {{"window", v.window}, {"t_window_start", v.t_window_start}}, to_string(v.kind) + ": " + v.evidence);
  }

  // Agents sensing a convicted adversary may deviate to evade it.
  bool evading(const WorldSnapshot& w, int k) const {
    for (int j : w.neighbors[k]) {
      if (suspected_.count(w.spec(j).id)) return true;
    }
    return false;
  }

  void detect(const WorldSnapshot& w, const StepRecord& rec) {
    for (int i = 0; i < w.size(); ++i) {
      const BehaviorRecord& b = rec.behavior[i];
      MonitorSample s;
      s.t = w.t;
      s.condition_a = b.condition_a;
      s.T_s = b.T_s;
      if (b.has_goal && !evading(w, i)) s.candidates.push_back({b.id, b.deviating, b.Gamma});
      for (int j : w.neighbors[i]) {
        const BehaviorRecord& bj = rec.behavior[j];
        if (!bj.has_goal || evading(w, j)) continue;
        const double r = (w.states[i].p - w.states[j].p).norm();
        s.candidates.push_back({bj.id, bj.deviating, sc_.safety.d / r});
      }
      const auto v = detector_.update(b.id, s);
      if (v && suspected_.insert(v->suspect).second) record_verdict(*v);
    }
  }

  VecX extremal(const InputPolytope& poly, const VecX& cost) {
    const Solution sol = solve_extremal(poly, cost);
    track(sol);
    return sol.z;
  }

  void track(const Solution& sol) {
    ++log_.solves;
    if (sol.optimal()) log_.max_kkt_residual = std::max(log_.max_kkt_residual, sol.kkt_residual);
    else ++log_.failed_solves;
  }

  void control(const WorldSnapshot& w, int i, const std::vector<Monitor>& mon, const StepRecord& rec, VecX& u,
               std::string& mode) {
    const AgentSpec& spec = w.spec(i);
    const int m = spec.model.m;
    const AdversarySpec* adv = sc_.adversary(spec.id);
    const bool scripted = adv && w.t >= adv->t_start;
    if (scripted && adv->cls == AdversaryClass::Chase) {
      mode = "chase";
      u = chase_control(w, i, sc_.index_of(adv->target));
      return;
    }
    QpProblem qp;
    if (!scripted && resilient_ && !log_.verdicts.empty()) {
      mode = "resilient";
      ResilientContext ctx;
      ctx.eta = rec.behavior[i].eta;
      ctx.neighbor_worst = mon[i].neighbor_worst;
      for (const auto& v : log_.verdicts) ctx.adversaries.insert(v.suspect);
      ctx.confidence = confidence_;
      ctx.task_weight = rec.behavior[i].F_R;
      qp = assemble_resilient_qp(w, i, ctx);
    } else {
      mode = scripted ? "mislead" : "nominal";
      qp = assemble_nominal_qp(w, i);
    }
    const Solution sol = solve_qp(qp);
    track(sol);
    if (!sol.optimal()) {
      u = w.prev_u[i];
      emit("qp_infeasible", w.t, {spec.id}, {{"iterations", static_cast<double>(sol.iterations)}},
           to_string(sol.status) + "; holding previous input");
      mode = "hold";
      return;
    }
    u = control_part(sol, m);
    if (scripted) u = mislead_control(spec.polytope, u, adv->bias);
  }

  const Scenario& sc_;
  bool resilient_;
  bool detect_;
  SafetyDetector detector_;
  RunLog log_;
  std::vector<Progress> progress_;
  std::vector<double> confidence_;
  std::map<AgentId, double> latched_;
  Vec2 centroid0_ = Vec2::Zero();
  double lambda_bar_prev_ = 0.0;
  bool lambda_bar_valid_ = false;
  std::set<AgentId> suspected_;
  std::set<std::pair<int, int>> coincident_;
  std::set<std::pair<int, int>> pair_violating_;
  std::set<std::pair<int, int>> obstacle_violating_;
  std::set<std::pair<int, int>> arrived_;
};

}  // namespace

RunLog run(const Scenario& sc, const RunOptions& opts) {
  validate_or_throw(sc);
  Simulator sim(sc, opts.resilient.value_or(sc.sim.resilient), opts.detect.value_or(sc.sim.detect));
  return sim.run();
}

std::vector<const Event*> intact_violations(const RunLog& log, const Scenario& sc) {
  std::vector<const Event*> out;
  for (const auto& e : log.events) {
    if (e.kind != "safety_violation" && e.kind != "obstacle_violation") continue;
    const bool intact = std::any_of(e.agents.begin(), e.agents.end(),
                                    [&](AgentId id) { return sc.adversary(id) == nullptr; });
    if (intact) out.push_back(&e);
  }
  return out;
}

bool check_goal_window(const RunLog& log, AgentId id, const Vec2& center, double radius, double t_a, double t_b) {
  const auto it = std::find(log.ids.begin(), log.ids.end(), id);
  if (it == log.ids.end()) return false;
  const auto idx = static_cast<std::size_t>(it - log.ids.begin());
  for (const auto& s : log.steps) {
    if (s.t + 1e-9 < t_a || s.t > t_b + 1e-9) continue;
    if ((s.states[idx].p - center).norm() <= radius) return true;
  }
  return false;
}

double min_pair_clearance(const RunLog& log, AgentId a, AgentId b, double d) {
  const auto ia = std::find(log.ids.begin(), log.ids.end(), a) - log.ids.begin();
  const auto ib = std::find(log.ids.begin(), log.ids.end(), b) - log.ids.begin();
  require(ia < static_cast<long>(log.ids.size()) && ib < static_cast<long>(log.ids.size()),
          "min_pair_clearance: unknown agent id");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : log.steps) best = std::min(best, (s.states[ia].p - s.states[ib].p).norm() - d);
  return best;
}

}  // namespace rswarm

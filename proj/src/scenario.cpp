#include "rswarm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rswarm/optimizer.hpp"

namespace rswarm {

std::string to_string(AdversaryClass cls) {
  return cls == AdversaryClass::Chase ? "chase" : "mislead";
}

AdversaryClass adversary_class_from_string(const std::string& name) {
  if (name == "chase") return AdversaryClass::Chase;
  if (name == "mislead") return AdversaryClass::Mislead;
  throw ContractViolation("unknown adversary class '" + name + "'");
}

bool FormationSpec::contains(AgentId id) const {
  return std::find(members.begin(), members.end(), id) != members.end();
}

int Scenario::index_of(AgentId id) const {
  for (std::size_t k = 0; k < agents.size(); ++k) {
    if (agents[k].id == id) return static_cast<int>(k);
  }
  return -1;
}

const GoalRegion* Scenario::goal(const std::string& goal_name) const {
  for (const auto& g : goals) {
    if (g.name == goal_name) return &g;
  }
  return nullptr;
}

const AdversarySpec* Scenario::adversary(AgentId id) const {
  for (const auto& a : adversaries) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

namespace {

bool finite2(const Vec2& v) { return v.allFinite(); }

class Collector {
 public:
  void check(bool ok, std::string path, std::string message) {
    if (!ok) errors.push_back({std::move(path), std::move(message)});
  }
  std::vector<FieldError> errors;
};

}  // namespace

std::vector<FieldError> validate(const Scenario& sc) {
  Collector c;
  c.check(sc.version == 1, "/version", "unsupported version " + std::to_string(sc.version));

  const auto& s = sc.safety;
  c.check(std::isfinite(s.d) && s.d > 0, "/safety/d", "must be > 0");
  c.check(std::isfinite(s.R_s) && s.R_s > s.d, "/safety/R_s", "must exceed d");

  c.check(sc.metrics.n_c >= 2, "/metrics/n_c", "must be an integer >= 2");
  if (sc.metrics.envelope) {
    const auto& e = *sc.metrics.envelope;
    c.check(e.k1 > 0, "/metrics/envelope/k1", "must be > 0");
    c.check(e.k2 > 0, "/metrics/envelope/k2", "must be > 0");
    c.check(e.theta0 > 0, "/metrics/envelope/theta0", "must be > 0");
  } else {
    c.check(sc.metrics.theta_w > 0, "/metrics/theta_w", "must be > 0");
  }
  c.check(sc.metrics.tol_dev >= 0, "/metrics/tol_dev", "must be >= 0");
  c.check(sc.metrics.tol_goal >= 0, "/metrics/tol_goal", "must be >= 0");

  const auto& w = sc.weights;
  c.check(w.w_u > 0, "/weights/w_u", "must be > 0");
  c.check(w.w_slack > 0, "/weights/w_slack", "must be > 0");
  c.check(w.w_pair > 0, "/weights/w_pair", "must be > 0");
  c.check(w.q > 0, "/weights/q", "must be > 0");
  c.check(w.q_formation > 0, "/weights/q_formation", "must be > 0");
  c.check(w.slack_max > 0, "/weights/slack_max", "must be > 0");

  c.check(std::isfinite(sc.sim.dt) && sc.sim.dt > 0, "/sim/dt", "must be > 0");
  c.check(std::isfinite(sc.sim.t_end) && sc.sim.t_end >= 0, "/sim/t_end", "must be >= 0");
  c.check(sc.sim.n >= 2, "/sim/n", "must be an integer >= 2");
  c.check(sc.sim.max_horizon > 0, "/sim/max_horizon", "must be > 0");

  std::set<std::string> goal_names;
  for (std::size_t g = 0; g < sc.goals.size(); ++g) {
    const std::string path = "/goals/" + std::to_string(g);
    const auto& goal = sc.goals[g];
    c.check(!goal.name.empty(), path + "/name", "must be non-empty");
    c.check(goal_names.insert(goal.name).second, path + "/name", "duplicate goal name '" + goal.name + "'");
    c.check(finite2(goal.center), path + "/center", "must be finite");
    c.check(goal.radius > 0, path + "/radius", "must be > 0");
  }

  for (std::size_t o = 0; o < sc.obstacles.size(); ++o) {
    const std::string path = "/obstacles/" + std::to_string(o);
    c.check(finite2(sc.obstacles[o].center), path + "/center", "must be finite");
    c.check(sc.obstacles[o].radius > 0, path + "/radius", "must be > 0");
  }

  std::set<AgentId> ids;
  for (std::size_t a = 0; a < sc.agents.size(); ++a) {
    const std::string path = "/agents/" + std::to_string(a);
    const auto& ag = sc.agents[a];
    c.check(ids.insert(ag.id).second, path + "/id", "duplicate agent id " + std::to_string(ag.id));
    c.check(finite2(ag.p0), path + "/p0", "must be finite");
    c.check(std::isfinite(ag.phi0), path + "/phi0", "must be finite");
    try {
      ag.model.validate();
    } catch (const ContractViolation& e) {
      c.check(false, path + "/model", e.what());
    }
    if (ag.polytope.dim() != ag.model.m) {
      c.check(false, path + "/polytope", "dimension must equal the model input dimension");
    } else {
      for (const auto& problem : check_polytope(ag.polytope)) c.check(false, path + "/polytope", problem);
    }
    double prev_start = -1.0;
    for (std::size_t k = 0; k < ag.tasks.size(); ++k) {
      const std::string tp = path + "/tasks/" + std::to_string(k);
      const auto& task = ag.tasks[k];
      c.check(sc.goal(task.region) != nullptr, tp + "/region", "unknown goal region '" + task.region + "'");
      c.check(finite2(task.target), tp + "/target", "must be finite");
      c.check(task.t_end >= task.t_start, tp + "/t_end", "must be >= t_start");
      c.check(task.t_start > prev_start, tp + "/t_start", "tasks must start in increasing order");
      prev_start = task.t_start;
      if (k == 0) {
        c.check(task.t_start == 0.0, tp + "/t_start", "first task must start at 0");
        c.check((ag.p0 - task.target).norm() > kSingularDistance, tp + "/target",
                "agent starts at its goal target");
      }
    }
    if (sc.formation && sc.formation->contains(ag.id)) {
      c.check(ag.tasks.empty(), path + "/tasks", "formation members take no individual goal tasks");
    }
  }

  for (std::size_t o = 0; o < sc.obstacles.size(); ++o) {
    for (std::size_t a = 0; a < sc.agents.size(); ++a) {
      const double v = (sc.agents[a].p0 - sc.obstacles[o].center).norm();
      c.check(v > sc.obstacles[o].radius, "/agents/" + std::to_string(a) + "/p0",
              "starts inside obstacle " + std::to_string(o));
    }
  }
  for (std::size_t a = 0; a < sc.agents.size(); ++a) {
    for (std::size_t b = a + 1; b < sc.agents.size(); ++b) {
      const double r = (sc.agents[a].p0 - sc.agents[b].p0).norm();
      c.check(r > s.d, "/agents/" + std::to_string(b) + "/p0",
              "starts within d of agent " + std::to_string(sc.agents[a].id));
    }
  }

  if (sc.formation) {
    const auto& f = *sc.formation;
    c.check(f.members.size() >= 2, "/formation/members", "needs at least two members");
    std::set<AgentId> seen;
    for (std::size_t k = 0; k < f.members.size(); ++k) {
      const AgentId id = f.members[k];
      const std::string mp = "/formation/members/" + std::to_string(k);
      c.check(ids.count(id) == 1, mp, "unknown agent id " + std::to_string(id));
      c.check(seen.insert(id).second, mp, "duplicate member " + std::to_string(id));
      c.check(f.offsets.count(id) == 1, "/formation/offsets/" + std::to_string(id), "missing offset");
    }
    for (const auto& [id, off] : f.offsets) {
      c.check(f.contains(id), "/formation/offsets/" + std::to_string(id), "offset for a non-member");
      c.check(finite2(off), "/formation/offsets/" + std::to_string(id), "must be finite");
    }
    c.check(finite2(f.goal), "/formation/G_f", "must be finite");
    c.check(f.goal_radius > 0, "/formation/goal_radius", "must be > 0");
    c.check(f.settle_time >= 0, "/formation/settle_time", "must be >= 0");
    if (f.members.size() >= 2 && seen.size() == f.members.size()) {
      Vec2 centroid = Vec2::Zero();
      int count = 0;
      for (AgentId id : f.members) {
        const int idx = sc.index_of(id);
        if (idx < 0) continue;
        centroid += sc.agents[idx].p0;
        ++count;
      }
      if (count > 0) {
        centroid /= count;
        c.check((centroid - f.goal).norm() > kSingularDistance, "/formation/G_f",
                "initial centroid coincides with the goal");
      }
    }
  }

  std::set<AgentId> adv_ids;
  for (std::size_t k = 0; k < sc.adversaries.size(); ++k) {
    const std::string path = "/adversaries/" + std::to_string(k);
    const auto& adv = sc.adversaries[k];
    c.check(ids.count(adv.id) == 1, path + "/id", "unknown agent id " + std::to_string(adv.id));
    c.check(adv_ids.insert(adv.id).second, path + "/id", "agent scripted twice");
    c.check(std::isfinite(adv.t_start) && adv.t_start >= 0, path + "/t_start", "must be >= 0");
    if (adv.cls == AdversaryClass::Chase) {
      c.check(ids.count(adv.target) == 1 && adv.target != adv.id, path + "/params/target",
              "must name another agent");
    } else {
      c.check(sc.formation && sc.formation->contains(adv.id), path + "/id",
              "mislead adversaries must be formation members");
      c.check(finite2(adv.bias), path + "/params/bias", "must be finite");
    }
  }
  return c.errors;
}

void validate_or_throw(const Scenario& sc) {
  auto errors = validate(sc);
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

}  // namespace rswarm

#pragma once

// Per-agent control synthesis: nominal and resilient CBF/CLF QPs and adversary policies.

#include <optional>
#include <set>
#include <vector>

#include "rswarm/optimizer.hpp"
#include "rswarm/scenario.hpp"

namespace rswarm {

/// Positions, last controls and sensed sets of every agent at one instant.
struct WorldSnapshot {
  const Scenario* scenario = nullptr;
  double t = 0.0;
  std::vector<AgentState> states;
  std::vector<VecX> prev_u;
  std::vector<std::vector<int>> neighbors;         // agent indices within R_s
  std::vector<std::vector<int>> sensed_obstacles;  // obstacle indices within R_s of the rim
  std::vector<std::pair<int, int>> coincident;     // index pairs closer than kSingularDistance

  const AgentSpec& spec(int i) const { return scenario->agents[i]; }
  int size() const { return static_cast<int>(states.size()); }
};

WorldSnapshot make_snapshot(const Scenario& sc, double t, std::vector<AgentState> states,
                            std::vector<VecX> prev_u);

/// Task in force for an agent at time t, if any.
std::optional<GoalTask> current_task(const AgentSpec& agent, double t);

/// Index of the task in force, or -1.
int current_task_index(const AgentSpec& agent, double t);

/// Formation neighbors of i: sensed agents that are members, excluding i.
std::vector<int> formation_neighbors(const WorldSnapshot& w, int i);

/// Decision layout [u, delta1, delta2, delta3] for the nominal program.
QpProblem assemble_nominal_qp(const WorldSnapshot& w, int i);

/// Inputs to the resilient program computed by the monitor for agent i.
struct ResilientContext {
  std::vector<double> eta;                  // critical zone per entry of w.neighbors[i]
  std::vector<VecX> neighbor_worst;         // u_j^max toward i per entry of w.neighbors[i]
  std::set<AgentId> adversaries;            // agents with a verdict
  std::vector<double> confidence;           // C_k per agent index
  std::vector<double> task_weight;          // F_Rij per entry of formation_neighbors(w, i)
};

/// Decision layout [u, delta1..delta4, delta_ij...] for the resilient program.
QpProblem assemble_resilient_qp(const WorldSnapshot& w, int i, const ResilientContext& ctx);

/// Worst-case input of agent j against a single target (chasing).
VecX chase_control(const WorldSnapshot& w, int j, int target);

/// Nominal control plus a constant bias, projected back onto the input polytope.
VecX mislead_control(const InputPolytope& polytope, const VecX& nominal, const Vec2& bias);

/// Control entries of a QP solution.
inline VecX control_part(const Solution& sol, int m) { return sol.z.head(m); }

}  // namespace rswarm

#pragma once

// Typed scenario description consumed by the engine.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rswarm/barriers.hpp"
#include "rswarm/core.hpp"
#include "rswarm/dynamics.hpp"
#include "rswarm/metrics.hpp"

namespace rswarm {

struct GoalRegion {
  std::string name;
  Vec2 center = Vec2::Zero();
  double radius = 0.25;
  bool operator==(const GoalRegion&) const = default;
};

/// Reach `region` inside [t_start, t_end]; the agent steers to `target` from t_start on.
struct GoalTask {
  std::string region;
  Vec2 target = Vec2::Zero();
  double t_start = 0.0;
  double t_end = 0.0;
  bool operator==(const GoalTask&) const = default;
};

struct AgentSpec {
  AgentId id = 0;
  Vec2 p0 = Vec2::Zero();
  double phi0 = 0.0;
  DynamicsModel model;
  InputPolytope polytope = InputPolytope::box(1.0);
  std::vector<GoalTask> tasks;
  bool operator==(const AgentSpec&) const = default;
};

enum class AdversaryClass { Chase, Mislead };

std::string to_string(AdversaryClass cls);
AdversaryClass adversary_class_from_string(const std::string& name);

struct AdversarySpec {
  AgentId id = 0;
  AdversaryClass cls = AdversaryClass::Chase;
  double t_start = 0.0;
  AgentId target = -1;        // chase only
  Vec2 bias = Vec2::Zero();   // mislead only
  bool operator==(const AdversarySpec&) const = default;
};

struct FormationSpec {
  std::vector<AgentId> members;
  std::map<AgentId, Vec2> offsets;  // desired shape; c_ji = offsets[i] - offsets[j]
  Vec2 goal = Vec2::Zero();
  double goal_radius = 0.5;
  double settle_time = 50.0;  // formation agreement checks start after this time [s]
  bool operator==(const FormationSpec&) const = default;

  bool contains(AgentId id) const;
  /// Desired p_i - p_j.
  Vec2 offset(AgentId i, AgentId j) const { return offsets.at(i) - offsets.at(j); }
};

struct QpWeights {
  double w_u = 1.0;
  double w_slack = 10.0;
  double w_pair = 10.0;
  double q = 1.0;            // reward on goal and centroid CLF slacks
  double q_formation = 1.0;  // reward on the formation slack
  double slack_max = 1e3;
  bool operator==(const QpWeights&) const = default;
};

struct SimConfig {
  double dt = 0.05;
  double t_end = 10.0;
  int n = 3;
  double max_horizon = 50.0;
  bool resilient = false;
  bool detect = true;
  bool operator==(const SimConfig&) const = default;
};

struct Scenario {
  int version = 1;
  std::string name;
  std::vector<AgentSpec> agents;
  std::vector<Obstacle> obstacles;
  SafetyParams safety;
  MetricConfig metrics;
  QpWeights weights;
  SimConfig sim;
  std::vector<GoalRegion> goals;
  std::optional<FormationSpec> formation;
  std::vector<AdversarySpec> adversaries;
  unsigned seed = 0;

  bool operator==(const Scenario&) const = default;

  int index_of(AgentId id) const;  // -1 when absent
  const GoalRegion* goal(const std::string& name) const;
  const AdversarySpec* adversary(AgentId id) const;
};

/// Every semantic problem found, with JSON-pointer paths; empty when valid.
std::vector<FieldError> validate(const Scenario& sc);
void validate_or_throw(const Scenario& sc);

}  // namespace rswarm

#pragma once

// Fixed-step closed-loop simulation: sensing, monitoring, detection, control, integration.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rswarm/controllers.hpp"
#include "rswarm/detection.hpp"
#include "rswarm/scenario.hpp"

namespace rswarm {

/// Monitor output for one agent at one step.
struct BehaviorRecord {
  AgentId id = 0;
  double S_R = 1.0;
  double Gamma = 0.0;
  double S_R_w = 1.0;
  double gamma_S = 0.0;
  double Gamma_w = 0.0;
  bool condition_a = false;
  bool has_goal = false;  // individual goal task in force
  double lambda = 0.0;    // lambda_i, or the uniform centroid metric for formation members
  double lambda_dot = 0.0;
  double G_R = 1.0;
  bool deviating = false;
  double T_s = 0.0;
  double T_s_obstacle = 0.0;
  std::vector<AgentId> neighbor_ids;
  std::vector<double> eta;
  std::vector<double> eta_obstacle;
  std::vector<AgentId> formation_ids;
  std::vector<double> F_R;
  double F_R_min = 1.0;
  double gamma_F = 0.0;
  double C = 1.0;
};

struct StepRecord {
  double t = 0.0;
  std::vector<AgentState> states;
  std::vector<VecX> controls;
  std::vector<BehaviorRecord> behavior;
  std::vector<std::string> mode;  // nominal, resilient, chase, mislead or hold
  std::optional<Vec2> centroid;           // uniform formation centroid
  std::optional<Vec2> weighted_centroid;  // confidence-weighted formation centroid
};

struct Event {
  std::string kind;
  double t = 0.0;
  std::vector<AgentId> agents;
  std::vector<std::pair<std::string, double>> values;
  std::string detail;
};

struct RunLog {
  std::string scenario;
  std::vector<AgentId> ids;
  std::vector<StepRecord> steps;
  std::vector<Event> events;
  std::vector<DetectionVerdict> verdicts;
  double max_kkt_residual = 0.0;
  long solves = 0;
  long failed_solves = 0;

  std::vector<const Event*> events_of(const std::string& kind) const;
  std::optional<DetectionVerdict> verdict_for(AgentId id) const;
};

struct RunOptions {
  std::optional<bool> resilient;
  std::optional<bool> detect;
};

/// Validates the scenario and simulates it from t = 0 to t_end.
RunLog run(const Scenario& sc, const RunOptions& opts = {});

/// Safety or obstacle violation events that involve an agent never scripted as an adversary.
std::vector<const Event*> intact_violations(const RunLog& log, const Scenario& sc);

/// True when agent `id` is inside the disc at some sampled time in [t_a, t_b].
bool check_goal_window(const RunLog& log, AgentId id, const Vec2& center, double radius, double t_a, double t_b);

/// Minimum over samples of |p_a - p_b| - d.
double min_pair_clearance(const RunLog& log, AgentId a, AgentId b, double d);

}  // namespace rswarm

#include "rswarm/suite.hpp"

#include <cmath>
#include <numbers>

namespace rswarm {

namespace {

AgentSpec unicycle(AgentId id, Vec2 p0, double phi0, double half_box) {
  AgentSpec a;
  a.id = id;
  a.p0 = p0;
  a.phi0 = phi0;
  a.model = DynamicsModel::linearized_unicycle(0.05);
  a.polytope = InputPolytope::box(half_box);
  return a;
}

}  // namespace

Scenario generate_case1(Case1Variant variant) {
  Scenario sc;
  sc.name = "case1";
  sc.safety = {0.1, 2.0};
  sc.metrics.n_c = 4;
  sc.metrics.theta_w = 0.3;
  sc.weights = {1.0, 1.0, 10.0, 20.0, 1.0, 1e3};
  sc.sim.dt = 0.05;
  sc.sim.t_end = 160.0;
  sc.sim.n = 3;
  sc.sim.max_horizon = 50.0;

  sc.goals = {{"G0", Vec2(0.0, 0.0), 0.75},
              {"G1", Vec2(-2.4, 0.0), 0.25},
              {"G2", Vec2(2.4, 0.0), 0.25},
              {"G3", Vec2(2.2, 1.6), 0.25}};
  sc.obstacles = {{Vec2(-1.1, -0.75), 0.4}, {Vec2(0.05, 1.65), 0.4}};

  AgentSpec a1 = unicycle(1, Vec2(-2.0, -1.5), 0.0, 0.5);
  a1.tasks = {{"G0", Vec2(-0.3, 0.0), 0.0, 80.0}, {"G1", Vec2(-2.4, 0.0), 80.0, 160.0}};
  AgentSpec a2 = unicycle(2, Vec2(2.0, -1.5), std::numbers::pi, 1.0);
  a2.tasks = {{"G0", Vec2(0.3, 0.0), 0.0, 80.0}, {"G2", Vec2(2.4, 0.0), 80.0, 160.0}};
  AgentSpec a3 = unicycle(3, Vec2(-2.2, 1.6), 0.0, 0.5);
  a3.tasks = {{"G3", Vec2(2.2, 1.6), 0.0, 160.0}};
  sc.agents = {a1, a2, a3};

  switch (variant) {
    case Case1Variant::Nominal:
      sc.name = "case1_nominal";
      break;
    case Case1Variant::ChaseNoDefense:
      sc.name = "case1_chase_nodefense";
      sc.sim.detect = false;
      break;
    case Case1Variant::ChaseDetectOnly:
      sc.name = "case1_chase";
      break;
    case Case1Variant::ChaseResilient:
      sc.name = "case1_chase_resilient";
      sc.sim.resilient = true;
      break;
  }
  if (variant != Case1Variant::Nominal) {
    AdversarySpec adv;
    adv.id = 1;
    adv.cls = AdversaryClass::Chase;
    adv.t_start = 80.0;
    adv.target = 2;
    sc.adversaries = {adv};
  }
  return sc;
}

Scenario generate_case2(Case2Variant variant) {
  Scenario sc;
  sc.name = "case2";
  sc.safety = {0.1, 50.0};
  sc.metrics.n_c = 4;
  sc.metrics.theta_w = 0.4;
  sc.weights = {1.0, 1.0, 10.0, 100.0, 4.0, 1e3};
  sc.sim.dt = 0.05;
  sc.sim.t_end = 100.0;
  sc.sim.n = 3;
  sc.sim.max_horizon = 50.0;

  FormationSpec f;
  f.goal = Vec2(-12.0, 0.7);
  f.goal_radius = 0.5;
  f.settle_time = 30.0;
  const Vec2 start(0.0, 0.0);
  for (int k = 0; k < 6; ++k) {
    const AgentId id = k + 1;
    const double ang = std::numbers::pi / 3.0 * k;
    const Vec2 off(std::cos(ang), std::sin(ang));
    f.members.push_back(id);
    f.offsets[id] = off;
    sc.agents.push_back(unicycle(id, start + off, ang, id == 3 || id == 6 ? 1.2 : 0.5));
  }
  sc.formation = f;

  switch (variant) {
    case Case2Variant::Nominal:
      sc.name = "case2_nominal";
      break;
    case Case2Variant::TwoAdversaries:
      sc.name = "case2_adversaries";
      break;
    case Case2Variant::TwoAdversariesResilient:
      sc.name = "case2_adversaries_resilient";
      sc.sim.resilient = true;
      break;
  }
  if (variant != Case2Variant::Nominal) {
    for (AgentId id : {3, 6}) {
      AdversarySpec adv;
      adv.id = id;
      adv.cls = AdversaryClass::Mislead;
      adv.t_start = 40.0;
      adv.bias = Vec2(4.0, 4.0);
      sc.adversaries.push_back(adv);
    }
  }
  return sc;
}

std::vector<BundledScenario> bundled_scenarios() {
  return {{"case1_nominal.json", generate_case1(Case1Variant::Nominal)},
          {"case1_chase_nodefense.json", generate_case1(Case1Variant::ChaseNoDefense)},
          {"case1_chase.json", generate_case1(Case1Variant::ChaseDetectOnly)},
          {"case1_chase_resilient.json", generate_case1(Case1Variant::ChaseResilient)},
          {"case2_nominal.json", generate_case2(Case2Variant::Nominal)},
          {"case2_adversaries.json", generate_case2(Case2Variant::TwoAdversaries)},
          {"case2_adversaries_resilient.json", generate_case2(Case2Variant::TwoAdversariesResilient)}};
}

}  // namespace rswarm

#pragma once

// Randomized property suites shared by the unit tests and the acceptance binary.

#include <random>

#include "rswarm/criticality.hpp"
#include "rswarm/engine.hpp"
#include "rswarm/optimizer.hpp"

namespace suites {

using namespace rswarm;

struct SuiteResult {
  int cases = 0;
  int failures = 0;
  long checked = 0;
};

/// Held best-case / worst-case inputs never bring a pair inside d before T_s^j.
inline SuiteResult critical_time_soundness(unsigned seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-4.0, 4.0);
  std::uniform_real_distribution<double> width(0.2, 1.5);
  std::uniform_real_distribution<double> dist(0.05, 0.5);
  const auto model = DynamicsModel::single_integrator();
  SuiteResult res;
  while (res.cases < count) {
    const double d = dist(rng);
    const Vec2 p_i(coord(rng), coord(rng));
    const Vec2 p_j(coord(rng), coord(rng));
    const double r = (p_i - p_j).norm();
    // The Lipschitz bound on g needs |g| <= b_g |p_j|, i.e. |p_j| >= 1 / b_g.
    if (r <= d + 1e-6 || p_j.norm() < 1.0 / model.b_g) continue;
    ++res.cases;

    PointwiseContext ci{AgentState{0, p_i, 0.0, 0.0}, model, InputPolytope::box(width(rng)),
                        {pair_barrier<double>(p_i, p_j, d)}};
    PointwiseContext cj{AgentState{1, p_j, 0.0, 0.0}, model, InputPolytope::box(width(rng)),
                        {pair_barrier<double>(p_j, p_i, d)}};
    const VecX u_min = best_case_control(ci);
    const VecX u_max = worst_case_control(cj);
    const double T = critical_time_pair(r, d, model.b_f, model.b_g, u_min, u_max, p_j);

    // Closest approach of the straight-line relative motion over [0, T].
    const Vec2 rel0 = p_i - p_j;
    const Vec2 vel = u_min - u_max;
    double t_star = vel.squaredNorm() > 0 ? -rel0.dot(vel) / vel.squaredNorm() : 0.0;
    t_star = std::clamp(t_star, 0.0, std::min(T, 1e6));
    const double closest = (rel0 + t_star * vel).norm();
    if (closest < d - 1e-12) ++res.failures;
  }
  return res;
}

/// Random small scenarios; whenever (1 - S_R) <= gamma_S every clearance of that agent is positive.
inline SuiteResult envelope_clearance_runs(unsigned seed, int count, double* max_kkt = nullptr) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SuiteResult res;
  while (res.cases < count) {
    Scenario sc;
    sc.name = "envelope_clearance";
    sc.safety = {0.15, 1.5};
    sc.sim.dt = 0.05;
    sc.sim.t_end = 4.0;
    sc.sim.detect = false;
    sc.weights.q = 10.0;
    sc.goals = {{"G", Vec2::Zero(), 0.25}};
    sc.obstacles = {{Vec2(coord(rng), coord(rng)) * 0.5, 0.2 + 0.3 * unit(rng)}};
    const int agents = 3 + static_cast<int>(unit(rng) * 2.0);
    for (int k = 0; k < agents; ++k) {
      AgentSpec a;
      a.id = k + 1;
      a.p0 = Vec2(coord(rng), coord(rng));
      a.phi0 = 6.0 * unit(rng);
      a.model = unit(rng) < 0.5 ? DynamicsModel::single_integrator() : DynamicsModel::linearized_unicycle(0.05);
      a.polytope = InputPolytope::box(0.3 + 0.7 * unit(rng));
      a.tasks = {{"G", Vec2(coord(rng), coord(rng)), 0.0, sc.sim.t_end}};
      sc.agents.push_back(a);
    }
    if (unit(rng) < 0.5) {
      AdversarySpec adv;
      adv.id = 1;
      adv.target = 2;
      sc.adversaries.push_back(adv);
    }
    if (!validate(sc).empty()) continue;
    ++res.cases;
    const RunLog log = run(sc);
    if (max_kkt) *max_kkt = std::max(*max_kkt, log.max_kkt_residual);
    for (const auto& step : log.steps) {
      for (std::size_t i = 0; i < step.behavior.size(); ++i) {
        const auto& b = step.behavior[i];
        if (!safety_threshold_check(b.S_R, b.gamma_S)) continue;
        ++res.checked;
        bool ok = true;
        for (std::size_t j = 0; j < step.states.size(); ++j) {
          if (j != i && (step.states[i].p - step.states[j].p).norm() - sc.safety.d <= 0) ok = false;
        }
        for (const auto& o : sc.obstacles) {
          if ((step.states[i].p - o.center).norm() - o.radius <= 0) ok = false;
        }
        if (!ok) ++res.failures;
      }
    }
  }
  return res;
}

}  // namespace suites

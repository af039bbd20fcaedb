#include "acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "oracles.hpp"
#include "rswarm/engine.hpp"
#include "rswarm/io.hpp"
#include "rswarm/suite.hpp"
#include "suites.hpp"

namespace acceptance {

using namespace rswarm;

namespace {

struct TimedRun {
  Scenario scenario;
  RunLog log;
  double seconds = 0.0;
  bool deterministic = false;
};

TimedRun timed(const Scenario& sc, const RunOptions& opts = {}) {
  TimedRun r;
  r.scenario = sc;
  const auto t0 = std::chrono::steady_clock::now();
  r.log = run(sc, opts);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.deterministic = trajectories_csv(run(sc, opts)) == trajectories_csv(r.log);
  return r;
}

std::string f9(double x) { return fmt9(x); }

double first_time(const RunLog& log, const std::string& kind) {
  const auto ev = log.events_of(kind);
  return ev.empty() ? INFINITY : ev.front()->t;
}

// Every task of the agent has an arrival event inside its window.
bool all_tasks_arrived(const RunLog& log, const AgentSpec& agent) {
  for (std::size_t k = 0; k < agent.tasks.size(); ++k) {
    bool hit = false;
    for (const Event* e : log.events_of("goal_arrival")) {
      const auto& task = agent.tasks[k];
      if (e->agents.front() == agent.id && e->values.front().second == static_cast<double>(k) &&
          e->t >= task.t_start && e->t <= task.t_end) {
        hit = true;
      }
    }
    if (!hit) return false;
  }
  return true;
}

CriterionResult criterion1(const TimedRun& r) {
  const auto& log = r.log;
  bool arrivals = true;
  for (const auto& a : r.scenario.agents) arrivals = arrivals && all_tasks_arrived(log, a);
  double min_S = 1.0;
  for (const auto& s : log.steps) {
    for (const auto& b : s.behavior) min_S = std::min(min_S, b.S_R);
  }
  const auto violations = log.events_of("safety_violation").size() + log.events_of("obstacle_violation").size();
  const bool pass = violations == 0 && arrivals && min_S > std::exp(-1.0) && r.seconds < 10.0;
  return {1, pass,
          "violations=" + std::to_string(violations) + " arrivals=" + (arrivals ? "all" : "missing") +
              " min S_R=" + f9(min_S) + " runtime=" + f9(r.seconds) + "s"};
}

CriterionResult criterion2(const TimedRun& r) {
  const auto& log = r.log;
  const auto v = log.verdict_for(1);
  const double t_a = first_time(log, "safety_violation");
  if (!v || v->kind != AdversaryKind::SafetyAdversary) {
    return {2, false, "no safety verdict on agent 1; first violation t_a=" + f9(t_a)};
  }
  // (n-1) T_s of the monitor at the verdict step.
  double window = 0.0;
  for (const auto& s : log.steps) {
    if (std::abs(s.t - v->t_detect) > 1e-9) continue;
    for (const auto& b : s.behavior) {
      if (b.id == v->monitor) window = (r.scenario.sim.n - 1) * b.T_s;
    }
  }
  const double margin = t_a - v->t_detect;
  const bool pass = std::isfinite(t_a) && v->t_detect < t_a && margin + r.scenario.sim.dt >= window;
  return {2, pass,
          "t_d=" + f9(v->t_detect) + " t_a=" + f9(t_a) + " margin=" + f9(margin) + " (n-1)T_s=" + f9(window) +
              " monitor=" + std::to_string(v->monitor)};
}

CriterionResult criterion3(const TimedRun& r) {
  const auto& log = r.log;
  const auto intact = intact_violations(log, r.scenario);
  const double clearance = min_pair_clearance(log, 1, 2, r.scenario.safety.d);
  bool arrivals = true;
  for (const auto& a : r.scenario.agents) {
    if (a.id != 1) arrivals = arrivals && all_tasks_arrived(log, a);
  }
  const int exit_code = intact.empty() ? 0 : 3;
  const bool pass = intact.empty() && clearance > 0 && arrivals && exit_code == 0;
  return {3, pass,
          "intact violations=" + std::to_string(intact.size()) + " min(|p2-p1|-d)=" + f9(clearance) +
              " arrivals(2,3)=" + (arrivals ? "yes" : "no") + " exit=" + std::to_string(exit_code)};
}

double confidence_at_end(const RunLog& log, AgentId id) {
  for (const auto& b : log.steps.back().behavior) {
    if (b.id == id) return b.C;
  }
  return 1.0;
}

CriterionResult criterion4(const TimedRun& adv, const TimedRun& res) {
  const auto& f = *adv.scenario.formation;
  Vec2 c0 = Vec2::Zero();
  for (const auto& a : adv.scenario.agents) c0 += a.p0;
  c0 /= static_cast<double>(adv.scenario.agents.size());
  const double bound = f.goal_radius * f.goal_radius / (c0 - f.goal).squaredNorm();
  const double lambda_end = adv.log.steps.back().behavior.front().lambda;
  const Vec2 wc = res.log.steps.back().weighted_centroid.value_or(Vec2::Constant(INFINITY));
  const double wc_dist = (wc - f.goal).norm();

  std::set<AgentId> verdicts;
  for (const auto& v : adv.log.verdicts) verdicts.insert(v.suspect);
  std::set<AgentId> verdicts_res;
  for (const auto& v : res.log.verdicts) verdicts_res.insert(v.suspect);
  const std::set<AgentId> expected{3, 6};
  const double C3 = confidence_at_end(adv.log, 3), C6 = confidence_at_end(adv.log, 6);
  const double e1 = std::exp(-1.0);
  const bool pass = lambda_end > bound && wc_dist < f.goal_radius && verdicts == expected && verdicts_res == expected &&
                    C3 < e1 && C6 < e1;
  std::string vs;
  for (AgentId id : verdicts) vs += (vs.empty() ? "" : ",") + std::to_string(id);
  return {4, pass,
          "lambda_f(T)=" + f9(lambda_end) + " > " + f9(bound) + "; weighted centroid dist=" + f9(wc_dist) +
              " < " + f9(f.goal_radius) + "; verdicts={" + vs + "}; C3=" + f9(C3) + " C6=" + f9(C6)};
}

CriterionResult criterion5() {
  const auto r = suites::critical_time_soundness(20240501u, 200);
  return {5, r.cases == 200 && r.failures == 0,
          std::to_string(r.cases) + " cases, " + std::to_string(r.failures) + " failures"};
}

CriterionResult criterion6(double& max_kkt) {
  const auto r = suites::envelope_clearance_runs(777u, 50, &max_kkt);
  return {6, r.cases == 50 && r.failures == 0,
          std::to_string(r.cases) + " runs, " + std::to_string(r.checked) + " certified steps, " +
              std::to_string(r.failures) + " counterexamples"};
}

CriterionResult criterion7(double run_kkt) {
  std::mt19937_64 rng(4242);
  int lp_ok = 0;
  double lp_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 3;
    const int q = std::min(8, 2 * m + trial % 4);
    const auto lp = oracle::random_lp(rng, m, q);
    const Solution s = solve_lp({lp.c, lp.A, lp.b});
    const auto ref = oracle::lp_vertex_min(lp.c, lp.A, lp.b);
    if (s.optimal() && ref) {
      const double err = std::abs(s.objective - *ref);
      lp_err = std::max(lp_err, err);
      if (err <= 1e-9) ++lp_ok;
    }
  }
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> wt(0.5, 3.0);
  int qp_ok = 0;
  double qp_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 4;
    const int k = 1 + trial % 8;
    QpProblem qp;
    qp.H = VecX::NullaryExpr(n, [&] { return wt(rng); });
    qp.F = VecX::NullaryExpr(n, [&] { return 3.0 * unit(rng); });
    const VecX z0 = VecX::NullaryExpr(n, [&] { return unit(rng); });
    for (int r = 0; r < k; ++r) {
      const VecX a = VecX::NullaryExpr(n, [&] { return unit(rng); });
      qp.rows.push_back({a, a.dot(z0) + 0.1 + 0.5 * std::abs(unit(rng)), {}});
    }
    const Solution s = solve_qp(qp);
    if (!s.optimal()) continue;
    const VecX ref = oracle::qp_dual_projected_gradient(qp.H, qp.F, qp.G(), qp.g(), 100000);
    const double err = (s.z - ref).cwiseAbs().maxCoeff();
    qp_err = std::max(qp_err, err);
    if (err <= 1e-4 && s.kkt_residual < 1e-6) ++qp_ok;
  }
  const bool pass = lp_ok == 100 && qp_ok == 50 && run_kkt < 1e-6;
  return {7, pass,
          "LP " + std::to_string(lp_ok) + "/100 (max err " + f9(lp_err) + "), QP " + std::to_string(qp_ok) +
              "/50 (max err " + f9(qp_err) + "), max KKT residual over runs " + f9(run_kkt)};
}

CriterionResult criterion8() {
  std::mt19937_64 rng(8080);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_real_distribution<double> wt(0.05, 1.0);
  int points = 0, bad = 0;
  while (points < 200) {
    const Vec2 p(coord(rng), coord(rng));
    const Vec2 q(coord(rng), coord(rng));
    const Vec2 goal(coord(rng), coord(rng));
    if ((p - q).norm() < 0.05 || (p - goal).norm() < 0.05) continue;
    ++points;
    auto check = [&](const Vec2& analytic, const Vec2& numeric) {
      if (!oracle::close_rel(analytic, numeric, 1e-5)) ++bad;
    };
    const auto pb = pair_barrier<double>(p, q, 0.3);
    check(pb.grad_i, oracle::central_difference([&](const Vec2& x) { return pair_barrier<double>(x, q, 0.3).value; }, p));
    check(pb.grad_j, oracle::central_difference([&](const Vec2& x) { return pair_barrier<double>(p, x, 0.3).value; }, q));
    const Obstacle obs{q, 0.4};
    check(obstacle_barrier<double>(p, obs).grad_i,
          oracle::central_difference([&](const Vec2& x) { return obstacle_barrier<double>(x, obs).value; }, p));
    check(goal_clf<double>(p, goal).grad,
          oracle::central_difference([&](const Vec2& x) { return goal_clf<double>(x, goal).value; }, p));
    std::vector<Vec2> pos{p, q, goal + Vec2(0.5, -0.2)};
    std::vector<double> w{wt(rng), wt(rng), wt(rng)};
    const auto cc = centroid_clf<double>(pos, w, goal);
    for (std::size_t k = 0; k < pos.size(); ++k) {
      check(cc.grads[k], oracle::central_difference(
                             [&](const Vec2& x) {
                               auto moved = pos;
                               moved[k] = x;
                               return centroid_clf<double>(moved, w, goal).value;
                             },
                             pos[k]));
    }
    check(formation_function<double>(p, goal).grad,
          oracle::central_difference([&](const Vec2& x) { return formation_function<double>(x, goal).value; }, p));
  }
  return {8, bad == 0, std::to_string(points) + " points, " + std::to_string(bad) + " mismatches"};
}

}  // namespace

std::vector<CriterionResult> evaluate() {
  std::map<std::string, TimedRun> runs;
  for (const auto& b : bundled_scenarios()) runs[b.scenario.name] = timed(b.scenario);

  std::vector<CriterionResult> out;
  out.push_back(criterion1(runs.at("case1_nominal")));
  out.push_back(criterion2(runs.at("case1_chase")));
  out.push_back(criterion3(runs.at("case1_chase_resilient")));
  out.push_back(criterion4(runs.at("case2_adversaries"), runs.at("case2_adversaries_resilient")));
  out.push_back(criterion5());
  double kkt = 0.0;
  out.push_back(criterion6(kkt));
  for (const auto& [name, r] : runs) kkt = std::max(kkt, r.log.max_kkt_residual);
  auto c7 = criterion7(kkt);
  out.push_back(c7);
  out.push_back(criterion8());

  bool same = true;
  std::string which;
  for (const auto& [name, r] : runs) {
    if (!r.deterministic) {
      same = false;
      which += " " + name;
    }
  }
  out.push_back({9, same, std::to_string(runs.size()) + " scenarios run twice" + (same ? ", identical" : ", differ:" + which)});

  const auto& n1 = runs.at("case1_nominal").log;
  const auto& n2 = runs.at("case2_nominal").log;
  out.push_back({10, n1.verdicts.empty() && n2.verdicts.empty(),
                 "verdicts: case1_nominal=" + std::to_string(n1.verdicts.size()) +
                     " case2_nominal=" + std::to_string(n2.verdicts.size())});
  return out;
}

bool run_all(std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  bool all = true;
  for (const auto& c : evaluate()) {
    out << (c.pass ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.summary << "\n";
    all = all && c.pass;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << "total wall clock " << fmt9(secs) << " s\n";
  return all;
}

}  // namespace acceptance

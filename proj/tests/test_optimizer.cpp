#include <doctest.h>

#include <cstring>
#include <random>

#include "oracles.hpp"
#include "rswarm/optimizer.hpp"

using namespace rswarm;

namespace {

QpProblem one_dim(double lo) {
  QpProblem qp;
  qp.H = VecX::Ones(1);
  qp.F = VecX::Zero(1);
  qp.rows.push_back({VecX::Constant(1, -1.0), -lo, "u>=lo"});
  return qp;
}

}  // namespace

TEST_CASE("LP examples with min-norm tie-break") {
  const auto box = InputPolytope::box(1.0);
  Solution s = solve_lp({Vec2(1, 0), box.A, box.b});
  REQUIRE(s.optimal());
  CHECK(s.z(0) == doctest::Approx(-1.0));
  CHECK(std::abs(s.z(1)) <= 1e-9);
  CHECK(s.objective == doctest::Approx(-1.0));

  s = solve_lp({Vec2(1, 1), box.A, box.b});
  CHECK((s.z - Vec2(-1, -1)).norm() <= 1e-9);

  s = solve_lp({Vec2(0, 0), box.A, box.b});
  CHECK(s.z.norm() <= 1e-9);
}

TEST_CASE("LP reports infeasible and unbounded problems") {
  MatX A(2, 1);
  A << 1, -1;
  CHECK(solve_lp({VecX::Ones(1), A, Eigen::Vector2d(-1, -1)}).status == SolveStatus::Infeasible);
  MatX half(1, 1);
  half << 1;
  CHECK(solve_lp({VecX::Ones(1), half, VecX::Ones(1)}).status == SolveStatus::Unbounded);
}

TEST_CASE("QP examples") {
  Solution s = solve_qp(one_dim(1.0));
  REQUIRE(s.optimal());
  CHECK(s.z(0) == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(1.0));
  CHECK(s.active_set == std::vector<int>{0});

  QpProblem two;
  two.H = VecX::Ones(2);
  two.F = VecX::Zero(2);
  two.rows.push_back({Vec2(-1, -1), -2.0, "u+d>=2"});
  s = solve_qp(two);
  CHECK(s.z.isApprox(Vec2(1, 1)));

  QpProblem free;
  free.H = VecX::Ones(2);
  free.F = Vec2(-2, 0);
  s = solve_qp(free);
  CHECK(s.z.isApprox(Vec2(1, 0)));
}

TEST_CASE("QP infeasibility carries a certificate") {
  QpProblem qp = one_dim(1.0);
  qp.rows.push_back({VecX::Ones(1), 0.0, "u<=0"});
  const Solution s = solve_qp(qp);
  CHECK(s.status == SolveStatus::Infeasible);
  CHECK_FALSE(s.certificate.empty());
}

TEST_CASE("QP rejects an indefinite weight") {
  QpProblem qp = one_dim(1.0);
  qp.H(0) = 0.0;
  CHECK_THROWS_AS(solve_qp(qp), ContractViolation);
}

TEST_CASE("LP optimum equals vertex enumeration") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 3;
    const int q = std::min(8, 2 * m + trial % 3);
    const auto lp = oracle::random_lp(rng, m, q);
    const Solution s = solve_lp({lp.c, lp.A, lp.b});
    REQUIRE(s.optimal());
    const auto ref = oracle::lp_vertex_min(lp.c, lp.A, lp.b);
    REQUIRE(ref.has_value());
    CHECK(std::abs(s.objective - *ref) <= 1e-9);
    const KktReport kkt = check_kkt(LpProblem{lp.c, lp.A, lp.b}, s);
    CHECK(kkt.primal <= 1e-7);
    CHECK(kkt.dual >= -1e-7);
    CHECK(kkt.complementarity <= 1e-6);
  }
}

TEST_CASE("QP minimizer equals the dual projected-gradient oracle") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> wt(0.5, 3.0);
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
    REQUIRE(s.optimal());
    const VecX ref = oracle::qp_dual_projected_gradient(qp.H, qp.F, qp.G(), qp.g(), 100000);
    CHECK((s.z - ref).cwiseAbs().maxCoeff() <= 1e-4);
    CHECK(s.kkt_residual < 1e-6);
  }
}

TEST_CASE("solvers are bit-deterministic") {
  std::mt19937_64 rng(3);
  const auto lp = oracle::random_lp(rng, 3, 8);
  const Solution a = solve_lp({lp.c, lp.A, lp.b});
  const Solution b = solve_lp({lp.c, lp.A, lp.b});
  REQUIRE(a.z.size() == b.z.size());
  CHECK(std::memcmp(a.z.data(), b.z.data(), sizeof(double) * a.z.size()) == 0);
  CHECK(a.objective == b.objective);
}

TEST_CASE("best and worst case controls") {
  PointwiseContext ctx;
  ctx.model = DynamicsModel::single_integrator();
  ctx.polytope = InputPolytope::box(1.0);
  ctx.state.p = Vec2(0, 0);
  ctx.terms.push_back(pair_barrier<double>(ctx.state.p, Vec2(1, 0), 0.1));

  const VecX best = best_case_control(ctx);
  CHECK(best(0) == doctest::Approx(-1.0));
  CHECK(std::abs(best(1)) <= 1e-9);

  // Worst case restricted to a target due north chases northwards.
  ctx.terms = {pair_barrier<double>(ctx.state.p, Vec2(0, 2), 0.1)};
  const VecX worst = worst_case_control(ctx);
  CHECK(std::abs(worst(0)) <= 1e-9);
  CHECK(worst(1) == doctest::Approx(1.0));

  ctx.terms.clear();
  CHECK(best_case_control(ctx).norm() <= 1e-12);
  CHECK(worst_case_control(ctx).norm() <= 1e-12);

  // Negation duality.
  ctx.terms = {pair_barrier<double>(ctx.state.p, Vec2(0.4, -0.9), 0.1)};
  const VecX lg = composite_input_gradient(ctx);
  CHECK((worst_case_control(ctx) - extremal_control(ctx.polytope, -lg)).norm() <= 1e-12);
}

TEST_CASE("best case control matches a grid oracle") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    PointwiseContext ctx;
    ctx.model = DynamicsModel::single_integrator();
    ctx.polytope = InputPolytope::box(0.8);
    ctx.state.p = Vec2(coord(rng), coord(rng));
    for (int j = 0; j < 3; ++j) {
      ctx.terms.push_back(pair_barrier<double>(ctx.state.p, Vec2(coord(rng), coord(rng)), 0.1));
    }
    ctx.terms.push_back(obstacle_barrier<double>(ctx.state.p, Obstacle{Vec2(coord(rng), coord(rng)), 0.4}));
    const VecX lg = composite_input_gradient(ctx);
    const VecX u = best_case_control(ctx);
    CHECK(ctx.polytope.contains(u));
    CHECK(std::abs(lg.dot(u) - oracle::grid_min_2d(lg, -0.8, 0.8)) <= 1e-3);
  }
}

TEST_CASE("polytope checks and projection") {
  CHECK(check_polytope(InputPolytope::box(1.0)).empty());
  InputPolytope open;
  open.A = MatX(1, 2);
  open.A << 1, 0;
  open.b = VecX::Ones(1);
  CHECK_FALSE(check_polytope(open).empty());
  InputPolytope empty = InputPolytope::box(1.0);
  empty.b(0) = -2.0;
  CHECK(check_polytope(empty) == std::vector<std::string>{"polytope is empty"});

  const VecX p = project_onto_polytope(InputPolytope::box(0.5), Vec2(2.0, 0.1));
  CHECK(p.isApprox(Vec2(0.5, 0.1)));
}

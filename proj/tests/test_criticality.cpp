#include <doctest.h>

#include <cmath>
#include <random>

#include "rswarm/criticality.hpp"
#include "suites.hpp"

using namespace rswarm;

TEST_CASE("critical time for a neighbor") {
  const Vec2 u_min(1.0, 0.0);
  CHECK(critical_time_pair(1.0, 1.0, 0.0, 1.0, u_min, u_min, Vec2(0, 0)) == 0.0);
  CHECK(critical_time_pair(2.0, 1.0, 0.0, 1.0, u_min, Vec2(-1.0, 0.0), Vec2(0, 0)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(critical_time_pair(0.5, 1.0, 0.0, 1.0, u_min, u_min, Vec2(0, 0)), UnsafeStateError);
  CHECK_THROWS_AS(critical_time_pair(2.0, 1.0, 0.0, 1.0, Vec2(0, 0), u_min, Vec2(0, 0)), ContractViolation);
}

TEST_CASE("critical time is monotone in the gap and in the input spread") {
  const Vec2 u_min(0.7, 0.1), p_j(1.5, -2.0);
  double prev = -1.0;
  for (double r = 0.2; r < 10.0; r += 0.05) {
    const double t = critical_time_pair(r, 0.2, 0.0, 1.0, u_min, Vec2(-0.3, 0.4), p_j);
    CHECK(t >= prev);
    prev = t;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double spread = 0.0; spread < 5.0; spread += 0.1) {
    const double t = critical_time_pair(3.0, 0.2, 0.0, 1.0, u_min, Vec2(u_min + Vec2(spread, 0.0)), p_j);
    CHECK(t <= prev);
    prev = t;
  }
}

TEST_CASE("critical time for an obstacle") {
  const Vec2 u(1.0, 0.0);
  CHECK(critical_time_obstacle(1.0, 1.0, 0.0, 1.0, u) == 0.0);
  CHECK(critical_time_obstacle(3.0, 1.0, 0.0, 1.0, u) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(critical_time_obstacle(1e300, 1.0, 0.0, 1.0, u) == kCriticalTimeCap);
  CHECK_THROWS_AS(critical_time_obstacle(0.5, 1.0, 0.0, 1.0, u), UnsafeStateError);
}

TEST_CASE("critical zones") {
  const auto si = DynamicsModel::single_integrator();
  AgentState a, b;
  a.p = Vec2(0, 0);
  b.p = Vec2(3, 1);
  CHECK(critical_zone_pair(a, si, Vec2(0.2, 0.3), b, si, Vec2(0.2, 0.3), 4.0, 0.05) == 0.0);
  CHECK(critical_zone_pair(a, si, Vec2(-1, 0), b, si, Vec2(1, 0), 2.0, 0.05) == doctest::Approx(4.0));
  const double one = critical_zone_pair(a, si, Vec2(-1, 0.5), b, si, Vec2(1, 0), 1.0, 0.05);
  CHECK(critical_zone_pair(a, si, Vec2(-1, 0.5), b, si, Vec2(1, 0), 3.0, 0.05) == doctest::Approx(3.0 * one));
  CHECK(critical_zone_pair(a, si, Vec2(-1, 0), b, si, Vec2(1, 0), 500.0, 0.05) == doctest::Approx(100.0));

  CHECK(critical_zone_obstacle(a, si, Vec2(0, 0), 5.0, 0.05) == 0.0);
  CHECK(critical_zone_obstacle(a, si, Vec2(1, 0), 3.0, 0.05) == doctest::Approx(3.0));
  CHECK(critical_zone_obstacle(a, si, Vec2(-0.3, 0.2), 0.0, 0.05) == 0.0);
}

TEST_CASE("closed-form displacement agrees with RK4 quadrature") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  const auto uni = DynamicsModel::linearized_unicycle(0.3);
  for (int k = 0; k < 20; ++k) {
    AgentState s;
    s.p = Vec2(val(rng), val(rng));
    s.phi = 3.0 * val(rng);
    const Vec2 u(val(rng), val(rng));
    const double h = 2.0 + val(rng);
    const Vec2 fast = detail::displacement(s, uni, u, h, 0.05);
    const Vec2 slow = detail::displacement_rk4(s, uni, u, h, 0.05);
    CHECK((fast - slow).norm() <= 1e-12);
  }
}

TEST_CASE("held extremal inputs respect the critical time") {
  const auto res = suites::critical_time_soundness(42, 200);
  CHECK(res.cases == 200);
  CHECK(res.failures == 0);
}

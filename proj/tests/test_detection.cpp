#include <doctest.h>

#include <cmath>
#include <random>

#include "rswarm/detection.hpp"

using namespace rswarm;

namespace {

MonitorSample sample(double t, bool a, double T_s, std::vector<Candidate> cands) {
  MonitorSample s;
  s.t = t;
  s.condition_a = a;
  s.T_s = T_s;
  s.candidates = std::move(cands);
  return s;
}

std::vector<MonitorSample> random_stream(std::mt19937_64& rng, int len) {
  std::bernoulli_distribution mostly(0.93);
  std::uniform_real_distribution<double> ts(0.05, 0.4);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::vector<MonitorSample> out;
  for (int k = 0; k < len; ++k) {
    std::vector<Candidate> cands;
    for (AgentId id : {1, 2, 3}) cands.push_back({id, mostly(rng), score(rng)});
    out.push_back(sample(0.05 * k, mostly(rng), ts(rng), cands));
  }
  return out;
}

}  // namespace

TEST_CASE("formation agreement confidence and flags") {
  SUBCASE("perfect formation") {
    const auto r = run_algorithm2({{1.0, 1.0, 1.0}, {1.0, 1.0}}, 0.1, 2);
    CHECK(r.confidence == std::vector<double>{1.0, 1.0});
    CHECK(r.flagged == std::vector<bool>{false, false});
  }
  SUBCASE("half the neighbors deviating gives exp(-1) without a flag") {
    const auto r = run_algorithm2({{0.2, 0.3, 1.0, 0.95}}, 0.1, 2);
    CHECK(r.deviating[0] == 2);
    CHECK(r.confidence[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK_FALSE(r.flagged[0]);
  }
  SUBCASE("a majority deviating flags") {
    const auto r = run_algorithm2({{0.2, 0.3, 0.1, 0.95, 1.0}}, 0.1, 2);
    CHECK(r.deviating[0] == 3);
    CHECK(r.flagged[0]);
    CHECK(r.confidence[0] < std::exp(-1.0));
  }
  SUBCASE("no neighbors skips the agent") {
    const auto r = run_algorithm2({{}}, 0.1, 2);
    CHECK(r.confidence[0] == 1.0);
    CHECK_FALSE(r.flagged[0]);
  }
  SUBCASE("boundary value is not a deviation") {
    const auto r = run_algorithm2({{0.9}}, 0.1, 2);
    CHECK(r.deviating[0] == 0);
  }
}

TEST_CASE("safety detection requires both conditions over the whole window") {
  const double T_s = 0.1;  // n = 3 -> window 0.2 s
  std::vector<MonitorSample> w;
  for (int k = 0; k <= 4; ++k) w.push_back(sample(0.05 * k, true, T_s, {{2, true, 0.5}, {3, false, 0.9}}));

  const auto v = run_algorithm1(w, 3, 1);
  REQUIRE(v);
  CHECK(v->suspect == 2);
  CHECK(v->t_detect == doctest::Approx(0.2));
  CHECK(v->window == doctest::Approx(0.2));
  CHECK(v->monitor == 1);

  auto no_a = w;
  no_a[2].condition_a = false;
  CHECK_FALSE(run_algorithm1(no_a, 3, 1));

  auto recovering = w;
  for (auto& s : recovering) s.candidates[0].deviating = false;
  CHECK_FALSE(run_algorithm1(recovering, 3, 1));

  auto short_window = w;
  short_window.resize(3);
  CHECK_FALSE(run_algorithm1(short_window, 3, 1));
}

TEST_CASE("suspect is the highest score, ties to the lower id") {
  CHECK(pick_suspect({{4, true, 0.5}, {2, true, 0.5}, {7, true, 0.1}})->id == 2);
  CHECK(pick_suspect({{4, true, 0.9}, {2, true, 0.5}})->id == 4);
  CHECK_FALSE(pick_suspect({}));
}

TEST_CASE("online detector matches the batch algorithm over sliding windows") {
  std::mt19937_64 rng(4242);
  int verdicts = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto stream = random_stream(rng, 40);
    SafetyDetector online(3);
    std::optional<double> t_online;
    for (const auto& s : stream) {
      if (auto v = online.update(1, s)) {
        t_online = v->t_detect;
        break;
      }
    }
    std::optional<double> t_batch;
    for (std::size_t s = 0; s < stream.size(); ++s) {
      const std::vector<MonitorSample> tail(stream.begin() + static_cast<long>(s), stream.end());
      if (auto v = run_algorithm1(tail, 3, 1)) {
        if (!t_batch || v->t_detect < *t_batch) t_batch = v->t_detect;
      }
    }
    REQUIRE(t_online.has_value() == t_batch.has_value());
    if (t_online) {
      ++verdicts;
      CHECK(*t_online == doctest::Approx(*t_batch));
    }
  }
  CHECK(verdicts > 10);
}

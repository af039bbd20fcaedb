#pragma once

// Behavior monitors: safety, goal-reaching and formation-task metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "rswarm/barriers.hpp"
#include "rswarm/core.hpp"

namespace rswarm {

struct EnvelopeParams {
  double k1 = 1.0;
  double k2 = 0.1;
  double theta0 = 1.0;  // formation error at t = 0 [m]
  bool operator==(const EnvelopeParams&) const = default;
};

struct MetricConfig {
  int n_c = 4;
  double theta_w = 0.3;                  // scalar formation error bound [m]
  std::optional<EnvelopeParams> envelope;  // time-decaying bound when set
  double tol_dev = 1e-6;
  double tol_goal = 1e-4;

  void validate() const;
  bool operator==(const MetricConfig&) const = default;
};

namespace detail {

/// exp(-x^n_c), kept strictly positive.
template <typename Scalar>
Scalar bounded_exp(Scalar x, int n_c) {
  return std::max(std::exp(-std::pow(x, n_c)), std::numeric_limits<Scalar>::min());
}

}  // namespace detail

template <typename Scalar>
struct SafetyMetricT {
  Scalar S;
  Scalar Gamma;  // max of d / r_ij and r_o / v_io; 0 with nothing sensed
};
using SafetyMetric = SafetyMetricT<double>;

template <typename Scalar>
SafetyMetricT<Scalar> safety_metric(const Vec2T<Scalar>& p_i, std::span<const Vec2T<Scalar>> neighbors,
                                    std::span<const Obstacle> obstacles, Scalar d, int n_c) {
  Scalar gamma(0);
  for (const auto& q : neighbors) {
    const Scalar r = (p_i - q).norm();
    if (!(r > Scalar(kSingularDistance))) throw SingularityError("safety_metric: coincident agents", -1, -1);
    gamma = std::max(gamma, d / r);
  }
  for (const auto& o : obstacles) {
    const Scalar v = (p_i - o.center.template cast<Scalar>()).norm();
    if (!(v > Scalar(kSingularDistance))) throw SingularityError("safety_metric: agent at obstacle center", -1, -1);
    gamma = std::max(gamma, Scalar(o.radius) / v);
  }
  return {detail::bounded_exp(gamma, n_c), gamma};
}

template <typename Scalar>
struct WorstCaseSafetyT {
  Scalar S_w;
  Scalar gamma;    // |S_w - 1|
  Scalar Gamma_w;  // clamped to [0, 1]
};
using WorstCaseSafety = WorstCaseSafetyT<double>;

/// Worst-case metric from critical zones; eta_pair[k] belongs to neighbors[k].
template <typename Scalar>
WorstCaseSafetyT<Scalar> worst_case_safety_metric(const Vec2T<Scalar>& p_i,
                                                  std::span<const Vec2T<Scalar>> neighbors,
                                                  std::span<const Obstacle> obstacles,
                                                  std::span<const Scalar> eta_pair,
                                                  std::span<const Scalar> eta_obstacle, int n_c) {
  require(eta_pair.size() == neighbors.size() && eta_obstacle.size() == obstacles.size(),
          "worst_case_safety_metric: zone count mismatch");
  Scalar worst(0);
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    const Scalar r = (p_i - neighbors[k]).norm();
    if (!(r > Scalar(kSingularDistance))) throw SingularityError("worst_case_safety_metric: coincident agents", -1, -1);
    worst = std::max(worst, eta_pair[k] / r);
  }
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const Scalar v = (p_i - obstacles[k].center.template cast<Scalar>()).norm();
    if (!(v > Scalar(kSingularDistance))) throw SingularityError("worst_case_safety_metric: agent at obstacle center", -1, -1);
    worst = std::max(worst, eta_obstacle[k] / v);
  }
  const Scalar gamma_w = std::clamp(Scalar(1) - worst, Scalar(0), Scalar(1));
  const Scalar s_w = detail::bounded_exp(gamma_w, n_c);
  return {s_w, std::abs(s_w - Scalar(1)), gamma_w};
}

/// True while the agent operates within the nominal envelope: (1 - S_R) <= gamma.
template <typename Scalar>
bool safety_threshold_check(Scalar S_R, Scalar gamma_S) {
  return (Scalar(1) - S_R) <= gamma_S;
}

template <typename Scalar>
struct GoalMetricT {
  Scalar lambda;
  Scalar G_R;
};
using GoalMetric = GoalMetricT<double>;

/// lambda = |p - G|^2 / |p0 - G|^2 and G_R = exp(-lambda^n_c).
template <typename Scalar>
GoalMetricT<Scalar> goal_metric(const Vec2T<Scalar>& p, const Vec2T<Scalar>& p0, const Vec2T<Scalar>& goal,
                                int n_c) {
  const Scalar norm0 = (p0 - goal).squaredNorm();
  if (!(std::sqrt(norm0) > Scalar(kSingularDistance))) {
    throw ContractViolation("goal_metric: start position coincides with the goal");
  }
  const Scalar lambda = (p - goal).squaredNorm() / norm0;
  return {lambda, detail::bounded_exp(lambda, n_c)};
}

/// Goal-reaching deviation: lambda not decreasing while the goal is not reached.
template <typename Scalar>
bool goal_deviation_flag(Scalar lambda, Scalar lambda_dot, Scalar tol_dev = Scalar(1e-6),
                         Scalar tol_goal = Scalar(1e-4)) {
  return lambda_dot >= -tol_dev && lambda > tol_goal;
}

/// Normalized squared distance of the formation centroid to its goal.
template <typename Scalar>
Scalar formation_goal_metric(const Vec2T<Scalar>& centroid, const Vec2T<Scalar>& centroid0,
                             const Vec2T<Scalar>& goal) {
  const Scalar norm0 = (centroid0 - goal).squaredNorm();
  if (!(std::sqrt(norm0) > Scalar(kSingularDistance))) {
    throw ContractViolation("formation_goal_metric: initial centroid coincides with the goal");
  }
  return (centroid - goal).squaredNorm() / norm0;
}

/// At least one formation member deviates when the centroid stalls or recedes past its start.
template <typename Scalar>
bool formation_deviation_flag(Scalar lambda_bar, Scalar lambda_bar_dot) {
  return lambda_bar_dot >= Scalar(0) || lambda_bar > Scalar(1);
}

/// F_Rij = exp(-| |p_i - p_j| - c_ij |^n_c).
template <typename Scalar>
Scalar task_metric(const Vec2T<Scalar>& p_i, const Vec2T<Scalar>& p_j, Scalar c_ij, int n_c) {
  return detail::bounded_exp(std::abs((p_i - p_j).norm() - c_ij), n_c);
}

struct TaskThreshold {
  double F_w;
  double gamma_F;
  double theta_w;
};

/// Worst-case task metric and its threshold at time t.
inline TaskThreshold task_threshold(const MetricConfig& cfg, double t) {
  const double theta =
      cfg.envelope ? cfg.envelope->k1 * std::exp(-cfg.envelope->k2 * t) * cfg.envelope->theta0 : cfg.theta_w;
  const double f_w = detail::bounded_exp(theta, cfg.n_c);
  return {f_w, std::abs(f_w - 1.0), theta};
}

inline void MetricConfig::validate() const {
  require(n_c >= 2, "metrics: n_c must be >= 2");
  if (envelope) {
    require(envelope->k1 > 0 && envelope->k2 > 0 && envelope->theta0 > 0,
            "metrics: envelope parameters must be positive");
  } else {
    require(theta_w > 0, "metrics: theta_w must be positive");
  }
}

}  // namespace rswarm

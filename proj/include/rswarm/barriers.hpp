#pragma once

// Barrier (safe when <= 0) and Lyapunov-type functions with analytic gradients.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rswarm/core.hpp"

namespace rswarm {

struct Obstacle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  bool operator==(const Obstacle&) const = default;
};

struct SafetyParams {
  double d = 0.1;    // inter-agent safety distance [m]
  double R_s = 1.0;  // sensing radius [m]
  bool operator==(const SafetyParams&) const = default;
};

template <typename Scalar>
struct BarrierEvalT {
  Scalar value;
  Vec2T<Scalar> grad_i;
  Vec2T<Scalar> grad_j;  // zero for obstacle terms
};
using BarrierEval = BarrierEvalT<double>;

/// h = d - |p_i - p_j|.
template <typename Scalar>
BarrierEvalT<Scalar> pair_barrier(const Vec2T<Scalar>& p_i, const Vec2T<Scalar>& p_j, Scalar d,
                                  AgentId id_i = -1, AgentId id_j = -1) {
  const Vec2T<Scalar> diff = p_i - p_j;
  const Scalar r = diff.norm();
  if (!(r > Scalar(kSingularDistance))) {
    throw SingularityError("pair_barrier: coincident agents " + std::to_string(id_i) + " and " +
                               std::to_string(id_j),
                           id_i, id_j);
  }
  const Vec2T<Scalar> grad_i = -diff / r;
  return {d - r, grad_i, -grad_i};
}

/// h = r_o - |p_i - c_o|.
template <typename Scalar>
BarrierEvalT<Scalar> obstacle_barrier(const Vec2T<Scalar>& p_i, const Obstacle& obs,
                                      AgentId id_i = -1) {
  const Vec2T<Scalar> diff = p_i - obs.center.template cast<Scalar>();
  const Scalar r = diff.norm();
  if (!(r > Scalar(kSingularDistance))) {
    throw SingularityError("obstacle_barrier: agent " + std::to_string(id_i) +
                               " at obstacle center",
                           id_i, -1);
  }
  return {Scalar(obs.radius) - r, -diff / r, Vec2T<Scalar>::Zero()};
}

template <typename Scalar>
struct LseResult {
  Scalar value;
  std::vector<Scalar> weights;  // softmax weights, d(value)/d(h_n)
};

/// ln(sum exp(h_n)), evaluated with a max shift.
template <typename Scalar>
LseResult<Scalar> lse_compose(std::span<const Scalar> values) {
  if (values.empty()) throw ContractViolation("lse_compose: empty value list");
  const Scalar top = *std::max_element(values.begin(), values.end());
  std::vector<Scalar> w(values.size());
  Scalar sum(0);
  for (std::size_t k = 0; k < values.size(); ++k) {
    w[k] = std::exp(values[k] - top);
    sum += w[k];
  }
  for (auto& wk : w) wk /= sum;
  return {top + std::log(sum), std::move(w)};
}

template <typename Scalar>
struct ClfEvalT {
  Scalar value;
  Vec2T<Scalar> grad;
};
using ClfEval = ClfEvalT<double>;

/// V = |p - G|^2.
template <typename Scalar>
ClfEvalT<Scalar> goal_clf(const Vec2T<Scalar>& p, const Vec2T<Scalar>& goal) {
  const Vec2T<Scalar> e = p - goal;
  return {e.squaredNorm(), Scalar(2) * e};
}

template <typename Scalar>
struct CentroidClfEvalT {
  Scalar value;
  Vec2T<Scalar> centroid;
  std::vector<Vec2T<Scalar>> grads;  // one per agent
};
using CentroidClfEval = CentroidClfEvalT<double>;

/// V = |c - G|^2 for the weighted centroid c = sum C_k p_k / sum C_k.
template <typename Scalar>
CentroidClfEvalT<Scalar> centroid_clf(std::span<const Vec2T<Scalar>> positions,
                                      std::span<const Scalar> weights,
                                      const Vec2T<Scalar>& goal) {
  require(positions.size() == weights.size(), "centroid_clf: positions/weights size mismatch");
  Scalar total(0);
  Vec2T<Scalar> acc = Vec2T<Scalar>::Zero();
  for (std::size_t k = 0; k < positions.size(); ++k) {
    total += weights[k];
    acc += weights[k] * positions[k];
  }
  if (!(total > Scalar(1e-9))) {
    throw ContractViolation("centroid_clf: degenerate centroid, weights sum to zero");
  }
  const Vec2T<Scalar> c = acc / total;
  const Vec2T<Scalar> e = c - goal;
  std::vector<Vec2T<Scalar>> grads(positions.size());
  for (std::size_t k = 0; k < positions.size(); ++k) grads[k] = Scalar(2) * (weights[k] / total) * e;
  return {e.squaredNorm(), c, std::move(grads)};
}

/// Weighted formation target sum F_j (p_j + c_j) / sum F_j.
template <typename Scalar>
Vec2T<Scalar> formation_target(std::span<const Vec2T<Scalar>> neighbors,
                               std::span<const Vec2T<Scalar>> offsets,
                               std::span<const Scalar> weights) {
  if (neighbors.empty()) throw ContractViolation("formation_target: empty neighbor list");
  require(neighbors.size() == offsets.size() && neighbors.size() == weights.size(),
          "formation_target: size mismatch");
  Scalar total(0);
  Vec2T<Scalar> acc = Vec2T<Scalar>::Zero();
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    total += weights[k];
    acc += weights[k] * (neighbors[k] + offsets[k]);
  }
  if (!(total > Scalar(1e-9))) throw ContractViolation("formation_target: weights sum to zero");
  return acc / total;
}

/// h^F = |p - target|; the gradient is zero at the target.
template <typename Scalar>
ClfEvalT<Scalar> formation_function(const Vec2T<Scalar>& p, const Vec2T<Scalar>& target) {
  const Vec2T<Scalar> e = p - target;
  const Scalar r = e.norm();
  if (r <= Scalar(kSingularDistance)) return {r, Vec2T<Scalar>::Zero()};
  return {r, e / r};
}

}  // namespace rswarm

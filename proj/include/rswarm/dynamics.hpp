#pragma once

// Control-affine agent dynamics x' = f(x) + g(x) u with x = [p; phi].

#include <cmath>
#include <string>

#include "rswarm/core.hpp"

namespace rswarm {

enum class ModelKind { SingleIntegrator, LinearizedUnicycle };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct DynamicsModel {
  ModelKind kind = ModelKind::SingleIntegrator;
  double b = 0.0;    // look-ahead offset [m], unicycle only
  int m = 2;         // input dimension
  double b_f = 0.0;  // Lipschitz bound of f [1/s]
  double b_g = 1.0;  // Lipschitz bound of g

  static DynamicsModel single_integrator() { return {}; }
  static DynamicsModel linearized_unicycle(double offset) {
    return {ModelKind::LinearizedUnicycle, offset, 2, 0.0, 1.0};
  }

  /// Throws ContractViolation when a field is out of range.
  void validate() const;

  bool operator==(const DynamicsModel&) const = default;
};

template <typename Scalar>
struct AgentStateT {
  AgentId id = 0;
  Vec2T<Scalar> p = Vec2T<Scalar>::Zero();
  Scalar phi = Scalar(0);
  Scalar t = Scalar(0);
};
using AgentState = AgentStateT<double>;

/// Admissible controls {u : A u <= b}.
struct InputPolytope {
  MatX A;
  VecX b;

  int dim() const { return static_cast<int>(A.cols()); }
  int rows() const { return static_cast<int>(A.rows()); }
  bool contains(const VecX& u, double tol = 1e-9) const {
    return ((A * u - b).array() <= tol).all();
  }

  /// Axis-aligned box |u_k| <= half_width.
  static InputPolytope box(double half_width, int m = 2);
  /// Box with per-axis bounds lo <= u <= hi.
  static InputPolytope box(const VecX& lo, const VecX& hi);

  bool operator==(const InputPolytope& o) const {
    return A.rows() == o.A.rows() && A.cols() == o.A.cols() && A == o.A && b == o.b;
  }
};

/// Position block of f, i.e. f^p(x).
template <typename Scalar>
Vec2T<Scalar> position_drift(const AgentStateT<Scalar>&, const DynamicsModel&) {
  return Vec2T<Scalar>::Zero();
}

/// Position block of g, i.e. g^p(x), a 2 x m matrix.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, Eigen::Dynamic> position_input_matrix(const AgentStateT<Scalar>&,
                                                               const DynamicsModel& model) {
  Eigen::Matrix<Scalar, 2, Eigen::Dynamic> g(2, model.m);
  g.setIdentity();
  return g;
}

/// Returns [p'; phi'] for control u held at the current state.
template <typename Scalar, typename Derived>
Vec3T<Scalar> eval_dynamics(const AgentStateT<Scalar>& state, const DynamicsModel& model,
                            const Eigen::MatrixBase<Derived>& u) {
  if (u.size() != model.m) throw ContractViolation("eval_dynamics: control dimension mismatch");
  if (!u.allFinite()) throw ContractViolation("eval_dynamics: non-finite control");
  Vec3T<Scalar> dx;
  dx.template head<2>() = position_drift(state, model) + position_input_matrix(state, model) * u;
  switch (model.kind) {
    case ModelKind::SingleIntegrator:
      dx(2) = Scalar(0);
      break;
    case ModelKind::LinearizedUnicycle:
      dx(2) = (-std::sin(state.phi) * u(0) + std::cos(state.phi) * u(1)) / Scalar(model.b);
      break;
  }
  return dx;
}

/// Maps unicycle body velocities (v, w) to look-ahead point controls u.
template <typename Scalar>
Vec2T<Scalar> body_to_control(Scalar phi, Scalar b, Scalar v, Scalar w) {
  return {std::cos(phi) * v - b * std::sin(phi) * w, std::sin(phi) * v + b * std::cos(phi) * w};
}

/// Inverse of body_to_control: returns (v, w).
template <typename Scalar>
Vec2T<Scalar> recover_body_inputs(Scalar phi, Scalar b, const Vec2T<Scalar>& u) {
  if (!(b > Scalar(0))) throw ContractViolation("recover_body_inputs: offset b must be positive");
  const Scalar c = std::cos(phi), s = std::sin(phi);
  return {c * u(0) + s * u(1), (-s * u(0) + c * u(1)) / b};
}

/// One explicit RK4 step with u held constant over [t, t + dt].
template <typename Scalar, typename Derived>
AgentStateT<Scalar> step(const AgentStateT<Scalar>& state, const DynamicsModel& model,
                         const Eigen::MatrixBase<Derived>& u, Scalar dt) {
  if (!(dt > Scalar(0))) throw ContractViolation("step: dt must be positive");
  auto shifted = [&](const Vec3T<Scalar>& k, Scalar h) {
    AgentStateT<Scalar> s = state;
    s.p += h * k.template head<2>();
    s.phi += h * k(2);
    return s;
  };
  const Vec3T<Scalar> k1 = eval_dynamics(state, model, u);
  const Vec3T<Scalar> k2 = eval_dynamics(shifted(k1, dt / 2), model, u);
  const Vec3T<Scalar> k3 = eval_dynamics(shifted(k2, dt / 2), model, u);
  const Vec3T<Scalar> k4 = eval_dynamics(shifted(k3, dt), model, u);
  const Vec3T<Scalar> incr = (k1 + 2 * k2 + 2 * k3 + k4) * (dt / 6);
  AgentStateT<Scalar> next = state;
  next.p += incr.template head<2>();
  next.phi += incr(2);
  next.t += dt;
  return next;
}

}  // namespace rswarm

#pragma once

// Critical time periods and critical zones.

#include <cmath>
#include <limits>

#include "rswarm/core.hpp"
#include "rswarm/dynamics.hpp"

namespace rswarm {

/// Returned instead of an unbounded critical time.
inline constexpr double kCriticalTimeCap = 1e9;

struct CriticalityConfig {
  int n = 3;                  // horizon multiplier, >= 2
  double max_horizon = 50.0;  // cap on n * T_s for zone quadrature [s]
};

/// T_s^j for one neighbor under held best-case (i) and worst-case (j) inputs.
template <typename Scalar, typename DerivedMin, typename DerivedMax>
Scalar critical_time_pair(Scalar r_ij, Scalar d, Scalar b_f, Scalar b_g,
                          const Eigen::MatrixBase<DerivedMin>& u_min,
                          const Eigen::MatrixBase<DerivedMax>& u_max, const Vec2T<Scalar>& p_j) {
  if (r_ij < d) throw UnsafeStateError("critical_time_pair: pair already closer than d");
  const Scalar rate = b_f + b_g * u_min.norm();
  if (!(rate > Scalar(0))) throw ContractViolation("critical_time_pair: b_f + b_g |u_min| must be positive");
  const Scalar k1 = r_ij + b_g * p_j.norm() * (u_max - u_min).norm() / rate;
  const Scalar ratio = (r_ij - d) / k1;
  if (ratio >= Scalar(1)) return Scalar(kCriticalTimeCap);
  return std::min(Scalar(kCriticalTimeCap), -std::log1p(-ratio) / rate);
}

/// T_s^{oj} for one static obstacle at center distance v.
template <typename Scalar, typename Derived>
Scalar critical_time_obstacle(Scalar v, Scalar r_o, Scalar b_f, Scalar b_g,
                              const Eigen::MatrixBase<Derived>& u_max) {
  if (v < r_o) throw UnsafeStateError("critical_time_obstacle: agent already inside obstacle");
  const Scalar rate = b_f + b_g * u_max.norm();
  if (!(rate > Scalar(0))) throw ContractViolation("critical_time_obstacle: b_f + b_g |u_max| must be positive");
  const Scalar ratio = (v - r_o) / (v + r_o);
  if (ratio >= Scalar(1)) return Scalar(kCriticalTimeCap);
  return std::min(Scalar(kCriticalTimeCap), -std::log1p(-ratio) / rate);
}

namespace detail {

// Both supported models have a state-independent position block (f^p = 0, g^p = I).
inline bool position_block_is_constant(const DynamicsModel& model) {
  return model.kind == ModelKind::SingleIntegrator || model.kind == ModelKind::LinearizedUnicycle;
}

/// RK4 quadrature of the position derivative at step dt.
template <typename Scalar, typename Derived>
Vec2T<Scalar> displacement_rk4(const AgentStateT<Scalar>& state, const DynamicsModel& model,
                               const Eigen::MatrixBase<Derived>& u, Scalar horizon, Scalar dt) {
  AgentStateT<Scalar> s = state;
  Scalar elapsed(0);
  while (elapsed < horizon) {
    const Scalar h = std::min(dt, horizon - elapsed);
    s = step(s, model, u, h);
    elapsed += h;
  }
  return s.p - state.p;
}

template <typename Scalar, typename Derived>
Vec2T<Scalar> displacement(const AgentStateT<Scalar>& state, const DynamicsModel& model,
                           const Eigen::MatrixBase<Derived>& u, Scalar horizon, Scalar dt) {
  if (position_block_is_constant(model)) {
    return horizon * (position_drift(state, model) + position_input_matrix(state, model) * u);
  }
  return displacement_rk4(state, model, u, horizon, dt);
}

}  // namespace detail

/// eta_ij: norm of the relative displacement over min(horizon, cfg.max_horizon).
template <typename Scalar, typename DerivedI, typename DerivedJ>
Scalar critical_zone_pair(const AgentStateT<Scalar>& state_i, const DynamicsModel& model_i,
                          const Eigen::MatrixBase<DerivedI>& u_i_min,
                          const AgentStateT<Scalar>& state_j, const DynamicsModel& model_j,
                          const Eigen::MatrixBase<DerivedJ>& u_j_max, Scalar horizon, Scalar dt,
                          Scalar max_horizon = Scalar(50)) {
  require(dt > Scalar(0), "critical_zone_pair: dt must be positive");
  const Scalar h = std::min(std::max(horizon, Scalar(0)), max_horizon);
  if (h == Scalar(0)) return Scalar(0);
  return (detail::displacement(state_i, model_i, u_i_min, h, dt) -
          detail::displacement(state_j, model_j, u_j_max, h, dt))
      .norm();
}

/// eta_{i o_j}: displacement norm of agent i alone (the obstacle is static).
template <typename Scalar, typename Derived>
Scalar critical_zone_obstacle(const AgentStateT<Scalar>& state_i, const DynamicsModel& model_i,
                              const Eigen::MatrixBase<Derived>& u_i_max, Scalar horizon, Scalar dt,
                              Scalar max_horizon = Scalar(50)) {
  require(dt > Scalar(0), "critical_zone_obstacle: dt must be positive");
  const Scalar h = std::min(std::max(horizon, Scalar(0)), max_horizon);
  if (h == Scalar(0)) return Scalar(0);
  return detail::displacement(state_i, model_i, u_i_max, h, dt).norm();
}

}  // namespace rswarm

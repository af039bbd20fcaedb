#include <cmath>

#include "rswarm/core.hpp"
#include "rswarm/dynamics.hpp"

namespace rswarm {

namespace {

std::string summarize(const std::vector<FieldError>& errors) {
  std::string out = "scenario validation failed";
  for (const auto& e : errors) out += "\n  " + e.path + ": " + e.message;
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<FieldError> errors)
    : std::runtime_error(summarize(errors)), errors_(std::move(errors)) {}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SingleIntegrator: return "single_integrator";
    case ModelKind::LinearizedUnicycle: return "linearized_unicycle";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "single_integrator") return ModelKind::SingleIntegrator;
  if (name == "linearized_unicycle") return ModelKind::LinearizedUnicycle;
  throw ContractViolation("unknown dynamics model '" + name + "'");
}

void DynamicsModel::validate() const {
  require(m == 2, "dynamics: input dimension must be 2");
  require(std::isfinite(b_f) && b_f >= 0.0, "dynamics: b_f must be finite and >= 0");
  require(std::isfinite(b_g) && b_g > 0.0, "dynamics: b_g must be finite and > 0");
  if (kind == ModelKind::LinearizedUnicycle) {
    require(std::isfinite(b) && b > 0.0, "dynamics: unicycle offset b must be > 0");
  }
}

InputPolytope InputPolytope::box(double half_width, int m) {
  require(half_width > 0.0 && m > 0, "InputPolytope::box: invalid size");
  return box(VecX::Constant(m, -half_width), VecX::Constant(m, half_width));
}

InputPolytope InputPolytope::box(const VecX& lo, const VecX& hi) {
  require(lo.size() == hi.size() && lo.size() > 0, "InputPolytope::box: bound size mismatch");
  require(((hi - lo).array() > 0.0).all(), "InputPolytope::box: lo must be below hi");
  const auto m = lo.size();
  InputPolytope poly;
  poly.A = MatX::Zero(2 * m, m);
  poly.b = VecX(2 * m);
  for (Eigen::Index k = 0; k < m; ++k) {
    poly.A(2 * k, k) = 1.0;
    poly.b(2 * k) = hi(k);
    poly.A(2 * k + 1, k) = -1.0;
    poly.b(2 * k + 1) = -lo(k);
  }
  return poly;
}

}  // namespace rswarm

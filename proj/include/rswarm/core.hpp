#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace rswarm {

template <typename Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using VecXT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatXT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec2 = Vec2T<double>;
using Vec3 = Vec3T<double>;
using VecX = VecXT<double>;
using MatX = MatXT<double>;

using AgentId = int;

/// Distances at or below this are treated as coincident points.
inline constexpr double kSingularDistance = 1e-9;

/// A precondition of an operation was not met by its caller.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A barrier or metric was evaluated where its gradient is undefined.
class SingularityError : public std::domain_error {
 public:
  SingularityError(const std::string& what, AgentId a, AgentId b)
      : std::domain_error(what), first(a), second(b) {}
  AgentId first;
  AgentId second;
};

/// The configuration is already outside the safe set.
class UnsafeStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// One semantic problem found while validating a scenario.
struct FieldError {
  std::string path;  // JSON-pointer style, e.g. "/safety/R_s"
  std::string message;
};

/// Scenario validation failed; carries every violation found.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<FieldError> errors);
  const std::vector<FieldError>& errors() const { return errors_; }

 private:
  std::vector<FieldError> errors_;
};

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace rswarm

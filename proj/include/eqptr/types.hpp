#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace eqptr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

/// Raised when an iterative solver fails to reach its tolerance.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double residual_norm = -1.0)
      : std::runtime_error(what), residual_norm(residual_norm) {}
  double residual_norm;
};

/// Raised on singular or otherwise unusable linear systems.
class LinearAlgebraError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Lagrange multiplier estimate and penalty parameter, frozen per major iteration.
struct ALContext {
  Vec theta;     // multiplier estimate, length N_c
  double tau{0}; // penalty parameter, >= 0 (0 only for the pure-Lagrangian edge case)
};

}  // namespace eqptr

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace accel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class RunStatus {
  converged,         // stopping target met
  completed,         // requested iteration count finished, no target set
  budget_exhausted,  // target set but not reached within the budget
};

// Contract violations (bad arguments, unusable problem data). Algorithmic
// outcomes like budget exhaustion are reported through RunStatus instead.
class contract_error : public std::runtime_error {
public:
  explicit contract_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical invariants broken at runtime (non-finite iterates, failed
// step-size search, solver postconditions).
class invariant_error : public std::runtime_error {
public:
  explicit invariant_error(const std::string& what) : std::runtime_error(what) {}
};

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace accel

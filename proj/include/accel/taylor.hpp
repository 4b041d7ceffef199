#pragma once

#include "accel/problem.hpp"
#include "accel/types.hpp"

namespace accel {

// Degree-p Taylor expansion of f around a center, plus the (p+1)-power
// regularizer H/(p+1)!·‖y − center‖^{p+1} that completes the step subproblem.
struct TaylorModel {
  int order = 1;  // p ∈ {1, 2}
  Vector center;
  double f_center = 0.0;
  Vector grad_center;
  Matrix hess_center;  // p = 2 only
  double reg_H = 0.0;

  double value(const Vector& y) const;
  Vector gradient(const Vector& y) const;
  double reg_value(const Vector& y) const;
  Vector reg_gradient(const Vector& y) const;

  double full_value(const Vector& y) const { return value(y) + reg_value(y); }
  Vector full_gradient(const Vector& y) const { return gradient(y) + reg_gradient(y); }
};

TaylorModel build_taylor_model(const CompositeProblem& problem, int p, const Vector& center,
                               double H, OracleLedger* ledger = nullptr,
                               Level level = Level::outer);

}  // namespace accel

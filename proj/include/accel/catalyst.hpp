#pragma once

#include "accel/restart.hpp"

namespace accel {

// Accelerated proximal-point wrapper: order-1 outer loop with f ≡ 0, so each
// step is min_y g(y) + (H/2)‖y − x̃‖² handed to an unaccelerated inner solver
// under the contraction criterion, whose threshold involves only H, L₁ᵍ and
// the step length — never the target accuracy.
struct CatalystConfig {
  double H = 1.0;
  long outer_iters = 100;
  double target_gap = 0.0;
  long inner_budget = 1000000;
  bool use_restart = true;  // stage schedule when uniform-convexity data is present
  bool diagnostics = false;
};

class CatalystSolver {
public:
  CatalystSolver(CompositeProblem problem, CatalystConfig config,
                 std::shared_ptr<InnerSolver> inner);

  AmResult run(const Vector& x0, OracleLedger* ledger = nullptr,
               const IterCallback& callback = nullptr) const;

  StepCriterion inner_criterion() const { return StepCriterion::contraction; }
  const CompositeProblem& problem() const { return problem_; }

private:
  CompositeProblem problem_;
  CatalystConfig config_;
  std::shared_ptr<InnerSolver> inner_;
};

// Package a problem whose objective sits entirely in one smooth part as a
// proximal-only instance (f ≡ 0, everything in g).
CompositeProblem as_g_only(const CompositeProblem& problem);

CatalystSolver catalyst_wrap(const CompositeProblem& g_only_problem, double H,
                             std::shared_ptr<InnerSolver> inner, const CatalystConfig& config);

}  // namespace accel

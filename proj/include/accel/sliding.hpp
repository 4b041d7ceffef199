#pragma once

#include "accel/restart.hpp"

namespace accel {

// Nested composition separating the oracle bills: the outer loop pays one
// ∇f per iteration while each step subproblem — g plus the outer model and
// regularizer, a strongly convex objective — is handed to a restarted run
// billed entirely against g.
struct SlidingConfig {
  double Hf = 1.0;  // outer constant, ≥ 2·L_{1,f}
  double Hg = 0.0;  // inner constant, ≍ 2·L_{1,g}; 0 derives it from g
  double hg_factor = 1.0;  // knob on the inner-constant proportionality
  long outer_iters = 100;
  double target_gap = 0.0;
  long inner_stage_cap = 200;  // restart stages per subproblem
  long inner_budget = 2000000; // total inner iterations per subproblem
  bool exact_inner = false;    // closed-form subproblem solves (quadratic g)
  bool diagnostics = false;
};

struct SlidingResult {
  Vector y;
  RunStatus status = RunStatus::completed;
  std::vector<IterRecord> iters;
  long inner_total = 0;
  std::string note;
};

SlidingResult sliding_run(const CompositeProblem& problem, const SlidingConfig& config,
                          const Vector& x0, OracleLedger* ledger = nullptr,
                          const IterCallback& callback = nullptr);

}  // namespace accel

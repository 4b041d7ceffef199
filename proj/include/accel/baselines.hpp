#pragma once

#include "accel/engine.hpp"

namespace accel {

// Constant-step accelerated gradient method in estimating-sequence form.
AmResult fgm_run(const CompositeProblem& problem, double L, const Vector& x0, long iters,
                 OracleLedger* ledger = nullptr, double target_gap = 0.0,
                 const IterCallback& callback = nullptr);

struct AcdmConfig {
  double beta = 0.5;     // sampling exponent: q_i ∝ L_i^β
  Vector coord_lip;      // per-coordinate gradient Lipschitz constants
  long budget = 1000000; // coordinate steps
  std::uint64_t seed = 0;
  int check_every = 0;   // stop-predicate cadence in coordinate steps; 0 → dim
};

struct AcdmResult {
  Vector y;
  RunStatus status = RunStatus::completed;
  long coord_steps = 0;
};

// Accelerated randomized coordinate descent with nonuniform sampling.
AcdmResult acdm_run(const InnerObjective& objective, const AcdmConfig& config, const Vector& x0,
                    const std::function<bool(const Vector&)>& stop);

// Sampling distribution q_i = L_i^β / Σ_j L_j^β.
Vector acdm_probabilities(const Vector& coord_lip, double beta);

// InnerSolver adapter so coordinate descent can serve as a step-subproblem or
// proximal-subproblem inner method.
class AcdmInner final : public InnerSolver {
public:
  AcdmInner(double beta, std::uint64_t seed, int check_every = 0)
      : beta_(beta), seed_(seed), check_every_(check_every) {}
  bool minimize(const InnerObjective& objective, Vector& y,
                const std::function<bool(const Vector&)>& stop, long budget,
                long& iters) override;
  std::string name() const override { return "acdm"; }

private:
  double beta_;
  std::uint64_t seed_;
  int check_every_;
  std::uint64_t invocation_ = 0;
};

struct MsConfig {
  double sigma = 0.5;
  long outer_iters = 100;
  long inner_budget = 1000000;
  double target_gap = 0.0;
};

// Momentum bookkeeping shared with the order-1 engine, but the step
// subproblem carries the full objective F (not a model of f plus exact g):
// min_u F(u) + L·‖u − x̃‖², solved until the σ-residual test on the true
// gradient holds. That heavier inner demand is the point of the comparison.
AmResult ms_run(const CompositeProblem& problem, double L, InnerSolver& inner, const Vector& x0,
                const MsConfig& config, OracleLedger* ledger = nullptr,
                const IterCallback& callback = nullptr);

// The proximal subproblem of ms_run packaged for inner solvers.
InnerObjective make_ms_objective(const CompositeProblem& problem, const Vector& xt, double L,
                                 OracleLedger* ledger);

// Full composite objective with per-part coordinate accounting, for running
// coordinate descent directly on F.
InnerObjective make_composite_objective(const CompositeProblem& problem, OracleLedger* ledger,
                                        Level level = Level::outer);

}  // namespace accel

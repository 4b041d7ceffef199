#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "accel/problem.hpp"
#include "accel/taylor.hpp"

namespace accel {

// Step subproblem: minimize Ω̃(y) = Ω_p(f, x̃; y) + g(y) + H/(p+1)!·‖y − x̃‖^{p+1}.

enum class InexactCriterion : int {
  grad_ratio = 6,      // ‖∇Ω̃(ỹ)‖ ≤ 1/(4p(p+1))·‖∇F(ỹ)‖
  contraction = 8,     // surrogate ‖∇Ω̃(ỹ)‖ ≤ H·ρ/(1+ρ)·‖x̃ − ỹ‖, ρ = H/(3H+2L₁ᵍ)
  sigma_residual = 11  // ‖ỹ − x̃ + λ(∇Ω̃(ỹ) − ∇reg(ỹ))‖ ≤ σ‖ỹ − x̃‖
};

struct SubSolution {
  Vector y;
  double grad_norm = 0.0;  // ‖∇Ω̃(ỹ)‖ at exit (0 for prox-exact solves)
  long inner_iters = 0;
  bool exact = false;
  bool criterion_met = true;  // false when the inner budget ran out
};

// What inner solvers see: the subproblem as a black box plus whatever
// structure is known. Closures report oracle calls to the ledger they were
// assembled with.
struct InnerObjective {
  int dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
  std::function<double(const Vector&, int)> coord_grad;
  Vector coord_lip;
  double lip1 = std::numeric_limits<double>::quiet_NaN();
  double mu = 0.0;  // strong convexity modulus when known
  std::optional<QuadraticForm> quadratic;
};

class InnerSolver {
public:
  virtual ~InnerSolver() = default;
  // Iterate from y in place until stop(y) holds or the budget runs out.
  // Returns true if the predicate was met; iters reports steps taken.
  virtual bool minimize(const InnerObjective& objective, Vector& y,
                        const std::function<bool(const Vector&)>& stop, long budget,
                        long& iters) = 0;
  virtual std::string name() const = 0;
};

// Fixed-step (1/L) descent; falls back to backtracking when L is unknown.
std::unique_ptr<InnerSolver> make_gradient_descent_inner();
// Direct solve when the subproblem is an explicit quadratic.
std::unique_ptr<InnerSolver> make_exact_quadratic_inner();

struct SubproblemSpec {
  const TaylorModel* model = nullptr;
  const CompositeProblem* problem = nullptr;
  InexactCriterion criterion = InexactCriterion::contraction;
  double sigma = 0.5;
  double lambda = 0.0;  // required by criterion 11
  long inner_budget = 200000;
};

struct CriterionContext {
  int p = 1;
  double H = 0.0;
  double lip1_g = 0.0;
  double sigma = 0.5;
  double lambda = 0.0;
  Vector model_grad;  // ∇Ω̃(ỹ), regularizer included
  Vector full_grad;   // ∇F(ỹ) (criterion 6 only)
  Vector xt;
  Vector yt;
};

bool criterion_check(InexactCriterion kind, const CriterionContext& ctx);

SubSolution solve_sub_p1(const TaylorModel& model, const CompositeProblem& problem,
                         OracleLedger* ledger = nullptr, Level level = Level::inner);

SubSolution solve_sub_p2(const TaylorModel& model, const CompositeProblem& problem,
                         OracleLedger* ledger = nullptr, Level level = Level::inner);

SubSolution solve_sub_inner(const SubproblemSpec& spec, InnerSolver& inner,
                            OracleLedger* ledger = nullptr);

// The subproblem packaged for inner solvers; exposed for tests and baselines.
InnerObjective make_subproblem_objective(const TaylorModel& model,
                                         const CompositeProblem& problem, OracleLedger* ledger);

}  // namespace accel

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "accel/problem.hpp"
#include "accel/subsolver.hpp"
#include "accel/taylor.hpp"

namespace accel {

enum class StepCheck { too_small, accepted, too_large };

enum class StepCriterion { exact, grad_ratio, contraction, sigma_residual };

// Fault-injection seams for the verification suites.
enum class Fault : int { none = 0, momentum = 1, eta_band = 2 };

struct AmConfig {
  int p = 1;
  double H = 1.0;
  double sigma = 0.5;
  StepCriterion criterion = StepCriterion::exact;
  double lambda0 = 0.0;  // step-size seed for p ≥ 2; 0 picks one from ∇F(x₀)
  int max_resolves = 60;
  long max_iters = 100;
  double target_gap = 0.0;  // 0 runs the full budget
  bool diagnostics = true;
  long inner_budget = 200000;
  // Use the model-implied subgradient for the dual update even when g is
  // smooth (saves the ∇g call; the proximal-point configuration relies on it).
  bool force_implicit_g = false;
  Fault fault = Fault::none;
};

// How step subproblems get solved.
struct Subsolver {
  enum class Mode { closed_form, inner } mode = Mode::closed_form;
  std::shared_ptr<InnerSolver> inner;

  static Subsolver closed_form() { return {}; }
  static Subsolver with_inner(std::shared_ptr<InnerSolver> solver) {
    Subsolver s;
    s.mode = Mode::inner;
    s.inner = std::move(solver);
    return s;
  }
};

// ψ_k(x) = ½‖x − x₀‖² + Σ a_i [F(y_i) + ⟨w_i, x − y_i⟩], kept in closed form
// through its minimizer; ψ_k(x) = ψ_k(x_k) + ½‖x − x_k‖² by construction.
class PotentialTracker {
public:
  void init(const Vector& x0, double sigma_config);
  void accumulate(double a, double A_new, double lambda, const Vector& y, double F_y,
                  const Vector& w, const Vector& xt);

  const Vector& center() const { return center_; }  // argmin ψ_k = x_k
  double min_value() const { return min_value_; }
  double value_at(const Vector& x) const { return min_value_ + 0.5 * (x - center_).squaredNorm(); }
  double lower_sum() const { return lower_sum_; }  // Σ (A_i/λ_i)·‖y_i − x̃_{i−1}‖²
  double sigma_effective() const { return sigma_eff_; }
  bool initialized() const { return center_.size() > 0; }

private:
  Vector x0_;
  Vector s_;  // Σ a_i w_i
  Vector center_;
  double const_acc_ = 0.0;  // Σ a_i (F(y_i) − ⟨w_i, y_i⟩)
  double min_value_ = 0.0;
  double lower_sum_ = 0.0;
  double sigma_eff_ = 0.5;  // max of configured σ and observed dual residuals
};

struct AmState {
  long k = 0;
  double A = 0.0;
  Vector x;
  Vector y;
  double lambda_last = 0.0;
  PotentialTracker potential;
};

struct StepOutcome {
  double lambda = 0.0;
  Vector y_next;
  int resolve_count = 0;
  double sigma_residual = 0.0;
  double sub_grad_norm = 0.0;
  double eta = 0.0;
  long inner_iters = 0;
  bool outer_converged = false;  // step collapsed to the extrapolation point
};

struct IterRecord {
  long k = 0;
  double A = 0.0;
  double lambda = 0.0;
  double F_y = 0.0;
  double eta = 0.0;
  double sigma_residual = 0.0;
  int resolve_count = 0;
  long inner_iters = 0;     // this step
  long inner_cum = 0;       // running total
  double psi_gap = 0.0;         // NaN when diagnostics are off
  double certified_floor = 0.0;  // lower bound psi_gap must clear; NaN when diagnostics are off
};

struct AmResult {
  Vector y;
  RunStatus status = RunStatus::completed;
  std::vector<IterRecord> iters;
  double final_F = 0.0;
  std::string note;
};

using IterCallback = std::function<void(const AmState&, const IterRecord&)>;

// a_{k+1} solves λ·A_{k+1} = a_{k+1}²; returns (a_{k+1}, A_{k+1})
std::pair<double, double> momentum_update(double A, double lambda,
                                          Fault fault = Fault::none);

Vector extrapolate(double A, double a_next, const Vector& y, const Vector& x);

// η = λ·H·dist^{p−1}/p! against the acceptance band [½, p/(p+1)]
StepCheck check_step_condition(double lambda, double H, int p, double dist,
                               double upper_override = -1.0);

Vector gradient_step(const Vector& x, double a, const Vector& grad_sum);

// ‖y − x̃ + λ(∇f(y) + g′(y))‖ / ‖y − x̃‖; 0 when y = x̃
double sigma_residual(const Vector& y, const Vector& xt, double lambda, const Vector& grad_f_y,
                      const Vector& grad_g_y);

std::pair<double, double> potential_diagnostic(const AmState& state,
                                               const CompositeProblem& problem);

StepOutcome lambda_search(AmState& state, const CompositeProblem& problem, const AmConfig& config,
                          const Subsolver& subsolver, OracleLedger* ledger = nullptr);

AmResult am_run(const CompositeProblem& problem, const AmConfig& config, const Vector& x0,
                const Subsolver& subsolver, OracleLedger* ledger = nullptr,
                const IterCallback& callback = nullptr);

}  // namespace accel

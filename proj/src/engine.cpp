#include "accel/engine.hpp"

#include <cmath>

namespace accel {

namespace {

struct InternalStep {
  StepOutcome out;
  TaylorModel model;
  Vector xt;
  double a_next = 0.0;
  double A_next = 0.0;
  SubSolution sub;
};

bool closed_form_capable(const CompositeProblem& problem, int p) {
  if (problem.g.is_zero || problem.g.quadratic) return true;
  return p == 1 && static_cast<bool>(problem.g.prox);
}

SubSolution solve_step(const TaylorModel& model, const CompositeProblem& problem,
                       const AmConfig& config, const Subsolver& subsolver, double lambda,
                       OracleLedger* ledger) {
  if (config.criterion == StepCriterion::exact) {
    if (subsolver.mode != Subsolver::Mode::closed_form)
      throw contract_error("exact step criterion requires the closed-form subsolver");
    return model.order == 1 ? solve_sub_p1(model, problem, ledger, Level::outer)
                            : solve_sub_p2(model, problem, ledger, Level::outer);
  }
  if (!subsolver.inner) throw contract_error("inexact step criterion requires an inner solver");
  SubproblemSpec spec;
  spec.model = &model;
  spec.problem = &problem;
  spec.criterion = config.criterion == StepCriterion::grad_ratio ? InexactCriterion::grad_ratio
                   : config.criterion == StepCriterion::contraction
                       ? InexactCriterion::contraction
                       : InexactCriterion::sigma_residual;
  spec.sigma = config.sigma;
  spec.lambda = lambda;
  spec.inner_budget = config.inner_budget;
  return solve_sub_inner(spec, *subsolver.inner, ledger);
}

InternalStep trial_step(AmState& state, const CompositeProblem& problem, const AmConfig& config,
                        const Subsolver& subsolver, double lambda, OracleLedger* ledger) {
  InternalStep step;
  step.out.lambda = lambda;
  std::tie(step.a_next, step.A_next) = momentum_update(state.A, lambda, config.fault);
  step.xt = extrapolate(state.A, step.a_next, state.y, state.x);
  step.model = build_taylor_model(problem, config.p, step.xt, config.H, ledger, Level::outer);
  step.sub = solve_step(step.model, problem, config, subsolver, lambda, ledger);
  step.out.y_next = step.sub.y;
  step.out.sub_grad_norm = step.sub.grad_norm;
  step.out.inner_iters = step.sub.inner_iters;
  step.out.resolve_count = 1;
  return step;
}

InternalStep search_step(AmState& state, const CompositeProblem& problem, const AmConfig& config,
                         const Subsolver& subsolver, OracleLedger* ledger) {
  const double upper = config.fault == Fault::eta_band ? 1.0 : -1.0;

  if (config.p == 1) {
    const double lambda = 0.5 / config.H;
    InternalStep step = trial_step(state, problem, config, subsolver, lambda, ledger);
    const double dist = (step.out.y_next - step.xt).norm();
    if (dist <= 1e-12 * (1.0 + step.xt.norm())) step.out.outer_converged = true;
    // λ = 1/(2H) pins η to the single admissible point of the p=1 band
    step.out.eta = 0.5;
    return step;
  }

  double lambda = state.lambda_last > 0.0 ? state.lambda_last : config.lambda0;
  if (!(lambda > 0.0)) {
    const double gn = grad_F(problem, state.y, ledger, Level::outer).norm();
    lambda = factorial(config.p) /
             (config.H * std::max(std::pow(gn, config.p - 1), 1e-12));
  }

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  InternalStep step;
  for (int tries = 1; tries <= config.max_resolves; ++tries) {
    step = trial_step(state, problem, config, subsolver, lambda, ledger);
    step.out.resolve_count = tries;
    const double dist = (step.out.y_next - step.xt).norm();
    if (dist <= 1e-12 * (1.0 + step.xt.norm())) {
      step.out.outer_converged = true;
      step.out.eta = 0.5;
      return step;
    }
    step.out.eta =
        lambda * config.H * std::pow(dist, config.p - 1) / factorial(config.p);
    const StepCheck check = check_step_condition(lambda, config.H, config.p, dist, upper);
    if (check == StepCheck::accepted) return step;
    if (check == StepCheck::too_small)
      lo = lambda;
    else
      hi = lambda;
    if (std::isinf(hi))
      lambda = lambda * 2.0;
    else if (lo == 0.0)
      lambda = lambda * 0.5;
    else
      lambda = std::sqrt(lo * hi);
  }
  throw invariant_error(
      "step-size search exhausted; the regularizer constant is likely below the required "
      "multiple of the model Lipschitz constant");
}

}  // namespace

std::pair<double, double> momentum_update(double A, double lambda, Fault fault) {
  if (!(lambda > 0.0)) throw contract_error("step size must be positive");
  const double inside = fault == Fault::momentum ? lambda * lambda + A
                                                 : lambda * lambda + 4.0 * lambda * A;
  const double a = 0.5 * (lambda + std::sqrt(inside));
  return {a, A + a};
}

Vector extrapolate(double A, double a_next, const Vector& y, const Vector& x) {
  const double A_next = A + a_next;
  return (A / A_next) * y + (a_next / A_next) * x;
}

StepCheck check_step_condition(double lambda, double H, int p, double dist,
                               double upper_override) {
  const double eta = lambda * H * std::pow(dist, p - 1) / factorial(p);
  const double upper = upper_override > 0.0 ? upper_override
                                            : static_cast<double>(p) / (p + 1);
  if (eta < 0.5) return StepCheck::too_small;
  if (eta > upper) return StepCheck::too_large;
  return StepCheck::accepted;
}

Vector gradient_step(const Vector& x, double a, const Vector& grad_sum) {
  return x - a * grad_sum;
}

double sigma_residual(const Vector& y, const Vector& xt, double lambda, const Vector& grad_f_y,
                      const Vector& grad_g_y) {
  const double dist = (y - xt).norm();
  if (dist == 0.0) return 0.0;
  return (y - xt + lambda * (grad_f_y + grad_g_y)).norm() / dist;
}

void PotentialTracker::init(const Vector& x0, double sigma_config) {
  x0_ = x0;
  s_ = Vector::Zero(x0.size());
  center_ = x0;
  const_acc_ = 0.0;
  min_value_ = 0.0;
  lower_sum_ = 0.0;
  sigma_eff_ = sigma_config;
}

void PotentialTracker::accumulate(double a, double A_new, double lambda, const Vector& y,
                                  double F_y, const Vector& w, const Vector& xt) {
  if (!initialized()) throw contract_error("potential tracker not initialized");
  s_ += a * w;
  const_acc_ += a * (F_y - w.dot(y));
  center_ = x0_ - s_;
  min_value_ = s_.dot(x0_) - 0.5 * s_.squaredNorm() + const_acc_;
  const double dist = (y - xt).norm();
  lower_sum_ += A_new / lambda * dist * dist;
  if (dist > 0.0) {
    const double resid = (y - xt + lambda * w).norm() / dist;
    sigma_eff_ = std::max(sigma_eff_, resid);
  }
}

std::pair<double, double> potential_diagnostic(const AmState& state,
                                               const CompositeProblem& problem) {
  if (!state.potential.initialized()) throw contract_error("potential tracker not initialized");
  const double F_y = eval_value(problem, Term::F, state.y, nullptr);
  const double psi_gap = state.potential.min_value() - state.A * F_y;
  const double sig = state.potential.sigma_effective();
  const double lower = 0.5 * (1.0 - sig * sig) * state.potential.lower_sum();
  return {psi_gap, lower};
}

StepOutcome lambda_search(AmState& state, const CompositeProblem& problem, const AmConfig& config,
                          const Subsolver& subsolver, OracleLedger* ledger) {
  return search_step(state, problem, config, subsolver, ledger).out;
}

AmResult am_run(const CompositeProblem& problem, const AmConfig& config, const Vector& x0,
                const Subsolver& subsolver, OracleLedger* ledger, const IterCallback& callback) {
  if (config.p != 1 && config.p != 2) throw contract_error("model order must be 1 or 2");
  if (!(config.H > 0.0)) throw contract_error("regularizer constant must be positive");
  if (x0.size() != problem.dim) throw contract_error("start point dimension mismatch");
  if (config.criterion == StepCriterion::exact && !closed_form_capable(problem, config.p))
    throw contract_error("exact steps need g to be zero, quadratic, or prox-capable");

  const bool use_implicit = !problem.g.is_zero &&
                            (config.force_implicit_g || !problem.g.smooth || !problem.g.grad);
  // The potential chain is certified when every dual vector is a genuine
  // (sub)gradient at y: all exact solves, and inexact solves with smooth g.
  const bool certify_potential =
      config.diagnostics && (config.criterion == StepCriterion::exact || !use_implicit);

  AmState state;
  state.x = x0;
  state.y = x0;
  state.potential.init(x0, config.sigma);

  AmResult result;
  result.y = x0;
  result.status = config.target_gap > 0.0 ? RunStatus::budget_exhausted : RunStatus::completed;

  long inner_cum = 0;
  for (long k = 0; k < config.max_iters; ++k) {
    InternalStep step = search_step(state, problem, config, subsolver, ledger);
    if (step.out.outer_converged) {
      result.status = RunStatus::converged;
      result.note = "step collapsed to the extrapolation point";
      break;
    }
    if (!step.sub.criterion_met) {
      result.status = RunStatus::budget_exhausted;
      result.note = "inner solver budget exhausted; achieved model gradient norm " +
                    std::to_string(step.sub.grad_norm);
      break;
    }

    const Vector& y_next = step.out.y_next;
    Vector gg;
    if (problem.g.is_zero) {
      gg = Vector::Zero(problem.dim);
    } else if (use_implicit) {
      gg = -step.model.gradient(y_next) - step.model.reg_gradient(y_next);
    } else {
      gg = eval_grad(problem, Term::g, y_next, ledger, Level::outer);
    }
    Vector gf = problem.f.is_zero ? Vector::Zero(problem.dim)
                                  : eval_grad(problem, Term::f, y_next, ledger, Level::outer);
    const Vector w = gf + gg;

    step.out.sigma_residual =
        sigma_residual(y_next, step.xt, step.out.lambda, step.model.gradient(y_next), gg);

    state.x = gradient_step(state.x, step.a_next, w);
    state.y = y_next;
    state.A = step.A_next;
    state.lambda_last = step.out.lambda;
    state.k = k + 1;

    const double F_y = eval_value(problem, Term::F, y_next, ledger, Level::outer);
    state.potential.accumulate(step.a_next, step.A_next, step.out.lambda, y_next, F_y, w,
                               step.xt);

    IterRecord rec;
    rec.k = state.k;
    rec.A = state.A;
    rec.lambda = step.out.lambda;
    rec.F_y = F_y;
    rec.eta = step.out.eta;
    rec.sigma_residual = step.out.sigma_residual;
    rec.resolve_count = step.out.resolve_count;
    rec.inner_iters = step.out.inner_iters;
    inner_cum += step.out.inner_iters;
    rec.inner_cum = inner_cum;
    if (config.diagnostics) {
      std::tie(rec.psi_gap, rec.certified_floor) = potential_diagnostic(state, problem);
      if (certify_potential &&
          rec.psi_gap < rec.certified_floor - 1e-9 * (1.0 + state.potential.lower_sum()))
        throw invariant_error("estimating-sequence potential fell below its certified floor");
    } else {
      rec.psi_gap = std::numeric_limits<double>::quiet_NaN();
      rec.certified_floor = std::numeric_limits<double>::quiet_NaN();
    }
    result.iters.push_back(rec);
    result.y = state.y;
    result.final_F = F_y;
    if (callback) callback(state, rec);

    if (config.target_gap > 0.0) {
      double gap_bound = std::numeric_limits<double>::infinity();
      if (problem.f_star) {
        gap_bound = F_y - *problem.f_star;
      } else if (problem.uc) {
        const double r = problem.uc->r;
        const double sr = problem.uc->sigma_r;
        gap_bound = (r - 1.0) / r * std::pow(1.0 / sr, 1.0 / (r - 1.0)) *
                    std::pow(w.norm(), r / (r - 1.0));
      }
      if (gap_bound <= config.target_gap) {
        result.status = RunStatus::converged;
        break;
      }
    }
  }
  return result;
}

}  // namespace accel

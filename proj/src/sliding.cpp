#include "accel/sliding.hpp"

#include <cmath>

namespace accel {

namespace {

// The step subproblem as a composite instance of its own: the heavy part g
// becomes the smooth term (billed to the g ledger at the inner level) and the
// outer model plus regularizer becomes an exactly solvable quadratic tail.
CompositeProblem make_inner_problem(const CompositeProblem& base, const Vector& xt,
                                    const Vector& grad_f_xt, double Hf, OracleLedger* ledger) {
  CompositeProblem inner;
  inner.dim = base.dim;
  inner.kind = "sliding-subproblem";

  const FunctionPart* g = &base.g;
  inner.f.value = [g, ledger](const Vector& u) {
    if (ledger) ledger->add(Level::inner, Part::g, Kind::value);
    return g->value(u);
  };
  inner.f.grad = [g, ledger](const Vector& u) {
    if (ledger) ledger->add(Level::inner, Part::g, Kind::full_grad);
    return g->grad(u);
  };
  if (g->coord_grad) {
    inner.f.coord_grad = [g, ledger](const Vector& u, int i) {
      if (ledger) ledger->add(Level::inner, Part::g, Kind::coord_grad);
      return g->coord_grad(u, i);
    };
  }
  inner.f.coord_lip = g->coord_lip;
  inner.f.lip1 = g->lip1;
  if (std::isfinite(g->lip1)) inner.lip_f[1] = g->lip1;

  QuadraticForm tail;
  tail.Q = Matrix::Identity(base.dim, base.dim) * Hf;
  tail.b = grad_f_xt - Hf * xt;
  tail.c = 0.0;
  inner.g.quadratic = tail;
  inner.g.value = [tail](const Vector& u) { return tail.value(u); };
  inner.g.grad = [tail](const Vector& u) { return tail.gradient(u); };
  inner.g.coord_grad = [tail](const Vector& u, int i) { return tail.Q.row(i).dot(u) + tail.b[i]; };
  inner.g.coord_lip = Vector::Constant(base.dim, Hf);
  inner.g.lip1 = Hf;

  inner.uc = UcInfo{2.0, Hf};
  return inner;
}

}  // namespace

SlidingResult sliding_run(const CompositeProblem& problem, const SlidingConfig& config,
                          const Vector& x0, OracleLedger* ledger, const IterCallback& callback) {
  if (x0.size() != problem.dim) throw contract_error("start point dimension mismatch");
  if (!(config.Hf > 0.0)) throw contract_error("outer constant must be positive");
  if (problem.f.is_zero) throw contract_error("outer loop needs a smooth f part");

  const bool closed_form = problem.g.is_zero || (config.exact_inner && problem.g.quadratic);
  double Hg = config.Hg;
  double lip1_g = problem.g.is_zero ? 0.0 : problem.g.lip1;
  if (!closed_form) {
    if (!std::isfinite(lip1_g) || !(lip1_g > 0.0))
      throw contract_error("inner runs need a gradient Lipschitz bound for g");
    if (!(Hg > 0.0)) Hg = config.hg_factor * 2.0 * lip1_g;
  }

  const double Hf = config.Hf;
  const double lambda = 0.5 / Hf;
  const double rho = Hf / (3.0 * Hf + 2.0 * (std::isfinite(lip1_g) ? lip1_g : 0.0));
  const double surrogate_coef = Hf * rho / (1.0 + rho);

  SlidingResult result;
  result.y = x0;
  result.status = config.target_gap > 0.0 ? RunStatus::budget_exhausted : RunStatus::completed;

  double A = 0.0;
  Vector x = x0, y = x0;
  long inner_cum = 0;

  for (long k = 0; k < config.outer_iters; ++k) {
    const auto [a_next, A_next] = momentum_update(A, lambda);
    const Vector xt = extrapolate(A, a_next, y, x);
    const Vector c = eval_grad(problem, Term::f, xt, ledger, Level::outer);

    Vector z;
    long sub_iters = 0;
    if (closed_form) {
      TaylorModel model;
      model.order = 1;
      model.center = xt;
      model.f_center = 0.0;
      model.grad_center = c;
      model.reg_H = Hf;
      z = solve_sub_p1(model, problem, ledger, Level::outer).y;
    } else {
      CompositeProblem inner = make_inner_problem(problem, xt, c, Hf, ledger);
      RestartSchedule sched;
      sched.p = 1;
      sched.H = Hg;
      sched.r = 2.0;
      sched.sigma_r = Hf;

      Vector gz = eval_grad(problem, Term::g, xt, ledger, Level::inner);
      Vector resid = c + gz;  // ∇Φ(x̃), the tail gradient vanishes at x̃
      sched.R0 = std::max(resid.norm() / Hf, 1e-15);

      z = xt;
      bool met = resid.norm() <= 1e-15;
      AmConfig inner_cfg;
      inner_cfg.p = 1;
      inner_cfg.H = Hg;
      inner_cfg.criterion = StepCriterion::exact;
      inner_cfg.diagnostics = false;
      const Subsolver inner_sub = Subsolver::closed_form();

      for (long s = 0; s < config.inner_stage_cap && !met; ++s) {
        inner_cfg.max_iters = std::min<long>(nk_schedule(static_cast<int>(s), sched),
                                             config.inner_budget - sub_iters);
        if (inner_cfg.max_iters <= 0) break;
        AmResult stage = am_run(inner, inner_cfg, z, inner_sub, nullptr);
        z = stage.y;
        sub_iters += static_cast<long>(stage.iters.size());
        gz = eval_grad(problem, Term::g, z, ledger, Level::inner);
        resid = c + gz + Hf * (z - xt);
        met = resid.norm() <= surrogate_coef * (xt - z).norm();
        if (stage.status == RunStatus::converged && !met) {
          // inner iterates collapsed; the subproblem is solved to roundoff
          met = true;
        }
      }
      if (!met) {
        result.note = "subproblem stage budget exhausted before the stopping rule held";
        result.status = RunStatus::budget_exhausted;
        return result;
      }
    }

    const Vector g_implicit = -c - Hf * (z - xt);
    const Vector gf = eval_grad(problem, Term::f, z, ledger, Level::outer);
    const Vector w = gf + g_implicit;

    x = gradient_step(x, a_next, w);
    y = z;
    A = A_next;
    inner_cum += sub_iters;
    result.inner_total = inner_cum;

    IterRecord rec;
    rec.k = k + 1;
    rec.A = A;
    rec.lambda = lambda;
    rec.F_y = eval_value(problem, Term::F, y, ledger, Level::outer);
    rec.eta = 0.5;
    rec.sigma_residual = sigma_residual(y, xt, lambda, c, g_implicit);
    rec.resolve_count = 1;
    rec.inner_iters = sub_iters;
    rec.inner_cum = inner_cum;
    rec.psi_gap = std::numeric_limits<double>::quiet_NaN();
    rec.certified_floor = std::numeric_limits<double>::quiet_NaN();
    result.iters.push_back(rec);
    result.y = y;

    if (callback) {
      AmState state;
      state.k = rec.k;
      state.A = A;
      state.x = x;
      state.y = y;
      state.lambda_last = lambda;
      callback(state, rec);
    }

    if (config.target_gap > 0.0) {
      double bound = std::numeric_limits<double>::infinity();
      if (problem.f_star) {
        bound = rec.F_y - *problem.f_star;
      } else if (problem.uc) {
        const double r = problem.uc->r;
        bound = (r - 1.0) / r * std::pow(1.0 / problem.uc->sigma_r, 1.0 / (r - 1.0)) *
                std::pow(w.norm(), r / (r - 1.0));
      }
      if (bound <= config.target_gap) {
        result.status = RunStatus::converged;
        break;
      }
    }
  }
  return result;
}

}  // namespace accel

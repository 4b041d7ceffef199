#include "accel/subsolver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace accel {

namespace {

class GradientDescentInner final : public InnerSolver {
public:
  bool minimize(const InnerObjective& obj, Vector& y, const std::function<bool(const Vector&)>& stop,
                long budget, long& iters) override {
    iters = 0;
    if (stop(y)) return true;
    const bool have_lip = std::isfinite(obj.lip1) && obj.lip1 > 0.0;
    double step = have_lip ? 1.0 / obj.lip1 : 1.0;
    for (; iters < budget;) {
      const Vector g = obj.grad(y);
      if (have_lip) {
        y -= step * g;
      } else {
        const double base = obj.value(y);
        const double gg = g.squaredNorm();
        double t = step;
        Vector trial = y - t * g;
        while (obj.value(trial) > base - 0.5 * t * gg && t > 1e-18) {
          t *= 0.5;
          trial = y - t * g;
        }
        y = trial;
        step = std::min(2.0 * t, 1e18);
      }
      ++iters;
      if (stop(y)) return true;
    }
    return false;
  }
  std::string name() const override { return "gd"; }
};

class ExactQuadraticInner final : public InnerSolver {
public:
  bool minimize(const InnerObjective& obj, Vector& y, const std::function<bool(const Vector&)>& stop,
                long /*budget*/, long& iters) override {
    if (!obj.quadratic)
      throw contract_error("exact inner solver needs an explicit quadratic subproblem");
    y = obj.quadratic->Q.ldlt().solve(-obj.quadratic->b);
    iters = 1;
    return stop(y);
  }
  std::string name() const override { return "exact"; }
};

void check_model_problem(const TaylorModel& model, const CompositeProblem& problem) {
  if (model.center.size() != problem.dim) throw contract_error("model/problem dimension mismatch");
  if (!(model.reg_H > 0.0)) throw contract_error("model regularizer must be positive");
}

// Scalar dual for the order-2 step: with eigenpairs B = U diag(w) Uᵀ and
// z = Uᵀc, the displacement norm is φ(r) = ‖(diag(w) + (H/2)r)⁻¹ z‖ and the
// step solves r = φ(r), which has a unique root since φ decreases.
struct ScalarDual {
  Vector w;  // eigenvalues
  Vector z;
  double H;

  double phi(double r) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double d = w[i] + 0.5 * H * r;
      s += (z[i] / d) * (z[i] / d);
    }
    return std::sqrt(s);
  }
};

}  // namespace

std::unique_ptr<InnerSolver> make_gradient_descent_inner() {
  return std::make_unique<GradientDescentInner>();
}

std::unique_ptr<InnerSolver> make_exact_quadratic_inner() {
  return std::make_unique<ExactQuadraticInner>();
}

SubSolution solve_sub_p1(const TaylorModel& model, const CompositeProblem& problem,
                         OracleLedger* ledger, Level level) {
  check_model_problem(model, problem);
  if (model.order != 1) throw contract_error("order-1 solver got a different model order");
  const double H = model.reg_H;
  const Vector& xt = model.center;
  const Vector& c = model.grad_center;
  const FunctionPart& g = problem.g;

  SubSolution sol;
  sol.exact = true;
  sol.inner_iters = 0;

  if (g.is_zero) {
    sol.y = xt - c / H;
    sol.grad_norm = (c + H * (sol.y - xt)).norm();
  } else if (g.quadratic) {
    const QuadraticForm& q = *g.quadratic;
    Matrix lhs = q.Q;
    lhs.diagonal().array() += H;
    sol.y = lhs.ldlt().solve(H * xt - c - q.b);
    sol.grad_norm = (c + q.gradient(sol.y) + H * (sol.y - xt)).norm();
  } else if (g.prox) {
    sol.y = g.prox(xt - c / H, 1.0 / H);
    if (ledger) ledger->add(level, Part::g, Kind::full_grad);
    sol.grad_norm = 0.0;  // prox optimality is exact by construction
  } else {
    throw contract_error("g has neither prox nor quadratic structure; use an inner solver");
  }

  if (sol.grad_norm > 1e-9 * (1.0 + c.norm()))
    throw invariant_error("order-1 step left a stationarity residual");
  return sol;
}

SubSolution solve_sub_p2(const TaylorModel& model, const CompositeProblem& problem,
                         OracleLedger* ledger, Level level) {
  (void)ledger;
  (void)level;
  check_model_problem(model, problem);
  if (model.order != 2) throw contract_error("order-2 solver got a different model order");
  const FunctionPart& g = problem.g;
  if (!g.is_zero && !g.quadratic)
    throw contract_error("order-2 step needs g zero or quadratic");

  const double H = model.reg_H;
  const Vector& xt = model.center;
  Matrix B = model.hess_center;
  Vector c = model.grad_center;
  if (g.quadratic) {
    B += g.quadratic->Q;
    c += g.quadratic->gradient(xt);
  }

  SubSolution sol;
  sol.exact = true;

  Eigen::SelfAdjointEigenSolver<Matrix> es(B);
  const Vector& w = es.eigenvalues();
  const double wmax = std::max(1.0, w.maxCoeff());
  if (w.minCoeff() < -1e-9 * wmax)
    throw invariant_error("folded subproblem matrix is not positive semidefinite");

  const double cnorm = c.norm();
  if (cnorm == 0.0) {
    sol.y = xt;
    sol.grad_norm = 0.0;
    return sol;
  }

  ScalarDual dual{w, es.eigenvectors().transpose() * c, H};
  double lo = 0.0;
  double hi = std::sqrt(2.0 * cnorm / H);
  if (dual.phi(hi) > hi) throw invariant_error("order-2 scalar bracket failed");
  // r − φ(r) increases; bisect to 1e−12 relative width
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - dual.phi(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double r = 0.5 * (lo + hi);

  Matrix lhs = B;
  lhs.diagonal().array() += 0.5 * H * r;
  const Vector step = lhs.ldlt().solve(-c);
  sol.y = xt + step;
  sol.grad_norm = (c + B * step + 0.5 * H * step.norm() * step).norm();
  if (sol.grad_norm > 1e-9 * (1.0 + cnorm))
    throw invariant_error("order-2 step left a stationarity residual");
  return sol;
}

InnerObjective make_subproblem_objective(const TaylorModel& model,
                                         const CompositeProblem& problem, OracleLedger* ledger) {
  check_model_problem(model, problem);
  InnerObjective obj;
  obj.dim = problem.dim;
  const TaylorModel* m = &model;
  const CompositeProblem* pr = problem.g.is_zero ? nullptr : &problem;

  obj.value = [m, pr, ledger](const Vector& y) {
    double v = m->full_value(y);
    if (pr) v += eval_value(*pr, Term::g, y, ledger, Level::inner);
    return v;
  };
  obj.grad = [m, pr, ledger](const Vector& y) {
    Vector v = m->full_gradient(y);
    if (pr) v += eval_grad(*pr, Term::g, y, ledger, Level::inner);
    return v;
  };
  const bool g_coord = pr && pr->g.coord_grad;
  if (g_coord || !pr) {
    obj.coord_grad = [m, pr, ledger](const Vector& y, int i) {
      double v = m->grad_center[i];
      if (m->order == 2) v += m->hess_center.row(i).dot(y - m->center);
      const Vector d = y - m->center;
      v += m->reg_H / factorial(m->order) * std::pow(d.norm(), m->order - 1) * d[i];
      if (pr) v += eval_coord_grad(*pr, Term::g, y, i, ledger, Level::inner);
      return v;
    };
  }

  if (model.order == 1) {
    obj.mu = model.reg_H;
    if (!pr) {
      obj.lip1 = model.reg_H;
      obj.coord_lip = Vector::Constant(problem.dim, model.reg_H);
    } else if (std::isfinite(problem.g.lip1)) {
      obj.lip1 = problem.g.lip1 + model.reg_H;
      if (problem.g.coord_lip.size() == problem.dim)
        obj.coord_lip = problem.g.coord_lip.array() + model.reg_H;
    }
    if (!pr || problem.g.quadratic) {
      QuadraticForm q;
      if (pr) {
        q = *problem.g.quadratic;
      } else {
        q.Q = Matrix::Zero(problem.dim, problem.dim);
        q.b = Vector::Zero(problem.dim);
      }
      q.Q.diagonal().array() += model.reg_H;
      q.b += model.grad_center - model.reg_H * model.center;
      obj.quadratic = q;
    }
  }
  return obj;
}

bool criterion_check(InexactCriterion kind, const CriterionContext& ctx) {
  switch (kind) {
    case InexactCriterion::grad_ratio: {
      if (ctx.model_grad.size() == 0 || ctx.full_grad.size() == 0)
        throw contract_error("criterion 6 needs model and full gradients");
      const double coef = 1.0 / (4.0 * ctx.p * (ctx.p + 1));
      return ctx.model_grad.norm() <= coef * ctx.full_grad.norm();
    }
    case InexactCriterion::contraction: {
      if (ctx.model_grad.size() == 0 || ctx.xt.size() == 0 || ctx.yt.size() == 0)
        throw contract_error("criterion 8 needs the model gradient and both points");
      const double rho = ctx.H / (3.0 * ctx.H + 2.0 * ctx.lip1_g);
      return ctx.model_grad.norm() <= ctx.H * rho / (1.0 + rho) * (ctx.xt - ctx.yt).norm();
    }
    case InexactCriterion::sigma_residual: {
      if (ctx.model_grad.size() == 0 || ctx.xt.size() == 0 || ctx.yt.size() == 0)
        throw contract_error("criterion 11 needs the model gradient and both points");
      if (!(ctx.lambda > 0.0)) throw contract_error("criterion 11 needs a step size");
      const Vector d = ctx.yt - ctx.xt;
      const double dist = d.norm();
      const Vector reg =
          ctx.H / factorial(ctx.p) * std::pow(dist, ctx.p - 1) * d;
      const double resid = (d + ctx.lambda * (ctx.model_grad - reg)).norm();
      return resid <= ctx.sigma * dist + 1e-9 * (1.0 + dist);
    }
  }
  throw contract_error("unknown criterion kind");
}

SubSolution solve_sub_inner(const SubproblemSpec& spec, InnerSolver& inner,
                            OracleLedger* ledger) {
  if (!spec.model || !spec.problem) throw contract_error("subproblem spec is incomplete");
  const TaylorModel& model = *spec.model;
  const CompositeProblem& problem = *spec.problem;
  check_model_problem(model, problem);
  if (!problem.g.is_zero && !problem.g.grad && !problem.g.coord_grad)
    throw contract_error("inner solve needs gradient access to g");

  InnerObjective obj = make_subproblem_objective(model, problem, ledger);

  const double lip1_g =
      problem.g.is_zero ? 0.0 : (std::isfinite(problem.g.lip1) ? problem.g.lip1 : 0.0);

  Vector last_model_grad;
  auto stop = [&](const Vector& y) {
    CriterionContext ctx;
    ctx.p = model.order;
    ctx.H = model.reg_H;
    ctx.lip1_g = lip1_g;
    ctx.sigma = spec.sigma;
    ctx.lambda = spec.lambda;
    ctx.xt = model.center;
    ctx.yt = y;
    ctx.model_grad = obj.grad(y);
    last_model_grad = ctx.model_grad;
    if (spec.criterion == InexactCriterion::grad_ratio)
      ctx.full_grad = eval_grad(problem, Term::f, y, ledger, Level::inner) +
                      (problem.g.is_zero ? Vector::Zero(problem.dim)
                                         : eval_grad(problem, Term::g, y, ledger, Level::inner));
    return criterion_check(spec.criterion, ctx);
  };

  SubSolution sol;
  sol.y = model.center;
  sol.exact = false;
  sol.criterion_met = inner.minimize(obj, sol.y, stop, spec.inner_budget, sol.inner_iters);
  sol.grad_norm = last_model_grad.size() > 0 ? last_model_grad.norm() : obj.grad(sol.y).norm();
  return sol;
}

}  // namespace accel

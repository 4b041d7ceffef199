#include "accel/baselines.hpp"

#include <cmath>

#include "accel/rng.hpp"

namespace accel {

AmResult fgm_run(const CompositeProblem& problem, double L, const Vector& x0, long iters,
                 OracleLedger* ledger, double target_gap, const IterCallback& callback) {
  if (!(L > 0.0)) throw contract_error("gradient Lipschitz constant must be positive");
  if (x0.size() != problem.dim) throw contract_error("start point dimension mismatch");

  const double lambda = 1.0 / L;
  double A = 0.0;
  Vector y = x0, v = x0;

  AmResult result;
  result.y = x0;
  result.status = target_gap > 0.0 ? RunStatus::budget_exhausted : RunStatus::completed;

  AmState state;  // exposed to the callback for A_k-based certified bounds
  state.x = v;
  state.y = y;

  for (long k = 0; k < iters; ++k) {
    const auto [a, A_next] = momentum_update(A, lambda);
    const Vector xt = extrapolate(A, a, y, v);
    const Vector grad = grad_F(problem, xt, ledger, Level::outer);
    y = xt - grad / L;
    v -= a * grad;
    A = A_next;
    if (!y.allFinite()) throw invariant_error("iterate diverged");

    IterRecord rec;
    rec.k = k + 1;
    rec.A = A;
    rec.lambda = lambda;
    rec.F_y = eval_value(problem, Term::F, y, ledger, Level::outer);
    rec.eta = std::numeric_limits<double>::quiet_NaN();
    rec.sigma_residual = std::numeric_limits<double>::quiet_NaN();
    rec.psi_gap = std::numeric_limits<double>::quiet_NaN();
    rec.certified_floor = std::numeric_limits<double>::quiet_NaN();
    result.iters.push_back(rec);
    result.y = y;
    result.final_F = rec.F_y;

    if (callback) {
      state.k = k + 1;
      state.A = A;
      state.x = v;
      state.y = y;
      callback(state, rec);
    }
    if (target_gap > 0.0 && problem.f_star && rec.F_y - *problem.f_star <= target_gap) {
      result.status = RunStatus::converged;
      break;
    }
  }
  return result;
}

Vector acdm_probabilities(const Vector& coord_lip, double beta) {
  if (coord_lip.size() == 0) throw contract_error("sampling needs coordinate constants");
  Vector q(coord_lip.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < coord_lip.size(); ++i) {
    if (!(coord_lip[i] > 0.0))
      throw contract_error("sampled coordinates need positive Lipschitz constants");
    q[i] = std::pow(coord_lip[i], beta);
    total += q[i];
  }
  return q / total;
}

AcdmResult acdm_run(const InnerObjective& objective, const AcdmConfig& config, const Vector& x0,
                    const std::function<bool(const Vector&)>& stop) {
  if (!objective.coord_grad) throw contract_error("coordinate method needs coordinate gradients");
  const Vector& lip = config.coord_lip.size() > 0 ? config.coord_lip : objective.coord_lip;
  if (lip.size() != x0.size()) throw contract_error("coordinate constants missing or mismatched");

  const int d = static_cast<int>(x0.size());
  const Vector q = acdm_probabilities(lip, config.beta);
  const double S = lip.array().pow(config.beta).sum();
  Vector V(d);
  for (int i = 0; i < d; ++i) V[i] = std::pow(lip[i], 1.0 - 2.0 * config.beta) * S * S;

  std::vector<double> cum(static_cast<std::size_t>(d));
  double acc = 0.0;
  for (int i = 0; i < d; ++i) {
    acc += q[i];
    cum[static_cast<std::size_t>(i)] = acc;
  }

  Rng rng(config.seed);
  const int cadence = config.check_every > 0 ? config.check_every : d;

  AcdmResult result;
  double A = 0.0;
  Vector x = x0, v = x0;

  if (stop && stop(x)) {
    result.y = x;
    result.status = RunStatus::converged;
    return result;
  }

  for (long t = 0; t < config.budget; ++t) {
    const double a = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * A));
    const double A_next = A + a;
    const Vector y = (A / A_next) * x + (a / A_next) * v;
    const auto i = static_cast<int>(rng.sample_cumulative(cum));
    const double gi = objective.coord_grad(y, i);
    x = y;
    x[i] -= gi / lip[i];
    v[i] -= a * gi / (q[i] * V[i]);
    A = A_next;
    ++result.coord_steps;

    if (stop && (t + 1) % cadence == 0 && stop(x)) {
      result.y = x;
      result.status = RunStatus::converged;
      return result;
    }
  }
  result.y = x;
  result.status = stop ? RunStatus::budget_exhausted : RunStatus::completed;
  return result;
}

bool AcdmInner::minimize(const InnerObjective& objective, Vector& y,
                         const std::function<bool(const Vector&)>& stop, long budget,
                         long& iters) {
  AcdmConfig config;
  config.beta = beta_;
  // decorrelate successive invocations while staying reproducible per run
  config.seed = seed_ + 0x9e3779b97f4a7c15ull * (++invocation_);
  config.budget = budget;
  config.check_every = check_every_;
  const AcdmResult result = acdm_run(objective, config, y, stop);
  y = result.y;
  iters = result.coord_steps;
  return result.status == RunStatus::converged;
}

InnerObjective make_ms_objective(const CompositeProblem& problem, const Vector& xt, double L,
                                 OracleLedger* ledger) {
  InnerObjective obj;
  obj.dim = problem.dim;
  const CompositeProblem* pr = &problem;
  const Vector center = xt;

  obj.value = [pr, center, L, ledger](const Vector& u) {
    return eval_value(*pr, Term::F, u, ledger, Level::inner) + L * (u - center).squaredNorm();
  };
  obj.grad = [pr, center, L, ledger](const Vector& u) {
    Vector g = eval_grad(*pr, Term::f, u, ledger, Level::inner);
    if (!pr->g.is_zero) g += eval_grad(*pr, Term::g, u, ledger, Level::inner);
    return Vector(g + 2.0 * L * (u - center));
  };
  const bool coords = problem.f.coord_grad && (problem.g.is_zero || problem.g.coord_grad);
  if (coords) {
    obj.coord_grad = [pr, center, L, ledger](const Vector& u, int i) {
      double v = eval_coord_grad(*pr, Term::f, u, i, ledger, Level::inner);
      if (!pr->g.is_zero) v += eval_coord_grad(*pr, Term::g, u, i, ledger, Level::inner);
      return v + 2.0 * L * (u[i] - center[i]);
    };
  }

  const bool f_lip = problem.f.coord_lip.size() == problem.dim;
  const bool g_lip = problem.g.is_zero || problem.g.coord_lip.size() == problem.dim;
  if (f_lip && g_lip) {
    obj.coord_lip = problem.f.coord_lip;
    if (!problem.g.is_zero) obj.coord_lip += problem.g.coord_lip;
    obj.coord_lip.array() += 2.0 * L;
  }
  if (std::isfinite(problem.f.lip1)) {
    const double g1 = problem.g.is_zero ? 0.0 : problem.g.lip1;
    if (problem.g.is_zero || std::isfinite(g1)) obj.lip1 = problem.f.lip1 + g1 + 2.0 * L;
  }
  obj.mu = 2.0 * L;

  if (problem.f.quadratic && (problem.g.is_zero || problem.g.quadratic)) {
    QuadraticForm q = *problem.f.quadratic;
    if (problem.g.quadratic) {
      q.Q += problem.g.quadratic->Q;
      q.b += problem.g.quadratic->b;
      q.c += problem.g.quadratic->c;
    }
    q.Q.diagonal().array() += 2.0 * L;
    q.b -= 2.0 * L * center;
    obj.quadratic = q;
  }
  return obj;
}

InnerObjective make_composite_objective(const CompositeProblem& problem, OracleLedger* ledger,
                                        Level level) {
  InnerObjective obj;
  obj.dim = problem.dim;
  const CompositeProblem* pr = &problem;
  obj.value = [pr, ledger, level](const Vector& u) {
    return eval_value(*pr, Term::F, u, ledger, level);
  };
  obj.grad = [pr, ledger, level](const Vector& u) {
    Vector g = eval_grad(*pr, Term::f, u, ledger, level);
    if (!pr->g.is_zero) g += eval_grad(*pr, Term::g, u, ledger, level);
    return g;
  };
  const bool coords = problem.f.coord_grad && (problem.g.is_zero || problem.g.coord_grad);
  if (coords) {
    obj.coord_grad = [pr, ledger, level](const Vector& u, int i) {
      double v = eval_coord_grad(*pr, Term::f, u, i, ledger, level);
      if (!pr->g.is_zero) v += eval_coord_grad(*pr, Term::g, u, i, ledger, level);
      return v;
    };
  }
  if (problem.f.coord_lip.size() == problem.dim &&
      (problem.g.is_zero || problem.g.coord_lip.size() == problem.dim)) {
    obj.coord_lip = problem.f.coord_lip;
    if (!problem.g.is_zero) obj.coord_lip += problem.g.coord_lip;
  }
  return obj;
}

AmResult ms_run(const CompositeProblem& problem, double L, InnerSolver& inner, const Vector& x0,
                const MsConfig& config, OracleLedger* ledger, const IterCallback& callback) {
  if (!(L > 0.0)) throw contract_error("proximal constant must be positive");
  if (x0.size() != problem.dim) throw contract_error("start point dimension mismatch");

  const double lambda = 0.5 / L;
  double A = 0.0;
  Vector x = x0, y = x0;

  AmResult result;
  result.y = x0;
  result.status = config.target_gap > 0.0 ? RunStatus::budget_exhausted : RunStatus::completed;

  AmState state;
  long inner_cum = 0;

  for (long k = 0; k < config.outer_iters; ++k) {
    const auto [a, A_next] = momentum_update(A, lambda);
    const Vector xt = extrapolate(A, a, y, x);
    InnerObjective sub = make_ms_objective(problem, xt, L, ledger);

    Vector grad_at_y;  // ∇F at the accepted point, reused for the dual update
    double resid_ratio = 0.0;
    auto stop = [&](const Vector& u) {
      Vector g = eval_grad(problem, Term::f, u, ledger, Level::inner);
      if (!problem.g.is_zero) g += eval_grad(problem, Term::g, u, ledger, Level::inner);
      const double dist = (u - xt).norm();
      const double resid = (u - xt + lambda * g).norm();
      if (resid <= config.sigma * dist + 1e-9 * (1.0 + dist)) {
        grad_at_y = g;
        resid_ratio = dist > 0.0 ? resid / dist : 0.0;
        return true;
      }
      return false;
    };

    Vector u = xt;
    long iters = 0;
    const bool met = inner.minimize(sub, u, stop, config.inner_budget, iters);
    if (!met) {
      result.note = "inner solver budget exhausted before the residual test held";
      result.status = RunStatus::budget_exhausted;
      break;
    }

    y = u;
    x = gradient_step(x, a, grad_at_y);
    A = A_next;
    inner_cum += iters;

    IterRecord rec;
    rec.k = k + 1;
    rec.A = A;
    rec.lambda = lambda;
    rec.F_y = eval_value(problem, Term::F, y, ledger, Level::outer);
    rec.eta = std::numeric_limits<double>::quiet_NaN();
    rec.sigma_residual = resid_ratio;
    rec.inner_iters = iters;
    rec.inner_cum = inner_cum;
    rec.psi_gap = std::numeric_limits<double>::quiet_NaN();
    rec.certified_floor = std::numeric_limits<double>::quiet_NaN();
    result.iters.push_back(rec);
    result.y = y;
    result.final_F = rec.F_y;

    if (callback) {
      state.k = k + 1;
      state.A = A;
      state.x = x;
      state.y = y;
      callback(state, rec);
    }
    if (config.target_gap > 0.0 && problem.f_star &&
        rec.F_y - *problem.f_star <= config.target_gap) {
      result.status = RunStatus::converged;
      break;
    }
  }
  return result;
}

}  // namespace accel

#include "accel/problem.hpp"

#include <cmath>

namespace accel {

namespace {

const FunctionPart& part_of(const CompositeProblem& problem, Term term) {
  if (term == Term::f) return problem.f;
  if (term == Term::g) return problem.g;
  throw contract_error("term F has no single oracle; use the f/g parts");
}

Part ledger_part(Term term) { return term == Term::f ? Part::f : Part::g; }

void check_dim(const CompositeProblem& problem, const Vector& x) {
  if (x.size() != problem.dim) throw contract_error("argument dimension mismatch");
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw invariant_error(std::string(what) + " returned a non-finite value");
}

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw invariant_error(std::string(what) + " returned a non-finite value");
}

}  // namespace

double eval_value(const CompositeProblem& problem, Term term, const Vector& x,
                  OracleLedger* ledger, Level level) {
  check_dim(problem, x);
  if (term == Term::F) {
    return eval_value(problem, Term::f, x, ledger, level) +
           eval_value(problem, Term::g, x, ledger, level);
  }
  const FunctionPart& part = part_of(problem, term);
  if (part.is_zero) return 0.0;
  if (!part.value) throw contract_error("part lacks a value oracle");
  const double v = part.value(x);
  check_finite(v, "value oracle");
  if (ledger) ledger->add(level, ledger_part(term), Kind::value);
  return v;
}

Vector eval_grad(const CompositeProblem& problem, Term term, const Vector& x,
                 OracleLedger* ledger, Level level) {
  check_dim(problem, x);
  const FunctionPart& part = part_of(problem, term);
  if (part.is_zero) return Vector::Zero(problem.dim);
  if (!part.grad) throw contract_error("part lacks a gradient oracle");
  Vector g = part.grad(x);
  check_finite(g, "gradient oracle");
  if (ledger) ledger->add(level, ledger_part(term), Kind::full_grad);
  return g;
}

double eval_coord_grad(const CompositeProblem& problem, Term term, const Vector& x, int i,
                       OracleLedger* ledger, Level level) {
  check_dim(problem, x);
  if (i < 0 || i >= problem.dim) throw contract_error("coordinate index out of range");
  const FunctionPart& part = part_of(problem, term);
  if (part.is_zero) return 0.0;
  if (!part.coord_grad) throw contract_error("part lacks a coordinate gradient oracle");
  const double v = part.coord_grad(x, i);
  check_finite(v, "coordinate gradient oracle");
  if (ledger) ledger->add(level, ledger_part(term), Kind::coord_grad);
  return v;
}

Matrix eval_hess(const CompositeProblem& problem, Term term, const Vector& x,
                 OracleLedger* ledger, Level level) {
  check_dim(problem, x);
  const FunctionPart& part = part_of(problem, term);
  if (part.is_zero) return Matrix::Zero(problem.dim, problem.dim);
  if (!part.hess) throw contract_error("part lacks a Hessian oracle");
  Matrix h = part.hess(x);
  if (!h.allFinite()) throw invariant_error("Hessian oracle returned a non-finite value");
  if (ledger) ledger->add(level, ledger_part(term), Kind::hessian);
  return h;
}

Vector grad_F(const CompositeProblem& problem, const Vector& x, OracleLedger* ledger,
              Level level) {
  Vector g = eval_grad(problem, Term::f, x, ledger, level);
  if (!problem.g.is_zero) g += eval_grad(problem, Term::g, x, ledger, level);
  return g;
}

double estimate_lf(const SparseMatrix& A) {
  double best = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) s += it.value() * it.value();
    best = std::max(best, s);
  }
  return best;
}

double fd_check_grad(const CompositeProblem& problem, Term term, const Vector& x, double h) {
  if (h <= 0.0) throw contract_error("fd step must be positive");
  const FunctionPart& part = part_of(problem, term);
  if (part.is_zero) return 0.0;
  if (!part.value || !part.grad) throw contract_error("fd check needs value and gradient oracles");

  const Vector g = part.grad(x);
  double worst = 0.0;
  Vector xp = x, xm = x;
  for (int i = 0; i < problem.dim; ++i) {
    const double step = h * (1.0 + std::abs(x[i]));
    xp[i] = x[i] + step;
    xm[i] = x[i] - step;
    const double fd = (part.value(xp) - part.value(xm)) / (2.0 * step);
    xp[i] = x[i];
    xm[i] = x[i];
    const double err = std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace accel

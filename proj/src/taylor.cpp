#include "accel/taylor.hpp"

#include <cmath>

namespace accel {

double TaylorModel::value(const Vector& y) const {
  const Vector d = y - center;
  double v = f_center + grad_center.dot(d);
  if (order == 2) v += 0.5 * d.dot(hess_center * d);
  return v;
}

Vector TaylorModel::gradient(const Vector& y) const {
  if (order == 2) return grad_center + hess_center * (y - center);
  return grad_center;
}

double TaylorModel::reg_value(const Vector& y) const {
  const double d = (y - center).norm();
  return reg_H / factorial(order + 1) * std::pow(d, order + 1);
}

Vector TaylorModel::reg_gradient(const Vector& y) const {
  const Vector d = y - center;
  if (order == 1) return reg_H * d;
  return (reg_H / factorial(order)) * std::pow(d.norm(), order - 1) * d;
}

TaylorModel build_taylor_model(const CompositeProblem& problem, int p, const Vector& center,
                               double H, OracleLedger* ledger, Level level) {
  if (p != 1 && p != 2) throw contract_error("model order must be 1 or 2");
  if (H <= 0.0) throw contract_error("regularizer constant must be positive");
  TaylorModel model;
  model.order = p;
  model.center = center;
  model.reg_H = H;
  model.f_center = eval_value(problem, Term::f, center, ledger, level);
  model.grad_center = eval_grad(problem, Term::f, center, ledger, level);
  if (p == 2) model.hess_center = eval_hess(problem, Term::f, center, ledger, level);
  return model;
}

}  // namespace accel

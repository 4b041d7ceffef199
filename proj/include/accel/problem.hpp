#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "accel/ledger.hpp"
#include "accel/types.hpp"

namespace accel {

using json = nlohmann::json;
using SparseMatrix = Eigen::SparseMatrix<double>;

// ½ xᵀQx + bᵀx + c
struct QuadraticForm {
  Matrix Q;
  Vector b;
  double c = 0.0;

  double value(const Vector& x) const { return 0.5 * x.dot(Q * x) + b.dot(x) + c; }
  Vector gradient(const Vector& x) const { return Q * x + b; }
};

// One side of the composite objective. Closures own their data; optional
// structure fields let subproblem solvers exploit what the closures hide.
struct FunctionPart {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
  std::function<Matrix(const Vector&)> hess;
  std::function<double(const Vector&, int)> coord_grad;
  // prox(x, t) = argmin_u { part(u) + 1/(2t) ‖u − x‖² }
  std::function<Vector(const Vector&, double)> prox;

  std::optional<QuadraticForm> quadratic;
  Vector coord_lip;  // size 0 when unknown
  double lip1 = std::numeric_limits<double>::quiet_NaN();
  bool is_zero = false;
  bool smooth = true;
};

// (r, σ_r): F(y) ≥ F(x) + ⟨∇F(x), y−x⟩ + (σ_r/r)·‖y−x‖^r
struct UcInfo {
  double r = 2.0;
  double sigma_r = 0.0;
};

struct CompositeProblem {
  int dim = 0;
  FunctionPart f;
  FunctionPart g;
  std::map<int, double> lip_f;  // order p → L_{p,f}
  std::optional<UcInfo> uc;
  std::optional<Vector> x_star;
  std::optional<double> f_star;  // F(x_star)
  std::string kind;
  json meta;  // generator spec + materialized data; basis of the problem hash

  double lip_f_at(int p) const {
    auto it = lip_f.find(p);
    if (it == lip_f.end()) throw contract_error("no L_" + std::to_string(p) + ",f bound recorded");
    return it->second;
  }
};

enum class Term : int { f = 0, g = 1, F = 2 };

double eval_value(const CompositeProblem& problem, Term term, const Vector& x,
                  OracleLedger* ledger = nullptr, Level level = Level::outer);

Vector eval_grad(const CompositeProblem& problem, Term term, const Vector& x,
                 OracleLedger* ledger = nullptr, Level level = Level::outer);

double eval_coord_grad(const CompositeProblem& problem, Term term, const Vector& x, int i,
                       OracleLedger* ledger = nullptr, Level level = Level::outer);

Matrix eval_hess(const CompositeProblem& problem, Term term, const Vector& x,
                 OracleLedger* ledger = nullptr, Level level = Level::outer);

// ∇f + ∇g, both calls hitting the ledger
Vector grad_F(const CompositeProblem& problem, const Vector& x,
              OracleLedger* ledger = nullptr, Level level = Level::outer);

// max squared column norm of A
double estimate_lf(const SparseMatrix& A);

// Central-difference check of the gradient oracle; componentwise max relative
// error with denominator max(1, |component|). Bypasses the ledger.
double fd_check_grad(const CompositeProblem& problem, Term term, const Vector& x, double h);

}  // namespace accel

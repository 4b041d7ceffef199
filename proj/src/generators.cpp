#include "accel/generators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

#include "accel/rng.hpp"

namespace accel {

namespace {

constexpr int kFormatVersion = 1;

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const json& a) {
  Vector v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Matrix m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i)
    for (Eigen::Index j = 0; j < nc; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

// Shared state for the logsumexp oracles: the matrix-vector product Az is
// cached and refreshed incrementally when only one coordinate of the argument
// moved, which is the access pattern of coordinate-descent inner solvers.
struct LseState {
  SparseMatrix A;          // m × n, compressed columns
  std::mutex mutex;
  Vector x;
  Vector ax;
  Vector softmax;
  double value = 0.0;
  bool valid = false;

  void refresh(const Vector& xnew) {
    if (valid && xnew.size() == x.size()) {
      int changed = -1;
      int count = 0;
      for (Eigen::Index i = 0; i < xnew.size() && count <= 1; ++i) {
        if (xnew[i] != x[i]) {
          changed = static_cast<int>(i);
          ++count;
        }
      }
      if (count == 0) return;
      if (count == 1) {
        const double delta = xnew[changed] - x[changed];
        for (SparseMatrix::InnerIterator it(A, changed); it; ++it)
          ax[it.row()] += delta * it.value();
        x[changed] = xnew[changed];
        finish();
        return;
      }
    }
    x = xnew;
    ax = A * xnew;
    finish();
  }

  void finish() {
    const double zmax = ax.size() > 0 ? ax.maxCoeff() : 0.0;
    softmax = (ax.array() - zmax).exp();
    const double total = softmax.sum();
    softmax /= total;
    value = std::log(total) + zmax;
    valid = true;
  }
};

CompositeProblem assemble_logsumexp_quadratic(const ExperimentSpec& spec,
                                              const std::vector<Eigen::Triplet<double>>& trips,
                                              const Vector& lambda, const Matrix& e_tilde) {
  CompositeProblem problem;
  problem.dim = spec.n;
  problem.kind = "logsumexp-quad";

  auto state = std::make_shared<LseState>();
  state->A.resize(spec.m, spec.n);
  state->A.setFromTriplets(trips.begin(), trips.end());
  state->A.makeCompressed();

  problem.f.value = [state](const Vector& x) {
    std::lock_guard<std::mutex> lock(state->mutex);
    state->refresh(x);
    return state->value;
  };
  problem.f.grad = [state](const Vector& x) {
    std::lock_guard<std::mutex> lock(state->mutex);
    state->refresh(x);
    return Vector(state->A.transpose() * state->softmax);
  };
  problem.f.coord_grad = [state](const Vector& x, int i) {
    std::lock_guard<std::mutex> lock(state->mutex);
    state->refresh(x);
    double v = 0.0;
    for (SparseMatrix::InnerIterator it(state->A, i); it; ++it)
      v += it.value() * state->softmax[it.row()];
    return v;
  };
  problem.f.coord_lip.resize(spec.n);
  for (int j = 0; j < spec.n; ++j) {
    double worst = 0.0;
    for (SparseMatrix::InnerIterator it(state->A, j); it; ++it)
      worst = std::max(worst, it.value() * it.value());
    problem.f.coord_lip[j] = worst;
  }
  problem.f.lip1 = estimate_lf(state->A);
  problem.lip_f[1] = problem.f.lip1;

  Matrix G2 = Matrix::Zero(spec.n, spec.n);
  for (int i = 0; i < spec.n; ++i)
    G2.noalias() += lambda[i] * (e_tilde.col(i) * e_tilde.col(i).transpose());

  QuadraticForm q;
  q.Q = G2;
  q.b = Vector::Zero(spec.n);
  q.c = 0.0;
  problem.g.quadratic = q;
  problem.g.value = [G2](const Vector& x) { return 0.5 * x.dot(G2 * x); };
  problem.g.grad = [G2](const Vector& x) { return Vector(G2 * x); };
  problem.g.hess = [G2](const Vector&) { return G2; };
  problem.g.coord_grad = [G2](const Vector& x, int i) { return G2.row(i).dot(x); };
  problem.g.coord_lip = G2.diagonal();

  Eigen::SelfAdjointEigenSolver<Matrix> es(G2, Eigen::EigenvaluesOnly);
  problem.g.lip1 = es.eigenvalues().maxCoeff();
  const double mu = es.eigenvalues().minCoeff();
  if (mu > 1e-12) problem.uc = UcInfo{2.0, mu};

  json data;
  json rows = json::array(), cols = json::array(), vals = json::array();
  for (const auto& t : trips) {
    rows.push_back(t.row());
    cols.push_back(t.col());
    vals.push_back(t.value());
  }
  data["a_rows"] = std::move(rows);
  data["a_cols"] = std::move(cols);
  data["a_vals"] = std::move(vals);
  data["lambda"] = vector_to_json(lambda);
  data["e_tilde"] = matrix_to_json(e_tilde);

  problem.meta = {{"format_version", kFormatVersion},
                  {"kind", problem.kind},
                  {"spec",
                   {{"n", spec.n},
                    {"m", spec.m},
                    {"density", spec.density},
                    {"seed", spec.seed},
                    {"lambda_mix", spec.lambda_mix}}},
                  {"nnz_a", trips.size()},
                  {"data", std::move(data)}};
  return problem;
}

CompositeProblem assemble_quadratic(int d, double mu, double L, std::uint64_t seed,
                                    const Matrix& Q, const Vector& b) {
  CompositeProblem problem;
  problem.dim = d;
  problem.kind = "quadratic";

  QuadraticForm q;
  q.Q = Q;
  q.b = b;
  q.c = 0.0;
  problem.f.quadratic = q;
  problem.f.value = [q](const Vector& x) { return q.value(x); };
  problem.f.grad = [q](const Vector& x) { return q.gradient(x); };
  problem.f.hess = [q](const Vector&) { return q.Q; };
  problem.f.coord_grad = [q](const Vector& x, int i) { return q.Q.row(i).dot(x) + q.b[i]; };
  problem.f.coord_lip = Q.diagonal();
  problem.f.lip1 = L;
  problem.lip_f[1] = L;
  problem.lip_f[2] = 0.0;

  problem.g.is_zero = true;

  Vector xs = Q.ldlt().solve(-b);
  problem.x_star = xs;
  problem.f_star = q.value(xs);
  problem.uc = UcInfo{2.0, mu};
  problem.meta = {{"format_version", kFormatVersion},
                  {"kind", problem.kind},
                  {"spec", {{"d", d}, {"mu", mu}, {"L", L}, {"seed", seed}}},
                  {"data", {{"q", matrix_to_json(Q)}, {"b", vector_to_json(b)}}}};
  return problem;
}

CompositeProblem assemble_lasso(int d, int m, double reg, std::uint64_t seed, const Matrix& A,
                                const Vector& b) {
  CompositeProblem problem;
  problem.dim = d;
  problem.kind = "lasso";

  const Matrix AtA = A.transpose() * A;
  const Vector Atb = A.transpose() * b;
  problem.f.value = [A, b](const Vector& x) { return 0.5 * (A * x - b).squaredNorm(); };
  problem.f.grad = [AtA, Atb](const Vector& x) { return Vector(AtA * x - Atb); };
  problem.f.hess = [AtA](const Vector&) { return AtA; };
  problem.f.coord_grad = [AtA, Atb](const Vector& x, int i) {
    return AtA.row(i).dot(x) - Atb[i];
  };
  problem.f.coord_lip = AtA.diagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(AtA, Eigen::EigenvaluesOnly);
  problem.f.lip1 = es.eigenvalues().maxCoeff();
  problem.lip_f[1] = problem.f.lip1;

  problem.g.smooth = false;
  problem.g.value = [reg](const Vector& x) { return reg * x.lpNorm<1>(); };
  problem.g.prox = [reg](const Vector& x, double t) {
    const double tau = reg * t;
    Vector y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] > tau)
        y[i] = x[i] - tau;
      else if (x[i] < -tau)
        y[i] = x[i] + tau;
      else
        y[i] = 0.0;
    }
    return y;
  };

  problem.meta = {{"format_version", kFormatVersion},
                  {"kind", problem.kind},
                  {"spec", {{"d", d}, {"m", m}, {"reg", reg}, {"seed", seed}}},
                  {"data", {{"a", matrix_to_json(A)}, {"b", vector_to_json(b)}}}};
  return problem;
}

}  // namespace

CompositeProblem gen_logsumexp_quadratic(const ExperimentSpec& spec) {
  if (spec.n < 1 || spec.m < 1) throw contract_error("instance sizes must be positive");
  if (!(spec.density > 0.0) || spec.density > 1.0)
    throw contract_error("density must lie in (0, 1]");
  if (spec.lambda_mix != "uniform-simplex")
    throw contract_error("unknown lambda_mix rule: " + spec.lambda_mix);

  Rng rng(spec.seed);

  // column-major scan; inclusion and value draws interleaved
  std::vector<Eigen::Triplet<double>> trips;
  for (int j = 0; j < spec.n; ++j) {
    for (int i = 0; i < spec.m; ++i) {
      if (rng.uniform() < spec.density) trips.emplace_back(i, j, rng.uniform(-1.0, 1.0));
    }
  }

  Vector lambda(spec.n);
  for (int i = 0; i < spec.n; ++i) lambda[i] = rng.uniform();
  lambda /= lambda.sum();

  Matrix e_tilde(spec.n, spec.n);
  for (int j = 0; j < spec.n; ++j)
    for (int i = 0; i < spec.n; ++i) e_tilde(i, j) = rng.uniform(1.0, 2.0);

  return assemble_logsumexp_quadratic(spec, trips, lambda, e_tilde);
}

CompositeProblem gen_quadratic(int d, double mu, double L, std::uint64_t seed) {
  if (d < 1) throw contract_error("dimension must be positive");
  if (!(mu > 0.0) || L < mu) throw contract_error("need 0 < mu <= L");

  Rng rng(seed);
  Matrix gauss(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) gauss(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(gauss);
  Matrix U = qr.householderQ();

  Vector ev(d);
  if (d == 1) {
    ev[0] = L;
  } else {
    const double lo = std::log(mu), hi = std::log(L);
    for (int i = 0; i < d; ++i) ev[i] = std::exp(lo + (hi - lo) * i / (d - 1));
    ev[0] = mu;
    ev[d - 1] = L;
  }
  Matrix Q = U * ev.asDiagonal() * U.transpose();
  Q = 0.5 * (Q + Q.transpose());

  Vector x_target(d);
  for (int i = 0; i < d; ++i) x_target[i] = rng.normal();
  Vector b = -(Q * x_target);

  return assemble_quadratic(d, mu, L, seed, Q, b);
}

CompositeProblem gen_quartic(int d) {
  if (d < 1) throw contract_error("dimension must be positive");
  CompositeProblem problem;
  problem.dim = d;
  problem.kind = "quartic";
  problem.f.value = [](const Vector& x) { return 0.25 * x.array().pow(4).sum(); };
  problem.f.grad = [](const Vector& x) { return Vector(x.array().cube()); };
  problem.f.hess = [](const Vector& x) {
    return Matrix(Vector(3.0 * x.array().square()).asDiagonal());
  };
  problem.f.coord_grad = [](const Vector& x, int i) { return x[i] * x[i] * x[i]; };
  problem.g.is_zero = true;
  problem.x_star = Vector::Zero(d);
  problem.f_star = 0.0;
  problem.meta = {{"format_version", kFormatVersion},
                  {"kind", problem.kind},
                  {"spec", {{"d", d}}}};
  return problem;
}

CompositeProblem gen_lasso(int d, int m, double reg, std::uint64_t seed) {
  if (d < 1 || m < 1) throw contract_error("instance sizes must be positive");
  if (!(reg > 0.0)) throw contract_error("l1 weight must be positive");

  Rng rng(seed);
  Matrix A(m, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < m; ++i) A(i, j) = rng.normal() / std::sqrt(static_cast<double>(m));

  Vector x_true = Vector::Zero(d);
  const int nnz = std::max(1, d / 4);
  for (int k = 0; k < nnz; ++k) {
    const auto i = rng.uniform_int(0, d - 1);
    x_true[i] = rng.uniform(-2.0, 2.0);
  }
  Vector b = A * x_true;
  for (int i = 0; i < m; ++i) b[i] += 0.01 * rng.normal();

  return assemble_lasso(d, m, reg, seed, A, b);
}

CompositeProblem problem_from_meta(const json& meta) {
  if (!meta.contains("format_version") || meta["format_version"].get<int>() != kFormatVersion)
    throw contract_error("unsupported problem file version");
  const std::string kind = meta.at("kind").get<std::string>();
  const json& spec = meta.at("spec");

  if (kind == "logsumexp-quad") {
    ExperimentSpec es;
    es.n = spec.at("n").get<int>();
    es.m = spec.at("m").get<int>();
    es.density = spec.at("density").get<double>();
    es.seed = spec.at("seed").get<std::uint64_t>();
    es.lambda_mix = spec.at("lambda_mix").get<std::string>();
    const json& data = meta.at("data");
    const auto& rows = data.at("a_rows");
    const auto& cols = data.at("a_cols");
    const auto& vals = data.at("a_vals");
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i)
      trips.emplace_back(rows[i].get<int>(), cols[i].get<int>(), vals[i].get<double>());
    return assemble_logsumexp_quadratic(es, trips, vector_from_json(data.at("lambda")),
                                        matrix_from_json(data.at("e_tilde")));
  }
  if (kind == "quadratic") {
    const json& data = meta.at("data");
    return assemble_quadratic(spec.at("d").get<int>(), spec.at("mu").get<double>(),
                              spec.at("L").get<double>(), spec.at("seed").get<std::uint64_t>(),
                              matrix_from_json(data.at("q")), vector_from_json(data.at("b")));
  }
  if (kind == "quartic") {
    return gen_quartic(spec.at("d").get<int>());
  }
  if (kind == "lasso") {
    const json& data = meta.at("data");
    return assemble_lasso(spec.at("d").get<int>(), spec.at("m").get<int>(),
                          spec.at("reg").get<double>(), spec.at("seed").get<std::uint64_t>(),
                          matrix_from_json(data.at("a")), vector_from_json(data.at("b")));
  }
  throw contract_error("unknown problem kind: " + kind);
}

}  // namespace accel

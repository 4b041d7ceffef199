#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "accel/generators.hpp"
#include "accel/ledger.hpp"
#include "accel/rng.hpp"
#include "accel/serialize.hpp"

using namespace accel;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("accel_problem_" + name)).string();
}

}  // namespace

TEST_CASE("quadratic generator: recorded optimum matches the oracle") {
  const CompositeProblem p = gen_quadratic(6, 1.0, 50.0, 21);
  REQUIRE(p.x_star.has_value());
  REQUIRE(p.f_star.has_value());
  CHECK(p.f.grad(*p.x_star).norm() < 1e-9);
  CHECK(p.f.value(*p.x_star) == doctest::Approx(*p.f_star).epsilon(1e-12));
  CHECK(p.lip_f_at(1) == doctest::Approx(50.0));
  REQUIRE(p.uc.has_value());
  CHECK(p.uc->r == 2.0);
  CHECK(p.uc->sigma_r == doctest::Approx(1.0));
  // strong convexity: value dominates the quadratic lower model from x*
  Rng rng(22);
  for (int t = 0; t < 5; ++t) {
    Vector z(6);
    for (int i = 0; i < 6; ++i) z[i] = rng.normal();
    const double lower = *p.f_star + 0.5 * p.uc->sigma_r * (z - *p.x_star).squaredNorm();
    CHECK(p.f.value(z) >= lower - 1e-10);
  }
}

TEST_CASE("quartic generator: closed forms at a hand point") {
  const CompositeProblem p = gen_quartic(2);
  Vector x(2);
  x << 1.0, 2.0;
  CHECK(p.f.value(x) == doctest::Approx(4.25).epsilon(1e-15));
  const Vector g = p.f.grad(x);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(8.0));
  CHECK(*p.f_star == 0.0);
  CHECK(p.x_star->norm() == 0.0);
  CHECK_THROWS_AS(p.lip_f_at(1), contract_error);
}

TEST_CASE("logsumexp instance: value at zero, simplex weights, gradient check") {
  ExperimentSpec spec;
  spec.n = 10;
  spec.m = 80;
  spec.density = 0.3;
  spec.seed = 23;
  const CompositeProblem p = gen_logsumexp_quadratic(spec);
  CHECK(p.f.value(Vector::Zero(10)) == doctest::Approx(std::log(80.0)).epsilon(1e-12));

  const auto& lam = p.meta.at("data").at("lambda");
  double sum = 0.0;
  for (const auto& v : lam) {
    const double x = v.get<double>();
    CHECK(x >= 0.0);
    sum += x;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(24);
  Vector z(10);
  for (int i = 0; i < 10; ++i) z[i] = 0.3 * rng.normal();
  CHECK(fd_check_grad(p, Term::f, z, 1e-6) < 1e-6);
  CHECK(fd_check_grad(p, Term::g, z, 1e-6) < 1e-6);
  CHECK(std::isfinite(p.f.lip1));
  REQUIRE(p.uc.has_value());
}

TEST_CASE("lasso instance: l1 value and soft-threshold prox") {
  const CompositeProblem p = gen_lasso(8, 20, 0.25, 25);
  Vector v(8);
  v << 2.0, -0.3, 0.0, 1.0, -2.5, 0.1, 0.0, 0.6;
  CHECK(p.g.value(v) == doctest::Approx(0.25 * v.lpNorm<1>()).epsilon(1e-14));
  REQUIRE(p.g.prox);
  const Vector y = p.g.prox(v, 2.0);  // threshold 0.25 * 2 = 0.5
  CHECK(y[0] == doctest::Approx(1.5));
  CHECK(y[1] == 0.0);
  CHECK(y[4] == doctest::Approx(-2.0));
  CHECK(y[7] == doctest::Approx(0.1));
  CHECK(!p.g.smooth);
  CHECK(!p.g.grad);
  CHECK(std::isfinite(p.f.lip1));
}

TEST_CASE("estimate_lf: max squared column norm identities") {
  SparseMatrix a(2, 2);
  a.insert(0, 0) = 1.0;
  a.insert(1, 1) = 2.0;
  a.makeCompressed();
  CHECK(estimate_lf(a) == doctest::Approx(4.0));

  SparseMatrix z(3, 4);
  z.setZero();
  CHECK(estimate_lf(z) == 0.0);

  SparseMatrix s(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s.insert(i, j) = (i + j) % 2 ? 1.0 : -1.0;
  s.makeCompressed();
  CHECK(estimate_lf(s) == doctest::Approx(3.0));
}

TEST_CASE("fd_check_grad: accepts a true gradient, flags a corrupted one") {
  CompositeProblem p = gen_quadratic(5, 1.0, 10.0, 26);
  Vector x(5);
  x << 0.4, -1.0, 0.2, 0.9, -0.5;
  CHECK(fd_check_grad(p, Term::f, x, 1e-6) < 1e-8);

  // the error is relative to the (corrupted) component, so a unit offset on a
  // component of size ~4 lands near 1/5; what matters is the seven orders of
  // separation from the clean reading
  auto good = p.f.grad;
  p.f.grad = [good](const Vector& v) {
    Vector g = good(v);
    g[0] += 1.0;
    return g;
  };
  CHECK(fd_check_grad(p, Term::f, x, 1e-6) > 0.1);
}

TEST_CASE("eval helpers report to the ledger by part and kind") {
  const CompositeProblem p = gen_lasso(6, 15, 0.1, 27);
  OracleLedger led;
  const Vector x = Vector::Constant(6, 0.3);
  eval_value(p, Term::F, x, &led);
  CHECK(led.count(Level::outer, Part::f, Kind::value) == 1);
  CHECK(led.count(Level::outer, Part::g, Kind::value) == 1);
  eval_grad(p, Term::f, x, &led, Level::inner);
  CHECK(led.count(Level::inner, Part::f, Kind::full_grad) == 1);
  CHECK(led.weighted(Part::f) == doctest::Approx(2.5));
  CHECK(led.weighted(Part::g) == 0.0);  // values are excluded from weighted totals
}

TEST_CASE("serialization: hash stability and byte-identical reload") {
  const CompositeProblem a = gen_quadratic(7, 1.0, 40.0, 31);
  const CompositeProblem b = gen_quadratic(7, 1.0, 40.0, 31);
  const CompositeProblem c = gen_quadratic(7, 1.0, 40.0, 32);
  CHECK(problem_hash(a) == problem_hash(b));
  CHECK(problem_hash(a) != problem_hash(c));

  const std::string p1 = tmp_path("roundtrip1.json");
  const std::string p2 = tmp_path("roundtrip2.json");
  save_problem(a, p1);
  const CompositeProblem loaded = load_problem(p1);
  save_problem(loaded, p2);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(problem_hash(loaded) == problem_hash(a));

  Rng rng(33);
  Vector z(7);
  for (int i = 0; i < 7; ++i) z[i] = rng.normal();
  CHECK(loaded.f.value(z) == doctest::Approx(a.f.value(z)).epsilon(1e-15));
  CHECK((loaded.f.grad(z) - a.f.grad(z)).norm() == 0.0);
  std::remove(p1.c_str());
  std::remove(p2.c_str());

  CHECK_THROWS_AS(load_problem(tmp_path("missing_nope.json")), contract_error);
}

TEST_CASE("logsumexp meta: regenerated instance is bit-identical") {
  ExperimentSpec spec;
  spec.n = 9;
  spec.m = 50;
  spec.density = 0.4;
  spec.seed = 34;
  const CompositeProblem p = gen_logsumexp_quadratic(spec);
  const CompositeProblem q = problem_from_meta(p.meta);
  CHECK(p.meta.dump() == q.meta.dump());
  CHECK(problem_hash(p) == problem_hash(q));
  Vector z = Vector::Constant(9, 0.2);
  CHECK(p.f.value(z) == q.f.value(z));
  CHECK((p.g.grad(z) - q.g.grad(z)).norm() == 0.0);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "accel/baselines.hpp"
#include "accel/generators.hpp"
#include "accel/ledger.hpp"
#include "accel/restart.hpp"
#include "accel/rng.hpp"

using namespace accel;

namespace {

CompositeProblem composite_quadratic(int d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix mf(d, d), mg(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      mf(i, j) = rng.normal();
      mg(i, j) = rng.normal();
    }
  QuadraticForm qf, qg;
  qf.Q = mf.transpose() * mf / d + Matrix::Identity(d, d);
  qf.b = Vector::NullaryExpr(d, [&](Eigen::Index) { return rng.normal(); });
  qg.Q = mg.transpose() * mg / d + 0.5 * Matrix::Identity(d, d);
  qg.b = Vector::Zero(d);

  CompositeProblem p;
  p.dim = d;
  p.f.value = [qf](const Vector& x) { return qf.value(x); };
  p.f.grad = [qf](const Vector& x) { return qf.gradient(x); };
  p.f.quadratic = qf;
  p.f.lip1 = qf.Q.operatorNorm();
  p.lip_f[1] = p.f.lip1;
  p.g.value = [qg](const Vector& x) { return qg.value(x); };
  p.g.grad = [qg](const Vector& x) { return qg.gradient(x); };
  p.g.quadratic = qg;
  p.g.lip1 = qg.Q.operatorNorm();

  const Matrix Q = qf.Q + qg.Q;
  const Vector xs = Q.ldlt().solve(-qf.b);
  p.x_star = xs;
  p.f_star = qf.value(xs) + qg.value(xs);
  return p;
}

}  // namespace

TEST_CASE("momentum_update: hand values and the coupling identity") {
  {
    const auto [a, A] = momentum_update(0.0, 2.0);
    CHECK(a == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(A == doctest::Approx(2.0).epsilon(1e-15));
  }
  {
    const auto [a, A] = momentum_update(1.0, 1.0);
    CHECK(a == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
    CHECK(A == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
  }
  Rng rng(51);
  for (int t = 0; t < 50; ++t) {
    const double A = rng.uniform(0.0, 10.0);
    const double lam = rng.uniform(1e-3, 5.0);
    const auto [a, An] = momentum_update(A, lam);
    CHECK(std::abs(lam * An - a * a) <= 1e-12 * std::max(1.0, a * a));
    CHECK(An == doctest::Approx(A + a));
  }
}

TEST_CASE("extrapolate: degenerate and generic weights") {
  Vector y = Vector::Constant(3, 2.0), x = Vector::Constant(3, -1.0);
  CHECK((extrapolate(0.0, 0.7, y, x) - x).norm() == 0.0);
  const Vector mid = extrapolate(1.0, 1.0, y, x);
  CHECK(mid[0] == doctest::Approx(0.5));
}

TEST_CASE("check_step_condition: eta band membership") {
  // eta = λ·H·dist^{p−1}/p!
  CHECK(check_step_condition(0.5, 1.0, 1, 123.0) == StepCheck::accepted);   // 0.5
  CHECK(check_step_condition(0.49, 1.0, 1, 1.0) == StepCheck::too_small);   // below ½
  CHECK(check_step_condition(0.51, 1.0, 1, 1.0) == StepCheck::too_large);   // above p/(p+1)
  CHECK(check_step_condition(0.6, 2.0, 2, 1.0) == StepCheck::accepted);     // 0.6 ∈ [½, ⅔]
  CHECK(check_step_condition(0.7, 2.0, 2, 1.0) == StepCheck::too_large);
  CHECK(check_step_condition(0.7, 2.0, 2, 1.0, 1.5) == StepCheck::accepted);  // widened band
}

TEST_CASE("gradient_step: dual update arithmetic") {
  Vector x = Vector::Constant(2, 1.0), g = Vector::Constant(2, 3.0);
  const Vector out = gradient_step(x, 0.5, g);
  CHECK(out[0] == doctest::Approx(-0.5));
}

TEST_CASE("am p=1 exact: certified rate, eta pin, certificate pin, oracle pin") {
  const CompositeProblem p = gen_quadratic(12, 1.0, 60.0, 52);
  const Vector x0 = Vector::Zero(12);
  AmConfig cfg;
  cfg.p = 1;
  cfg.H = 60.0;
  cfg.max_iters = 80;
  OracleLedger led;
  const AmResult res = am_run(p, cfg, x0, Subsolver::closed_form(), &led);
  REQUIRE(res.status == RunStatus::completed);
  REQUIRE(res.iters.size() == 80);

  const double R = (x0 - *p.x_star).norm();
  for (const IterRecord& r : res.iters) {
    CHECK(r.eta == 0.5);
    CHECK(r.sigma_residual <= 0.5 + 1e-9);
    const double bound = rate_constant(1) * cfg.H * R * R / double(r.k * r.k);
    CHECK(r.F_y - *p.f_star <= bound + 1e-9);
    CHECK(r.psi_gap + 1e-9 >= r.certified_floor);
  }
  // two f values and two f gradients per step; g never touched
  CHECK(led.count(Level::outer, Part::f, Kind::value) == 160);
  CHECK(led.count(Level::outer, Part::f, Kind::full_grad) == 160);
  CHECK(led.part_total(Part::g, Kind::value) == 0);
  CHECK(led.part_total(Part::g, Kind::full_grad) == 0);
  CHECK(led.count(Level::inner, Part::f, Kind::full_grad) == 0);
}

TEST_CASE("am p=2 exact: eta stays in band and the order-2 rate holds") {
  const CompositeProblem p = gen_quartic(4);
  const Vector x0 = Vector::LinSpaced(4, 0.6, 1.3);
  const double R = x0.norm();
  AmConfig cfg;
  cfg.p = 2;
  cfg.H = 3.0 * 6.0 * (2.0 * R);
  cfg.max_iters = 40;
  const AmResult res = am_run(p, cfg, x0, Subsolver::closed_form());
  REQUIRE(res.iters.size() == 40);
  for (const IterRecord& r : res.iters) {
    CHECK(r.eta >= 0.5 - 1e-12);
    CHECK(r.eta <= 2.0 / 3.0 + 1e-12);
    const double bound = rate_constant(2) * cfg.H * std::pow(R, 3) / std::pow(double(r.k), 3.5);
    CHECK(r.F_y <= bound + 1e-9);
  }
}

TEST_CASE("am: callback fires in order with a live potential tracker") {
  const CompositeProblem p = gen_quadratic(6, 1.0, 25.0, 53);
  AmConfig cfg;
  cfg.H = 25.0;
  cfg.max_iters = 10;
  long expect = 1;
  double lastA = 0.0;
  am_run(p, cfg, Vector::Zero(6), Subsolver::closed_form(), nullptr,
         [&](const AmState& st, const IterRecord& rec) {
           CHECK(rec.k == expect);
           CHECK(st.k == rec.k);
           CHECK(st.A > lastA);
           lastA = st.A;
           REQUIRE(st.potential.initialized());
           CHECK(std::isfinite(st.potential.min_value()));
           ++expect;
         });
  CHECK(expect == 11);
}

TEST_CASE("am: target gap stops the run early with converged status") {
  const CompositeProblem p = gen_quadratic(10, 1.0, 40.0, 54);
  AmConfig cfg;
  cfg.H = 40.0;
  cfg.max_iters = 5000;
  cfg.target_gap = 1e-6;
  const AmResult res = am_run(p, cfg, Vector::Zero(10), Subsolver::closed_form());
  CHECK(res.status == RunStatus::converged);
  CHECK(res.final_F - *p.f_star <= 1e-6);
  CHECK(res.iters.size() < 5000);
}

TEST_CASE("am inexact: sigma certificate honored with a descent inner") {
  const CompositeProblem p = composite_quadratic(10, 55);
  AmConfig cfg;
  cfg.H = 2.0 * p.lip_f.at(1);
  cfg.criterion = StepCriterion::sigma_residual;
  cfg.sigma = 0.5;
  cfg.max_iters = 30;
  OracleLedger led;
  const AmResult res = am_run(p, cfg, Vector::Zero(10),
                              Subsolver::with_inner(std::shared_ptr<InnerSolver>(
                                  make_gradient_descent_inner())),
                              &led);
  REQUIRE(res.status == RunStatus::completed);
  long prev = 0;
  for (const IterRecord& r : res.iters) {
    CHECK(r.sigma_residual <= 0.5 + 1e-9);
    CHECK(r.inner_cum >= prev);
    prev = r.inner_cum;
  }
  CHECK(res.iters.back().inner_cum > 0);
  CHECK(led.count(Level::inner, Part::g, Kind::full_grad) > 0);
  // the run still converges: certified order-1 rate with inexactness slack
  const double R = (Vector::Zero(10) - *p.x_star).norm();
  const double bound = 3.0 * rate_constant(1) * cfg.H * R * R / (30.0 * 30.0);
  CHECK(res.final_F - *p.f_star <= bound + 1e-9);
}

TEST_CASE("am: configuration contracts") {
  const CompositeProblem p = gen_quadratic(4, 1.0, 10.0, 56);
  AmConfig cfg;
  cfg.H = 10.0;
  cfg.p = 3;
  CHECK_THROWS_AS(am_run(p, cfg, Vector::Zero(4), Subsolver::closed_form()), contract_error);
  cfg.p = 1;
  cfg.H = 0.0;
  CHECK_THROWS_AS(am_run(p, cfg, Vector::Zero(4), Subsolver::closed_form()), contract_error);
  cfg.H = 10.0;
  CHECK_THROWS_AS(am_run(p, cfg, Vector::Zero(3), Subsolver::closed_form()), contract_error);
  cfg.criterion = StepCriterion::grad_ratio;
  CHECK_THROWS_AS(am_run(p, cfg, Vector::Zero(4), Subsolver::closed_form()), contract_error);
  cfg.criterion = StepCriterion::exact;
  CHECK_THROWS_AS(am_run(p, cfg, Vector::Zero(4),
                         Subsolver::with_inner(std::shared_ptr<InnerSolver>(
                             make_gradient_descent_inner()))),
                  contract_error);
}

TEST_CASE("fault seams: momentum breaks the certified potential floor") {
  const CompositeProblem p = gen_quadratic(8, 1.0, 30.0, 57);
  AmConfig cfg;
  cfg.H = 30.0;
  cfg.max_iters = 40;
  cfg.fault = Fault::momentum;
  CHECK_THROWS_AS(am_run(p, cfg, Vector::Zero(8), Subsolver::closed_form()), invariant_error);
}

TEST_CASE("fault seams: widened eta band escapes the acceptance window") {
  const CompositeProblem p = gen_quartic(5);
  const Vector x0 = Vector::LinSpaced(5, 0.6, 1.3);
  AmConfig cfg;
  cfg.p = 2;
  cfg.H = 3.0 * 6.0 * (2.0 * x0.norm());
  cfg.max_iters = 25;
  cfg.fault = Fault::eta_band;
  const AmResult res = am_run(p, cfg, x0, Subsolver::closed_form());
  double max_eta = 0.0;
  for (const IterRecord& r : res.iters) max_eta = std::max(max_eta, r.eta);
  CHECK(max_eta > 2.0 / 3.0 + 1e-9);
}

TEST_CASE("potential tracker: closed form matches a direct evaluation") {
  const CompositeProblem p = gen_quadratic(7, 1.0, 20.0, 58);
  const Vector x0 = Vector::Zero(7);
  AmConfig cfg;
  cfg.H = 20.0;
  cfg.max_iters = 15;
  Vector probe(7);
  Rng rng(59);
  for (int i = 0; i < 7; ++i) probe[i] = rng.normal();
  am_run(p, cfg, x0, Subsolver::closed_form(), nullptr,
         [&](const AmState& st, const IterRecord&) {
           // ψ is ½‖x−x₀‖² plus accumulated affine pieces; its minimum sits at
           // the dual center with value ψ(center) by strong convexity
           const Vector c = st.potential.center();
           const double direct = st.potential.value_at(c);
           CHECK(st.potential.min_value() == doctest::Approx(direct).epsilon(1e-10));
           CHECK(st.potential.value_at(probe) >= st.potential.min_value() - 1e-10);
         });
}

#include "accel/catalyst.hpp"

#include <cmath>

namespace accel {

CompositeProblem as_g_only(const CompositeProblem& problem) {
  if (!problem.g.is_zero && !problem.f.is_zero)
    throw contract_error("expected the objective to live in a single part");
  if (problem.f.is_zero) return problem;
  CompositeProblem out = problem;
  out.g = problem.f;
  out.f = FunctionPart{};
  out.f.is_zero = true;
  out.lip_f.clear();
  out.lip_f[1] = 0.0;
  return out;
}

CatalystSolver::CatalystSolver(CompositeProblem problem, CatalystConfig config,
                               std::shared_ptr<InnerSolver> inner)
    : problem_(std::move(problem)), config_(config), inner_(std::move(inner)) {
  if (!problem_.f.is_zero) throw contract_error("proximal-point wrapper needs f identically zero");
  if (!(config_.H > 0.0)) throw contract_error("prox regularization constant must be positive");
  if (!inner_) throw contract_error("an inner solver is required");
}

AmResult CatalystSolver::run(const Vector& x0, OracleLedger* ledger,
                             const IterCallback& callback) const {
  AmConfig config;
  config.p = 1;
  config.H = config_.H;
  config.criterion = StepCriterion::contraction;
  config.force_implicit_g = true;
  config.inner_budget = config_.inner_budget;
  config.max_iters = config_.outer_iters;
  config.target_gap = config_.target_gap;
  config.diagnostics = config_.diagnostics;
  const Subsolver sub = Subsolver::with_inner(inner_);

  if (config_.use_restart && problem_.uc) {
    RestartSchedule sched;
    sched.p = 1;
    sched.H = config_.H;
    sched.r = problem_.uc->r;
    sched.sigma_r = problem_.uc->sigma_r;

    Vector g0 = eval_grad(problem_, Term::g, x0, ledger, Level::outer);
    const double r_uc = problem_.uc->r;
    sched.R0 = r_uc == 2.0 ? std::max(g0.norm() / problem_.uc->sigma_r, 1e-12)
                           : std::max(std::pow(r_uc * g0.norm() / problem_.uc->sigma_r,
                                               1.0 / (r_uc - 1.0)),
                                      1e-12);
    const double eps = config_.target_gap > 0.0 ? config_.target_gap : 1e-12;
    sched.K = stages_for_target(sched.R0, sched.r, sched.sigma_r, eps);

    AmConfig base = config;
    // cap the stage schedule by the outer-iteration budget
    long used = 0;
    Vector z = x0;
    AmResult result;
    result.y = x0;
    result.status = RunStatus::budget_exhausted;
    long iter_offset = 0;
    for (int k = 0; k <= sched.K && used < config_.outer_iters; ++k) {
      AmConfig stage_cfg = base;
      stage_cfg.max_iters = std::min<long>(nk_schedule(k, sched), config_.outer_iters - used);
      stage_cfg.target_gap = 0.0;
      AmResult stage = am_run(problem_, stage_cfg, z, sub, ledger,
                              [&](const AmState& st, const IterRecord& rec) {
                                if (callback) {
                                  IterRecord shifted = rec;
                                  shifted.k += iter_offset;
                                  callback(st, shifted);
                                }
                              });
      z = stage.y;
      used += static_cast<long>(stage.iters.size());
      for (IterRecord rec : stage.iters) {
        rec.k += iter_offset;
        result.iters.push_back(rec);
      }
      iter_offset += static_cast<long>(stage.iters.size());
      result.y = z;
      result.final_F = stage.final_F;
      if (stage.status == RunStatus::converged) {
        result.status = RunStatus::converged;
        return result;
      }
      if (config_.target_gap > 0.0 && problem_.uc) {
        const Vector gz = eval_grad(problem_, Term::g, z, ledger, Level::outer);
        const double r = problem_.uc->r;
        const double bound = (r - 1.0) / r *
                             std::pow(1.0 / problem_.uc->sigma_r, 1.0 / (r - 1.0)) *
                             std::pow(gz.norm(), r / (r - 1.0));
        if (bound <= config_.target_gap) {
          result.status = RunStatus::converged;
          return result;
        }
      }
    }
    if (config_.target_gap <= 0.0) result.status = RunStatus::completed;
    return result;
  }

  return am_run(problem_, config, x0, sub, ledger, callback);
}

CatalystSolver catalyst_wrap(const CompositeProblem& g_only_problem, double H,
                             std::shared_ptr<InnerSolver> inner, const CatalystConfig& config) {
  CatalystConfig cfg = config;
  cfg.H = H;
  return CatalystSolver(g_only_problem, cfg, std::move(inner));
}

}  // namespace accel

#include "accel/restart.hpp"

#include <cmath>

namespace accel {

double rate_constant(int p) {
  return std::pow(2.0, p - 1) * std::pow(p + 1.0, (3.0 * p + 1.0) / 2.0) / factorial(p);
}

long nk_schedule(int k, const RestartSchedule& sched) {
  if (k < 0) throw contract_error("stage index must be nonnegative");
  if (!(sched.R0 > 0.0)) throw contract_error("initial radius bound must be positive");
  if (!(sched.sigma_r > 0.0) || sched.r < 2.0)
    throw contract_error("uniform-convexity data invalid");
  const double Rk = sched.R0 * std::pow(2.0, -k);
  const double inner = sched.r * rate_constant(sched.p) * sched.H * std::pow(2.0, sched.r) /
                       sched.sigma_r * std::pow(Rk, sched.p + 1.0 - sched.r);
  const double raw = std::pow(inner, 2.0 / (3.0 * sched.p + 1.0));
  if (!(raw >= 1.0)) return 1;
  return static_cast<long>(std::ceil(raw));
}

int stages_for_target(double R0, double r, double sigma_r, double eps) {
  if (!(eps > 0.0)) throw contract_error("target gap must be positive");
  const double k = std::log2(R0 * std::pow(sigma_r / (r * eps), 1.0 / r));
  return std::max(0, static_cast<int>(std::ceil(k)));
}

RestartResult restart_run(const CompositeProblem& problem, const RestartSchedule& sched,
                          const Vector& x0, const Subsolver& subsolver,
                          const AmConfig& base_config, OracleLedger* ledger,
                          const IterCallback& callback) {
  if (!problem.uc) throw contract_error("restarted run needs uniform-convexity data");
  if (auto it = problem.lip_f.find(sched.p); it != problem.lip_f.end()) {
    if (sched.H < (sched.p + 1) * it->second - 1e-12)
      throw contract_error("regularizer constant below (p+1) times the recorded Lipschitz bound");
  }

  RestartResult result;
  result.z = x0;

  double prev_radius = -1.0;
  if (problem.x_star) prev_radius = (x0 - *problem.x_star).norm();

  long iter_offset = 0;
  for (int k = 0; k <= sched.K; ++k) {
    const long Nk = nk_schedule(k, sched);
    AmConfig config = base_config;
    config.p = sched.p;
    config.H = sched.H;
    config.max_iters = Nk;
    config.target_gap = 0.0;

    AmResult stage = am_run(problem, config, result.z, subsolver, ledger,
                            [&](const AmState& st, const IterRecord& rec) {
                              if (callback) {
                                IterRecord shifted = rec;
                                shifted.k += iter_offset;
                                callback(st, shifted);
                              }
                            });
    result.z = stage.y;
    result.stage_iters.push_back(static_cast<long>(stage.iters.size()));
    result.total_iterations += static_cast<long>(stage.iters.size());
    for (IterRecord rec : stage.iters) {
      rec.k += iter_offset;
      result.iters.push_back(rec);
    }
    iter_offset += static_cast<long>(stage.iters.size());

    if (problem.x_star) {
      const double radius = (result.z - *problem.x_star).norm();
      result.stage_radius.push_back(radius);
      if (prev_radius >= 0.0 && radius > 0.5 * prev_radius + 1e-9 * (1.0 + prev_radius))
        result.warnings.push_back("stage " + std::to_string(k) +
                                  " failed to halve the distance to the minimizer; "
                                  "uniform-convexity modulus may be overestimated");
      prev_radius = radius;
    } else if (problem.f_star && problem.uc) {
      const double gap = eval_value(problem, Term::F, result.z, nullptr) - *problem.f_star;
      const double radius =
          std::pow(std::max(gap, 0.0) * problem.uc->r / problem.uc->sigma_r, 1.0 / problem.uc->r);
      result.stage_radius.push_back(radius);
    }

    if (stage.status == RunStatus::converged) {
      result.status = RunStatus::converged;
      break;
    }
  }
  return result;
}

}  // namespace accel

#pragma once

#include "accel/engine.hpp"

namespace accel {

// Stage schedule for the restarted run: radius halves per stage and the
// per-stage iteration budget keeps the certified gap ahead of the halving.
struct RestartSchedule {
  double R0 = 1.0;      // upper bound on ‖x₀ − x*‖
  double r = 2.0;       // uniform-convexity order
  double sigma_r = 1.0; // uniform-convexity modulus
  int p = 1;
  double H = 1.0;
  int K = 0;  // stage count; stages run k = 0..K
};

// c_p = 2^{p−1}(p+1)^{(3p+1)/2}/p!
double rate_constant(int p);

long nk_schedule(int k, const RestartSchedule& sched);

// Stages needed before the certified stage gap drops under eps.
int stages_for_target(double R0, double r, double sigma_r, double eps);

struct RestartResult {
  Vector z;
  RunStatus status = RunStatus::completed;
  std::vector<IterRecord> iters;  // concatenated across stages
  std::vector<long> stage_iters;
  std::vector<double> stage_radius;  // ‖z_k − x*‖ when x* is known
  long total_iterations = 0;
  std::vector<std::string> warnings;  // stages that failed to halve the certified bound
};

RestartResult restart_run(const CompositeProblem& problem, const RestartSchedule& sched,
                          const Vector& x0, const Subsolver& subsolver,
                          const AmConfig& base_config, OracleLedger* ledger = nullptr,
                          const IterCallback& callback = nullptr);

}  // namespace accel

#pragma once

#include <string>
#include <vector>

#include "accel/engine.hpp"

namespace accel {

struct SuiteResult {
  std::string name;
  bool pass = true;
  std::string details;
};

std::vector<std::string> verification_suite_names();

// Self-check battery over the whole stack: algebraic identities the engine
// must maintain, convergence-rate envelopes, oracle cross-checks against
// independent reference computations, and accounting invariants. `fault`
// reaches the engine configs so an injected defect can be shown to trip the
// matching suites; a non-empty `only` restricts the run to one suite and
// throws contract_error for unknown names.
std::vector<SuiteResult> run_verification(Fault fault = Fault::none, const std::string& only = "");

// One JSON object per line: {"suite": ..., "pass": ..., "details": ...}.
std::string suite_results_json(const std::vector<SuiteResult>& results);

}  // namespace accel

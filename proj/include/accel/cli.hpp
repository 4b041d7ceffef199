#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "accel/problem.hpp"

namespace accel {

// Flag mirror for the `run` subcommand. A JSON config file carries the same
// keys; explicitly passed flags override file values, and the effective
// configuration is recorded in the trace header.
struct RunOptions {
  std::string problem_file;
  std::string method = "am";  // am | am-restart | catalyst | sliding | fgm | acdm | ms
  int p = 1;
  double H = 0.0;  // 0 derives from recorded constants
  double L = 0.0;  // fgm / ms constant; 0 derives
  std::string criterion = "exact";  // exact | grad-ratio | contraction | sigma-residual
  std::string inner = "gd";         // gd | acdm | exact
  double sigma = 0.5;
  long iters = 100;
  long budget = 1000000;
  std::uint64_t seed = 0;
  double target_gap = 0.0;
  double R0 = 0.0;  // restart radius bound; 0 derives
  int stages = 5;   // restart stages when no target gap is set
  double x0_scale = 0.0;  // start point = x0_scale * ones
  std::string fstar_mode = "known";  // known | best-run
  std::string fstar_registry;
  std::string out;  // empty prints the CSV to stdout
  bool timing = false;
  double weight_full = 2.5;
  std::string inject_fault;  // "" | momentum | eta-band

  // set by the parser when --config was used; recorded for provenance
  std::string config_file_json;
};

json run_options_to_json(const RunOptions& opts);
void apply_json_to_options(const json& j, RunOptions& opts);

struct GenerateOptions {
  std::string problem = "logsumexp-quad";  // logsumexp-quad | quadratic | lasso | quartic
  int n = 50;
  int m = 2000;
  double density = 0.01;
  int d = 50;
  double mu = 1.0;
  double L = 100.0;
  double reg = 0.1;
  std::uint64_t seed = 1;
  std::string out;
};

struct CompareOptions {
  std::vector<std::string> traces;
  double target_rel_gap = 1e-3;
  std::vector<std::string> asserts;  // "A<B:wg", "A<=B:wf", axes wf|wg|iters
  std::string out;                   // long-format CSV (method,axis,x,y)
};

struct VerifyOptions {
  bool json_lines = false;
  std::string suite;
  std::string inject_fault;  // "" | momentum | eta-band
};

struct GridOptions {
  std::string config_file;
  int threads = 0;  // 0: ACCELBENCH_THREADS, then hardware count
};

// Subcommand outcomes: exit code per the documented contract (0 success /
// criterion met, 2 budget exhausted, 3 invariant or assertion violation,
// 64 usage), stdout payload, and a human summary.
struct CmdResult {
  int exit_code = 0;
  std::string output;   // printed to stdout
  std::string summary;  // printed to stderr (progress/diagnostics)
};

CmdResult cli_generate(const GenerateOptions& opts);
CmdResult cli_run(const RunOptions& opts);
CmdResult cli_compare(const CompareOptions& opts);
CmdResult cli_verify(const VerifyOptions& opts);
CmdResult cli_grid(const GridOptions& opts);

int cli_main(int argc, char** argv);

}  // namespace accel

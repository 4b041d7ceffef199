#include "accel/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "accel/baselines.hpp"
#include "accel/catalyst.hpp"
#include "accel/generators.hpp"
#include "accel/ledger.hpp"
#include "accel/serialize.hpp"
#include "accel/sliding.hpp"
#include "accel/subsolver.hpp"
#include "accel/trace.hpp"
#include "accel/verify.hpp"

namespace accel {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw contract_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw contract_error(path + ": " + e.what());
  }
}

Fault parse_fault(const std::string& s) {
  if (s.empty()) return Fault::none;
  if (s == "momentum") return Fault::momentum;
  if (s == "eta-band") return Fault::eta_band;
  throw contract_error("unknown fault seam: " + s);
}

StepCriterion parse_criterion(const std::string& s) {
  if (s == "exact") return StepCriterion::exact;
  if (s == "grad-ratio") return StepCriterion::grad_ratio;
  if (s == "contraction") return StepCriterion::contraction;
  if (s == "sigma-residual") return StepCriterion::sigma_residual;
  throw contract_error("unknown step criterion: " + s);
}

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::completed: return "completed";
    case RunStatus::budget_exhausted: return "budget-exhausted";
  }
  return "unknown";
}

std::shared_ptr<InnerSolver> make_inner_solver(const std::string& name, std::uint64_t seed) {
  if (name == "gd") return std::shared_ptr<InnerSolver>(make_gradient_descent_inner());
  if (name == "exact") return std::shared_ptr<InnerSolver>(make_exact_quadratic_inner());
  if (name == "acdm") return std::make_shared<AcdmInner>(0.5, seed);
  throw contract_error("unknown inner solver: " + name);
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ';');
  return s;
}

// Registry of best objective values keyed by problem hash. The stored value
// only ever decreases, so rerunning the same command rewrites the same bytes.
std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

double resolve_best_run_fstar(const std::string& path, const std::string& hash,
                              double best_seen) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  json reg = json::object();
  if (std::filesystem::exists(path)) {
    reg = parse_json_file(path);
    if (!reg.is_object()) throw contract_error(path + ": registry must be a JSON object");
  }
  double best = best_seen;
  if (reg.contains(hash) && reg[hash].is_number()) {
    best = std::min(best, reg[hash].get<double>());
  }
  reg[hash] = best;
  atomic_write_file(path, reg.dump(2) + "\n");
  return best;
}

struct RawRow {
  long k = 0;
  double F = kNan;
  double eta = kNan;
  double sig = kNan;
  double psi = kNan;
  long inner_cum = -1;
  double wf = kNan;
  double wg = kNan;
  double ms = kNan;
};

}  // namespace

json run_options_to_json(const RunOptions& o) {
  json j;
  j["problem_file"] = o.problem_file;
  j["method"] = o.method;
  j["p"] = o.p;
  j["H"] = o.H;
  j["L"] = o.L;
  j["criterion"] = o.criterion;
  j["inner"] = o.inner;
  j["sigma"] = o.sigma;
  j["iters"] = o.iters;
  j["budget"] = o.budget;
  j["seed"] = o.seed;
  j["target_gap"] = o.target_gap;
  j["R0"] = o.R0;
  j["stages"] = o.stages;
  j["x0_scale"] = o.x0_scale;
  j["fstar_mode"] = o.fstar_mode;
  j["fstar_registry"] = o.fstar_registry;
  j["out"] = o.out;
  j["timing"] = o.timing;
  j["weight_full"] = o.weight_full;
  j["inject_fault"] = o.inject_fault;
  return j;
}

void apply_json_to_options(const json& j, RunOptions& o) {
  if (!j.is_object()) throw contract_error("run config must be a JSON object");
  for (const auto& [key, val] : j.items()) {
    try {
      if (key == "problem_file") o.problem_file = val.get<std::string>();
      else if (key == "method") o.method = val.get<std::string>();
      else if (key == "p") o.p = val.get<int>();
      else if (key == "H") o.H = val.get<double>();
      else if (key == "L") o.L = val.get<double>();
      else if (key == "criterion") o.criterion = val.get<std::string>();
      else if (key == "inner") o.inner = val.get<std::string>();
      else if (key == "sigma") o.sigma = val.get<double>();
      else if (key == "iters") o.iters = val.get<long>();
      else if (key == "budget") o.budget = val.get<long>();
      else if (key == "seed") o.seed = val.get<std::uint64_t>();
      else if (key == "target_gap") o.target_gap = val.get<double>();
      else if (key == "R0") o.R0 = val.get<double>();
      else if (key == "stages") o.stages = val.get<int>();
      else if (key == "x0_scale") o.x0_scale = val.get<double>();
      else if (key == "fstar_mode") o.fstar_mode = val.get<std::string>();
      else if (key == "fstar_registry") o.fstar_registry = val.get<std::string>();
      else if (key == "out") o.out = val.get<std::string>();
      else if (key == "timing") o.timing = val.get<bool>();
      else if (key == "weight_full") o.weight_full = val.get<double>();
      else if (key == "inject_fault") o.inject_fault = val.get<std::string>();
      else throw contract_error("unknown config key: " + key);
    } catch (const json::exception& e) {
      throw contract_error("config key " + key + ": " + e.what());
    }
  }
}

CmdResult cli_generate(const GenerateOptions& o) {
  if (o.out.empty()) throw contract_error("generate needs --out");
  CompositeProblem prob;
  if (o.problem == "logsumexp-quad") {
    if (o.n < 1 || o.m < 1) throw contract_error("n and m must be positive");
    if (!(o.density > 0.0 && o.density <= 1.0)) throw contract_error("density must lie in (0,1]");
    ExperimentSpec spec;
    spec.n = o.n;
    spec.m = o.m;
    spec.density = o.density;
    spec.seed = o.seed;
    prob = gen_logsumexp_quadratic(spec);
  } else if (o.problem == "quadratic") {
    if (o.d < 1) throw contract_error("d must be positive");
    if (!(o.mu > 0.0) || !(o.L >= o.mu)) throw contract_error("need 0 < mu <= L");
    prob = gen_quadratic(o.d, o.mu, o.L, o.seed);
  } else if (o.problem == "lasso") {
    if (o.d < 1 || o.m < 1) throw contract_error("d and m must be positive");
    if (!(o.reg > 0.0)) throw contract_error("reg must be positive");
    prob = gen_lasso(o.d, o.m, o.reg, o.seed);
  } else if (o.problem == "quartic") {
    if (o.d < 1) throw contract_error("d must be positive");
    prob = gen_quartic(o.d);
  } else {
    throw contract_error("unknown problem kind: " + o.problem);
  }
  save_problem(prob, o.out);
  std::ostringstream sum;
  sum << "kind=" << prob.kind << " dim=" << prob.dim
      << " L1f=" << format_double(prob.f.lip1)
      << " hash=" << hash_hex(problem_hash(prob)) << " -> " << o.out;
  CmdResult res;
  res.summary = sum.str();
  return res;
}

CmdResult cli_run(const RunOptions& o) {
  static const std::set<std::string> kMethods = {"am",      "am-restart", "catalyst", "sliding",
                                                 "fgm",     "acdm",       "ms"};
  if (!kMethods.count(o.method)) throw contract_error("unknown method: " + o.method);
  if (o.problem_file.empty()) throw contract_error("run needs --problem-file");
  if (o.p != 1 && o.p != 2) throw contract_error("order must be 1 or 2");
  const bool am_family = o.method == "am" || o.method == "am-restart";
  if (o.p == 2 && !am_family)
    throw contract_error("--p 2 needs the model-based engine (am, am-restart)");
  const StepCriterion crit = parse_criterion(o.criterion);
  if (crit != StepCriterion::exact && !am_family)
    throw contract_error("--criterion applies to am and am-restart runs");
  const Fault fault = parse_fault(o.inject_fault);
  if (fault != Fault::none && !am_family)
    throw contract_error("--inject-fault applies to am and am-restart runs");
  if (o.inner != "gd" && !(am_family || o.method == "catalyst" || o.method == "ms" ||
                           (o.method == "sliding" && o.inner == "exact")))
    throw contract_error("--inner does not apply to method " + o.method);
  if (!(o.sigma > 0.0 && o.sigma < 1.0)) throw contract_error("sigma must lie in (0,1)");
  if (o.iters < 1) throw contract_error("iters must be positive");
  if (o.budget < 1) throw contract_error("budget must be positive");
  if (!(o.weight_full > 0.0)) throw contract_error("weight-full must be positive");
  if (o.target_gap < 0.0) throw contract_error("target-gap must be nonnegative");
  if (o.stages < 0) throw contract_error("stages must be nonnegative");
  if (o.fstar_mode != "known" && o.fstar_mode != "best-run")
    throw contract_error("fstar-mode must be known or best-run");
  if (o.fstar_mode == "best-run" && o.fstar_registry.empty())
    throw contract_error("best-run mode needs --fstar-registry");

  const CompositeProblem prob = load_problem(o.problem_file);
  const std::string hash = hash_hex(problem_hash(prob));
  Vector x0 = Vector::Zero(prob.dim);
  if (o.x0_scale != 0.0) x0 = Vector::Constant(prob.dim, o.x0_scale);

  OracleLedger ledger;
  ledger.weight_full = o.weight_full;
  const double F0 = eval_value(prob, Term::F, x0);

  std::vector<RawRow> rows;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&]() {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  IterCallback cb = [&](const AmState&, const IterRecord& rec) {
    RawRow r;
    r.k = static_cast<long>(rows.size()) + 1;
    r.F = rec.F_y;
    r.eta = rec.eta;
    r.sig = rec.sigma_residual;
    r.psi = rec.psi_gap;
    r.inner_cum = rec.inner_cum;
    r.wf = ledger.weighted(Part::f);
    r.wg = ledger.weighted(Part::g);
    if (o.timing) r.ms = elapsed_ms();
    rows.push_back(r);
  };

  RunStatus status = RunStatus::completed;
  std::string note;
  Vector y_final = x0;
  json derived = json::object();

  if (o.method == "am" || o.method == "am-restart") {
    AmConfig cfg;
    cfg.p = o.p;
    cfg.H = o.H > 0.0 ? o.H : (o.p + 1) * prob.lip_f_at(o.p);
    if (!(o.H > 0.0)) derived["H"] = cfg.H;
    cfg.sigma = o.sigma;
    cfg.criterion = crit;
    cfg.max_iters = o.iters;
    cfg.target_gap = o.target_gap;
    cfg.inner_budget = o.budget;
    cfg.fault = fault;
    const Subsolver sub = crit == StepCriterion::exact
                              ? Subsolver::closed_form()
                              : Subsolver::with_inner(make_inner_solver(o.inner, o.seed));
    if (o.method == "am") {
      AmResult res = am_run(prob, cfg, x0, sub, &ledger, cb);
      status = res.status;
      note = res.note;
      y_final = res.y;
    } else {
      if (!prob.uc) throw contract_error("am-restart needs uniform-convexity data");
      RestartSchedule sched;
      sched.r = prob.uc->r;
      sched.sigma_r = prob.uc->sigma_r;
      sched.p = o.p;
      sched.H = cfg.H;
      if (o.R0 > 0.0) {
        sched.R0 = o.R0;
      } else if (prob.x_star) {
        sched.R0 = std::max((x0 - *prob.x_star).norm(), 1e-12);
      } else {
        const double gnorm = grad_F(prob, x0, &ledger).norm();
        sched.R0 = std::max(
            std::pow(sched.r * gnorm / sched.sigma_r, 1.0 / (sched.r - 1.0)), 1e-12);
      }
      sched.K = o.target_gap > 0.0
                    ? stages_for_target(sched.R0, sched.r, sched.sigma_r, o.target_gap)
                    : o.stages;
      if (!(o.R0 > 0.0)) derived["R0"] = sched.R0;
      if (o.target_gap > 0.0) derived["stages"] = sched.K;
      RestartResult rr = restart_run(prob, sched, x0, sub, cfg, &ledger, cb);
      status = rr.status;
      y_final = rr.z;
      if (o.target_gap > 0.0 && status != RunStatus::converged && prob.f_star && !rows.empty()) {
        status = rows.back().F - *prob.f_star <= o.target_gap ? RunStatus::converged
                                                              : RunStatus::budget_exhausted;
      }
      std::ostringstream warn;
      for (std::size_t i = 0; i < rr.warnings.size(); ++i) {
        if (i) warn << "; ";
        warn << rr.warnings[i];
      }
      note = warn.str();
    }
  } else if (o.method == "catalyst") {
    const CompositeProblem gp = as_g_only(prob);
    double H = o.H;
    if (!(H > 0.0)) {
      if (!std::isfinite(gp.g.lip1))
        throw contract_error("catalyst needs --H when the gradient constant is unknown");
      H = gp.g.lip1;
      derived["H"] = H;
    }
    CatalystConfig cc;
    cc.H = H;
    cc.outer_iters = o.iters;
    cc.target_gap = o.target_gap;
    cc.inner_budget = o.budget;
    CatalystSolver solver(gp, cc, make_inner_solver(o.inner, o.seed));
    AmResult res = solver.run(x0, &ledger, cb);
    status = res.status;
    note = res.note;
    y_final = res.y;
  } else if (o.method == "sliding") {
    SlidingConfig sc;
    if (o.H > 0.0) {
      sc.Hf = o.H;
    } else {
      if (!std::isfinite(prob.f.lip1))
        throw contract_error("sliding needs --H when the gradient constant of f is unknown");
      sc.Hf = 2.0 * prob.f.lip1;
      derived["H"] = sc.Hf;
    }
    sc.outer_iters = o.iters;
    sc.target_gap = o.target_gap;
    sc.inner_budget = o.budget;
    sc.exact_inner = o.inner == "exact";
    SlidingResult res = sliding_run(prob, sc, x0, &ledger, cb);
    status = res.status;
    note = res.note;
    y_final = res.y;
  } else if (o.method == "fgm") {
    if (!prob.g.is_zero && !prob.g.smooth)
      throw contract_error("fgm needs a smooth objective");
    double L = o.L;
    if (!(L > 0.0)) {
      L = prob.f.lip1 + (prob.g.is_zero ? 0.0 : prob.g.lip1);
      if (!std::isfinite(L))
        throw contract_error("fgm needs --L when gradient constants are unknown");
      derived["L"] = L;
    }
    AmResult res = fgm_run(prob, L, x0, o.iters, &ledger, o.target_gap, cb);
    status = res.status;
    note = res.note;
    y_final = res.y;
  } else if (o.method == "acdm") {
    const InnerObjective obj = make_composite_objective(prob, &ledger, Level::outer);
    if (!obj.coord_grad || obj.coord_lip.size() == 0)
      throw contract_error("acdm needs coordinate oracles and per-coordinate constants");
    AcdmConfig ac;
    ac.coord_lip = obj.coord_lip;
    ac.budget = o.budget;
    ac.seed = o.seed;
    const long cadence = prob.dim;
    long sweep = 0;
    bool primed = false;
    auto stop = [&](const Vector& x) {
      const double F = eval_value(prob, Term::F, x, &ledger);
      const bool met =
          o.target_gap > 0.0 && prob.f_star && (F - *prob.f_star <= o.target_gap);
      if (!primed) {
        primed = true;
        return met;
      }
      ++sweep;
      RawRow r;
      r.k = sweep;
      r.F = F;
      r.inner_cum = sweep * cadence;
      r.wf = ledger.weighted(Part::f);
      r.wg = ledger.weighted(Part::g);
      if (o.timing) r.ms = elapsed_ms();
      rows.push_back(r);
      return met;
    };
    AcdmResult ar = acdm_run(obj, ac, x0, stop);
    status = ar.status;
    if (o.target_gap == 0.0 && status == RunStatus::budget_exhausted)
      status = RunStatus::completed;
    y_final = ar.y;
  } else {  // ms
    double L = o.L;
    if (!(L > 0.0)) {
      L = prob.f.lip1 + (prob.g.is_zero ? 0.0 : prob.g.lip1);
      if (!std::isfinite(L))
        throw contract_error("ms needs --L when gradient constants are unknown");
      derived["L"] = L;
    }
    MsConfig mc;
    mc.sigma = o.sigma;
    mc.outer_iters = o.iters;
    mc.inner_budget = o.budget;
    mc.target_gap = o.target_gap;
    auto inner = make_inner_solver(o.inner, o.seed);
    AmResult res = ms_run(prob, L, *inner, x0, mc, &ledger, cb);
    status = res.status;
    note = res.note;
    y_final = res.y;
  }

  std::optional<double> fstar;
  std::string fstar_source = "none";
  if (o.fstar_mode == "known") {
    if (prob.f_star) {
      fstar = *prob.f_star;
      fstar_source = "instance";
    }
  } else {
    double best_seen = F0;
    for (const RawRow& r : rows)
      if (std::isfinite(r.F)) best_seen = std::min(best_seen, r.F);
    fstar = resolve_best_run_fstar(o.fstar_registry, hash, best_seen);
    fstar_source = "registry";
  }

  Trace tr;
  tr.comments.push_back("format_version=1");
  tr.comments.push_back("problem_hash=" + hash);
  tr.comments.push_back("problem_kind=" + prob.kind);
  tr.comments.push_back("method=" + o.method);
  tr.comments.push_back("config=" + run_options_to_json(o).dump());
  if (!derived.empty()) tr.comments.push_back("derived=" + derived.dump());
  if (!o.config_file_json.empty()) tr.comments.push_back("config_file=" + o.config_file_json);
  tr.comments.push_back("fstar_mode=" + o.fstar_mode);
  tr.comments.push_back("fstar=" + (fstar ? format_double(*fstar) : std::string("NA")));
  tr.comments.push_back("fstar_source=" + fstar_source);
  tr.comments.push_back("start_value=" + format_double(F0));
  tr.comments.push_back("status=" + status_name(status));
  if (!note.empty()) tr.comments.push_back("note=" + one_line(note));
  for (const RawRow& r : rows) {
    TraceRecord t;
    t.iter = r.k;
    if (fstar) {
      t.gap = r.F - *fstar;
      const double den = F0 - *fstar;
      t.rel_gap = den > 0.0 ? (r.F - *fstar) / den : kNan;
    }
    t.wf_calls = r.wf;
    t.wg_calls = r.wg;
    t.inner_cum = r.inner_cum;
    t.wall_ms = r.ms;
    t.eta = r.eta;
    t.sigma_res = r.sig;
    t.psi_gap = r.psi;
    tr.rows.push_back(t);
  }
  const std::string csv = trace_to_csv(tr);

  CmdResult res;
  res.exit_code = status == RunStatus::budget_exhausted ? 2 : 0;
  std::ostringstream sum;
  if (!o.out.empty()) {
    atomic_write_file(o.out, csv);
    sum << "wrote " << o.out << "\n";
  } else {
    res.output = csv;
  }
  sum << o.method << ": status=" << status_name(status) << " iters=" << rows.size()
      << " wf=" << format_double(ledger.weighted(Part::f))
      << " wg=" << format_double(ledger.weighted(Part::g));
  if (fstar && !rows.empty()) sum << " final_gap=" << format_double(rows.back().F - *fstar);
  if (!note.empty()) sum << "\n  note: " << one_line(note);
  res.summary = sum.str();
  return res;
}

namespace {

struct LoadedTrace {
  std::string path;
  std::string label;
  Trace tr;
  long iters = 0;
  double final_rel = kNan;
  double final_gap = kNan;
  bool reached = false;
  double it_t = kNan;
  double wf_t = kNan;
  double wg_t = kNan;
  long inner_t = -1;
};

struct AssertSpec {
  std::string lhs;
  std::string rhs;
  bool strict = false;
  std::string axis;  // wf | wg | iters
};

AssertSpec parse_assert(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw contract_error("assert needs an axis: " + s);
  AssertSpec a;
  a.axis = s.substr(colon + 1);
  if (a.axis != "wf" && a.axis != "wg" && a.axis != "iters")
    throw contract_error("assert axis must be wf, wg or iters: " + s);
  const std::string body = s.substr(0, colon);
  auto le = body.find("<=");
  if (le != std::string::npos) {
    a.lhs = body.substr(0, le);
    a.rhs = body.substr(le + 2);
  } else {
    auto lt = body.find('<');
    if (lt == std::string::npos) throw contract_error("assert needs < or <=: " + s);
    a.strict = true;
    a.lhs = body.substr(0, lt);
    a.rhs = body.substr(lt + 1);
  }
  if (a.lhs.empty() || a.rhs.empty()) throw contract_error("assert needs two labels: " + s);
  return a;
}

}  // namespace

CmdResult cli_compare(const CompareOptions& o) {
  if (o.traces.empty()) throw contract_error("compare needs at least one trace");
  if (!(o.target_rel_gap > 0.0)) throw contract_error("target-rel-gap must be positive");

  std::vector<LoadedTrace> ls;
  std::string hash;
  for (const std::string& path : o.traces) {
    LoadedTrace lt;
    lt.path = path;
    lt.tr = trace_from_csv(read_text_file(path));
    auto h = trace_comment_value(lt.tr, "problem_hash");
    if (!h) throw contract_error("trace missing problem_hash: " + path);
    if (hash.empty()) hash = *h;
    else if (*h != hash)
      throw contract_error("problem hashes differ: " + path + " is " + *h + ", expected " + hash);
    auto m = trace_comment_value(lt.tr, "method");
    lt.label = m ? *m : std::filesystem::path(path).stem().string();
    ls.push_back(std::move(lt));
  }
  std::map<std::string, int> seen;
  for (LoadedTrace& lt : ls) {
    const int n = ++seen[lt.label];
    if (n > 1) lt.label += "#" + std::to_string(n);
  }

  for (LoadedTrace& lt : ls) {
    lt.iters = static_cast<long>(lt.tr.rows.size());
    if (!lt.tr.rows.empty()) {
      lt.final_rel = lt.tr.rows.back().rel_gap;
      lt.final_gap = lt.tr.rows.back().gap;
    }
    for (const TraceRecord& r : lt.tr.rows) {
      if (std::isfinite(r.rel_gap) && r.rel_gap <= o.target_rel_gap) {
        lt.reached = true;
        lt.it_t = static_cast<double>(r.iter);
        lt.wf_t = r.wf_calls;
        lt.wg_t = r.wg_calls;
        lt.inner_t = r.inner_cum;
        break;
      }
    }
  }

  std::ostringstream out;
  out << "problem_hash=" << hash << "  target_rel_gap=" << format_double(o.target_rel_gap)
      << "\n";
  std::size_t lw = 6;
  for (const LoadedTrace& lt : ls) lw = std::max(lw, lt.label.size());
  auto cell = [](double v) -> std::string {
    if (!std::isfinite(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
  };
  out << std::left << std::setw(static_cast<int>(lw) + 2) << "method" << std::right
      << std::setw(8) << "iters" << std::setw(12) << "final_rel" << std::setw(8) << "it@t"
      << std::setw(12) << "wf@t" << std::setw(12) << "wg@t" << std::setw(10) << "inner@t"
      << std::setw(10) << "wf_ratio" << std::setw(10) << "wg_ratio" << "\n";
  const LoadedTrace& base = ls.front();
  for (const LoadedTrace& lt : ls) {
    double wf_ratio = kNan;
    double wg_ratio = kNan;
    if (lt.reached && base.reached) {
      if (base.wf_t > 0.0) wf_ratio = lt.wf_t / base.wf_t;
      if (base.wg_t > 0.0) wg_ratio = lt.wg_t / base.wg_t;
    }
    out << std::left << std::setw(static_cast<int>(lw) + 2) << lt.label << std::right
        << std::setw(8) << lt.iters << std::setw(12) << cell(lt.final_rel) << std::setw(8)
        << cell(lt.it_t) << std::setw(12) << cell(lt.wf_t) << std::setw(12) << cell(lt.wg_t)
        << std::setw(10) << format_long(lt.inner_t) << std::setw(10) << cell(wf_ratio)
        << std::setw(10) << cell(wg_ratio) << "\n";
  }

  if (!o.out.empty()) {
    std::ostringstream lf;
    lf << "method,axis,x,y\n";
    for (const LoadedTrace& lt : ls) {
      for (const TraceRecord& r : lt.tr.rows) {
        const std::string y = format_double(r.rel_gap);
        lf << lt.label << ",iter_to_gap," << format_long(r.iter) << "," << y << "\n";
        lf << lt.label << ",wf_to_gap," << format_double(r.wf_calls) << "," << y << "\n";
        lf << lt.label << ",wg_to_gap," << format_double(r.wg_calls) << "," << y << "\n";
      }
    }
    atomic_write_file(o.out, lf.str());
  }

  bool all_ok = true;
  auto find_label = [&](const std::string& label) -> const LoadedTrace& {
    for (const LoadedTrace& lt : ls)
      if (lt.label == label) return lt;
    throw contract_error("assert references unknown trace label: " + label);
  };
  auto axis_value = [&](const LoadedTrace& lt, const std::string& axis) {
    if (!lt.reached) return std::numeric_limits<double>::infinity();
    if (axis == "wf") return lt.wf_t;
    if (axis == "wg") return lt.wg_t;
    return lt.it_t;
  };
  for (const std::string& s : o.asserts) {
    const AssertSpec a = parse_assert(s);
    const LoadedTrace& A = find_label(a.lhs);
    const LoadedTrace& B = find_label(a.rhs);
    const double va = axis_value(A, a.axis);
    const double vb = axis_value(B, a.axis);
    const bool ok = A.reached && (a.strict ? va < vb : va <= vb);
    all_ok = all_ok && ok;
    out << (ok ? "ASSERT OK: " : "ASSERT FAIL: ") << s << "  (" << a.lhs << "="
        << format_double(va) << ", " << a.rhs << "=" << format_double(vb) << ")\n";
  }

  CmdResult res;
  res.output = out.str();
  res.exit_code = all_ok ? 0 : 3;
  return res;
}

CmdResult cli_verify(const VerifyOptions& o) {
  const Fault fault = parse_fault(o.inject_fault);
  const std::vector<SuiteResult> results = run_verification(fault, o.suite);
  bool all = true;
  for (const SuiteResult& r : results) all = all && r.pass;

  CmdResult res;
  res.exit_code = all ? 0 : 3;
  if (o.json_lines) {
    res.output = suite_results_json(results);
    return res;
  }
  std::size_t w = 0;
  for (const SuiteResult& r : results) w = std::max(w, r.name.size());
  std::ostringstream out;
  int passed = 0;
  for (const SuiteResult& r : results) {
    passed += r.pass ? 1 : 0;
    out << std::left << std::setw(static_cast<int>(w) + 2) << r.name
        << (r.pass ? "PASS  " : "FAIL  ") << r.details << "\n";
  }
  out << passed << "/" << results.size() << " suites passed\n";
  if (!all) {
    std::vector<SuiteResult> failing;
    for (const SuiteResult& r : results)
      if (!r.pass) failing.push_back(r);
    out << "failing suites:\n" << suite_results_json(failing);
  }
  res.output = out.str();
  return res;
}

CmdResult cli_grid(const GridOptions& o) {
  const json cfg = parse_json_file(o.config_file);
  if (!cfg.is_object() || !cfg.contains("cells") || !cfg["cells"].is_array() ||
      cfg["cells"].empty())
    throw contract_error("grid config needs a nonempty cells array");
  std::vector<RunOptions> cells;
  for (const json& c : cfg["cells"]) {
    RunOptions r;
    apply_json_to_options(c, r);
    if (r.out.empty()) throw contract_error("grid cells must set out");
    cells.push_back(std::move(r));
  }

  int threads = o.threads;
  if (threads <= 0) {
    if (const char* env = std::getenv("ACCELBENCH_THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp<int>(threads, 1, static_cast<int>(cells.size()));

  std::vector<int> codes(cells.size(), 0);
  std::vector<std::string> lines(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      std::string head = "cell " + std::to_string(i) + " [" + cells[i].out + "]: ";
      try {
        const CmdResult r = cli_run(cells[i]);
        codes[i] = r.exit_code;
        lines[i] = head + "exit " + std::to_string(r.exit_code) + "  " + one_line(r.summary);
      } catch (const contract_error& e) {
        codes[i] = 64;
        lines[i] = head + "exit 64  " + e.what();
      } catch (const invariant_error& e) {
        codes[i] = 3;
        lines[i] = head + "exit 3  " + e.what();
      } catch (const std::exception& e) {
        codes[i] = 3;
        lines[i] = head + "exit 3  " + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  std::ostringstream out;
  for (const std::string& l : lines) out << l << "\n";
  CmdResult res;
  res.output = out.str();
  res.exit_code = *std::max_element(codes.begin(), codes.end());
  return res;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"accelbench: composite convex optimization benchmark harness"};
  app.require_subcommand(1);

  GenerateOptions g;
  CLI::App* gen = app.add_subcommand("generate", "materialize a benchmark instance");
  gen->add_option("--problem", g.problem, "logsumexp-quad | quadratic | lasso | quartic")
      ->capture_default_str();
  gen->add_option("--n", g.n, "dimension (logsumexp-quad)")->capture_default_str();
  gen->add_option("--m", g.m, "row / sample count")->capture_default_str();
  gen->add_option("--density", g.density, "sparse row density")->capture_default_str();
  gen->add_option("--d", g.d, "dimension (quadratic, lasso, quartic)")->capture_default_str();
  gen->add_option("--mu", g.mu, "smallest eigenvalue (quadratic)")->capture_default_str();
  gen->add_option("--L", g.L, "largest eigenvalue (quadratic)")->capture_default_str();
  gen->add_option("--reg", g.reg, "l1 weight (lasso)")->capture_default_str();
  gen->add_option("--seed", g.seed, "generator seed")->capture_default_str();
  gen->add_option("--out", g.out, "output problem file")->required();

  RunOptions r;
  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run one method on one instance, emit a trace");
  run->add_option("--problem-file", r.problem_file, "serialized instance");
  run->add_option("--method", r.method, "am | am-restart | catalyst | sliding | fgm | acdm | ms")
      ->capture_default_str();
  run->add_option("--p", r.p, "model order for the engine (1 or 2)")->capture_default_str();
  run->add_option("--H", r.H, "model regularization constant; 0 derives (p+1)*L_p")
      ->capture_default_str();
  run->add_option("--L", r.L, "gradient constant for fgm/ms; 0 derives")->capture_default_str();
  run->add_option("--criterion", r.criterion,
                  "step acceptance: exact | grad-ratio | contraction | sigma-residual")
      ->capture_default_str();
  run->add_option("--inner", r.inner, "step subproblem solver: gd | acdm | exact")
      ->capture_default_str();
  run->add_option("--sigma", r.sigma, "inexactness parameter in (0,1)")->capture_default_str();
  run->add_option("--iters", r.iters, "outer iteration budget")->capture_default_str();
  run->add_option("--budget", r.budget, "inner / coordinate step budget")->capture_default_str();
  run->add_option("--seed", r.seed, "seed for randomized components")->capture_default_str();
  run->add_option("--target-gap", r.target_gap, "stop when F - F* falls below this")
      ->capture_default_str();
  run->add_option("--R0", r.R0, "restart radius bound; 0 derives")->capture_default_str();
  run->add_option("--stages", r.stages, "restart stages when no target gap is set")
      ->capture_default_str();
  run->add_option("--x0-scale", r.x0_scale, "start from x0-scale * ones (default origin)")
      ->capture_default_str();
  run->add_option("--fstar-mode", r.fstar_mode, "known | best-run")->capture_default_str();
  run->add_option("--fstar-registry", r.fstar_registry, "best-value registry JSON");
  run->add_option("--out", r.out, "trace CSV path (default: stdout)");
  run->add_flag("--timing", r.timing, "record wall-clock milliseconds per row");
  run->add_option("--weight-full", r.weight_full, "cost of a full gradient in coordinate units")
      ->capture_default_str();
  run->add_option("--inject-fault", r.inject_fault, "momentum | eta-band");
  run->add_option("--config", config_path, "JSON config with the same keys; flags override");

  CompareOptions c;
  CLI::App* cmp = app.add_subcommand("compare", "tabulate traces of one instance");
  cmp->add_option("traces", c.traces, "trace CSV files")->required()->expected(-1);
  cmp->add_option("--target-rel-gap", c.target_rel_gap, "relative gap threshold")
      ->capture_default_str();
  cmp->add_option("--assert", c.asserts, "ordering claim, e.g. am<ms:wg or am<=fgm:wf");
  cmp->add_option("--out", c.out, "long-format curves CSV (method,axis,x,y)");

  VerifyOptions v;
  CLI::App* ver = app.add_subcommand("verify", "run the internal verification battery");
  ver->add_flag("--json", v.json_lines, "machine-readable one JSON object per suite");
  ver->add_option("--suite", v.suite, "run a single named suite");
  ver->add_option("--inject-fault", v.inject_fault, "momentum | eta-band");

  GridOptions gr;
  CLI::App* grid = app.add_subcommand("grid", "run a batch of configurations concurrently");
  grid->add_option("--config", gr.config_file, "JSON with a cells array of run configs")
      ->required();
  grid->add_option("--threads", gr.threads, "0: ACCELBENCH_THREADS env, then hardware count")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  try {
    CmdResult res;
    if (gen->parsed()) {
      res = cli_generate(g);
    } else if (run->parsed()) {
      if (!config_path.empty()) {
        const json file = parse_json_file(config_path);
        RunOptions merged;
        apply_json_to_options(file, merged);
        merged.config_file_json = file.dump();
        auto keep = [&](const std::string& flag, auto member) {
          if (run->get_option(flag)->count() > 0) merged.*member = r.*member;
        };
        keep("--problem-file", &RunOptions::problem_file);
        keep("--method", &RunOptions::method);
        keep("--p", &RunOptions::p);
        keep("--H", &RunOptions::H);
        keep("--L", &RunOptions::L);
        keep("--criterion", &RunOptions::criterion);
        keep("--inner", &RunOptions::inner);
        keep("--sigma", &RunOptions::sigma);
        keep("--iters", &RunOptions::iters);
        keep("--budget", &RunOptions::budget);
        keep("--seed", &RunOptions::seed);
        keep("--target-gap", &RunOptions::target_gap);
        keep("--R0", &RunOptions::R0);
        keep("--stages", &RunOptions::stages);
        keep("--x0-scale", &RunOptions::x0_scale);
        keep("--fstar-mode", &RunOptions::fstar_mode);
        keep("--fstar-registry", &RunOptions::fstar_registry);
        keep("--out", &RunOptions::out);
        keep("--timing", &RunOptions::timing);
        keep("--weight-full", &RunOptions::weight_full);
        keep("--inject-fault", &RunOptions::inject_fault);
        r = merged;
      }
      res = cli_run(r);
    } else if (cmp->parsed()) {
      res = cli_compare(c);
    } else if (ver->parsed()) {
      res = cli_verify(v);
    } else {
      res = cli_grid(gr);
    }
    if (!res.output.empty()) {
      std::fputs(res.output.c_str(), stdout);
      if (res.output.back() != '\n') std::fputc('\n', stdout);
    }
    if (!res.summary.empty()) std::fprintf(stderr, "%s\n", res.summary.c_str());
    return res.exit_code;
  } catch (const contract_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 64;
  } catch (const invariant_error& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace accel

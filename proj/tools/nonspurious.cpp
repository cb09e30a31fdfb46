// nonspurious — discrete two-point Dirichlet problems by direct energy
// minimization: solve instances, run convergence studies against an oracle,
// verify a-priori bounds, reproduce the linear spurious/non-spurious demos,
// and check the structural hypotheses on f.
//
// Exit codes:
//   0  success
//   1  assumption-check failure (or an evaluation-domain failure)
//   2  singular system
//   3  expression parse error
//   4  solver non-convergence
//   5  bad flags, bad schedule, or bad config

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nonspurious/oracle.hpp"
#include "nonspurious/serialize.hpp"

namespace ns = nonspurious;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssumption = 1;
constexpr int kExitSingular = 2;
constexpr int kExitParse = 3;
constexpr int kExitNoConvergence = 4;
constexpr int kExitBadFlags = 5;

struct SourceOpts {
  std::string builtin, f_text, F_text, config_path;
  double a = 0.0, b = 0.0, gamma = 0.0, xrange = 0.0;
  int tsamples = 0, xsamples = 0;
  CLI::Option* opt_a = nullptr;
  CLI::Option* opt_b = nullptr;
  CLI::Option* opt_gamma = nullptr;
  CLI::Option* opt_xrange = nullptr;
  CLI::Option* opt_tsamples = nullptr;
  CLI::Option* opt_xsamples = nullptr;
};

void add_source_flags(CLI::App* cmd, SourceOpts& src) {
  cmd->add_option("--builtin", src.builtin,
                  "catalogue entry: affine, exp, atan, cubic, sqrt, linear");
  cmd->add_option("--f", src.f_text, "expression for f(t,x)");
  cmd->add_option("--F", src.F_text,
                  "closed-form antiderivative of f in x (else quadrature)");
  cmd->add_option("--config", src.config_path,
                  "key=value config file (flags win on conflict)");
  src.opt_a = cmd->add_option("--a", src.a, "growth constant a > 0");
  src.opt_b = cmd->add_option("--b", src.b, "growth constant b > 0");
  src.opt_gamma =
      cmd->add_option("--gamma", src.gamma, "growth exponent in [0,1)");
  src.opt_xrange = cmd->add_option("--xrange", src.xrange,
                                   "half-width of the x sampling range");
  src.opt_tsamples =
      cmd->add_option("--tsamples", src.tsamples, "t sampling points");
  src.opt_xsamples =
      cmd->add_option("--xsamples", src.xsamples, "x sampling points");
}

struct SolverOpts {
  double tol = 1e-12;
  int max_iter = 50;
  double armijo = 1e-4;
  double backtrack = 0.5;
  bool finite_difference = false;
  bool gradient_descent = false;
  bool override_assumptions = false;
};

void add_solver_flags(CLI::App* cmd, SolverOpts& opt) {
  cmd->add_option("--tol", opt.tol, "gradient max-norm tolerance");
  cmd->add_option("--max-iter", opt.max_iter, "Newton iteration cap");
  cmd->add_option("--armijo", opt.armijo, "Armijo decrease constant");
  cmd->add_option("--backtrack", opt.backtrack, "line-search backtrack factor");
  cmd->add_flag("--fd", opt.finite_difference,
                "force finite-difference derivatives");
  cmd->add_flag("--gradient-descent", opt.gradient_descent,
                "use damped gradient descent instead of Newton");
  cmd->add_flag("--override-assumptions", opt.override_assumptions,
                "skip the H1/H2 checks (research use; results may lose "
                "their guarantees)");
}

ns::NewtonConfig newton_config(const SolverOpts& opt) {
  ns::NewtonConfig cfg;
  cfg.residual_tol = opt.tol;
  cfg.max_iter = opt.max_iter;
  cfg.armijo_c = opt.armijo;
  cfg.backtrack_factor = opt.backtrack;
  cfg.derivative_mode = opt.finite_difference
                            ? ns::DerivativeMode::FiniteDifference
                            : ns::DerivativeMode::Symbolic;
  cfg.gradient_descent = opt.gradient_descent;
  return cfg;
}

ns::AssumptionPolicy policy_of(const SolverOpts& opt) {
  if (opt.override_assumptions) {
    std::cerr << "warning: assumption checks skipped; without H1/H2 the "
                 "minimizer may not exist, be non-unique, or be spurious\n";
    return ns::AssumptionPolicy::Skip;
  }
  return ns::AssumptionPolicy::Enforce;
}

struct BuiltProblem {
  ns::Nonlinearity nl;
  ns::SamplingConfig sampling;
  bool linear_path_only = false;
};

BuiltProblem build_from_source(const SourceOpts& src) {
  ns::ProblemConfig file_cfg;
  if (!src.config_path.empty()) {
    std::ifstream in(src.config_path);
    if (!in)
      throw ns::ConfigError("cannot open config file '" + src.config_path +
                            "'");
    file_cfg = ns::parse_config(in);
  }

  const bool have_builtin = !src.builtin.empty();
  const bool have_expr = !src.f_text.empty() || file_cfg.f.has_value();
  if (have_builtin == have_expr)
    throw ns::ConfigError(
        "exactly one nonlinearity source required: --builtin NAME, or an "
        "f expression via --f/--config");

  // Flags win over config-file values.
  std::optional<double> a = file_cfg.a, b = file_cfg.b, gamma = file_cfg.gamma;
  if (src.opt_a && src.opt_a->count() > 0) a = src.a;
  if (src.opt_b && src.opt_b->count() > 0) b = src.b;
  if (src.opt_gamma && src.opt_gamma->count() > 0) gamma = src.gamma;

  std::optional<ns::H2aConstants> h2a;
  if (a || b || gamma) {
    if (!(a && b && gamma))
      throw ns::ConfigError("a, b, gamma must be supplied together");
    if (!(*a > 0.0) || !(*b > 0.0) || !(*gamma >= 0.0 && *gamma < 1.0))
      throw ns::ConfigError(
          "growth constants need a > 0, b > 0, gamma in [0,1)");
    h2a = ns::H2aConstants{*a, *b, *gamma};
  }

  ns::SamplingConfig sampling;
  if (file_cfg.xrange) sampling.x_range = *file_cfg.xrange;
  if (file_cfg.tsamples) sampling.t_samples = *file_cfg.tsamples;
  if (file_cfg.xsamples) sampling.x_samples = *file_cfg.xsamples;
  if (src.opt_xrange && src.opt_xrange->count() > 0)
    sampling.x_range = src.xrange;
  if (src.opt_tsamples && src.opt_tsamples->count() > 0)
    sampling.t_samples = src.tsamples;
  if (src.opt_xsamples && src.opt_xsamples->count() > 0)
    sampling.x_samples = src.xsamples;

  if (have_builtin) {
    const ns::CatalogueEntry* entry = ns::find_catalogue_entry(src.builtin);
    if (!entry)
      throw ns::ConfigError("unknown catalogue entry '" + src.builtin + "'");
    if (!h2a && entry->has_h2a)
      h2a = ns::H2aConstants{entry->a, entry->b, entry->gamma};
    return {ns::build(std::string(entry->f), std::string(entry->F), h2a,
                      entry->name),
            sampling, entry->linear_path_only};
  }

  const std::string f_text =
      !src.f_text.empty() ? src.f_text : *file_cfg.f;
  std::optional<std::string> F_text;
  if (file_cfg.F) F_text = *file_cfg.F;
  if (!src.F_text.empty()) F_text = src.F_text;
  return {ns::build(f_text, F_text, h2a), sampling, false};
}

void reject_linear_only(const BuiltProblem& bp) {
  if (bp.linear_path_only)
    throw ns::ConfigError("catalogue entry '" + bp.nl.label() +
                          "' stands in for the lambda family and is usable "
                          "only by the 'spurious' demo and 'check'");
}

std::vector<int> parse_schedule(const std::string& text) {
  std::vector<int> ns_list;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      ns_list.push_back(v);
    } catch (const std::exception&) {
      throw ns::ConfigError("bad schedule entry '" + item +
                            "' (want comma-separated integers)");
    }
  }
  if (ns_list.empty()) throw ns::ConfigError("empty schedule");
  for (size_t i = 1; i < ns_list.size(); ++i)
    if (ns_list[i] <= ns_list[i - 1])
      throw ns::ConfigError("schedule entries must be strictly increasing");
  return ns_list;
}

int write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return kExitOk;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open output file '" << path << "'\n";
    return kExitBadFlags;
  }
  out << content;
  return kExitOk;
}

std::string render_json(const ns::ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_solve(const SourceOpts& src, const SolverOpts& sopt, int n,
              const std::string& output, const std::string& format) {
  const BuiltProblem bp = build_from_source(src);
  reject_linear_only(bp);
  const ns::DiscreteBVP p(n, bp.nl);
  const ns::SolveReport r =
      ns::newton_solve(p, newton_config(sopt), {}, policy_of(sopt));

  std::string content;
  if (format == "json") {
    content = render_json(ns::solve_report_to_json(r));
  } else {
    std::stringstream ss;
    ns::write_solve_csv(ss, r);
    content = ss.str();
  }
  const int wc = write_output(output, content);
  if (wc != kExitOk) return wc;
  if (r.status == ns::SolveStatus::Singular) {
    std::cerr << "singular Hessian after " << r.iterations
              << " iteration(s); the minimizer is not defined without H2\n";
    return kExitSingular;
  }
  if (r.status == ns::SolveStatus::NoConvergence) {
    std::cerr << "no convergence after " << r.iterations
              << " iteration(s); residual " << ns::fmt17(r.final_residual)
              << "\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

int cmd_study(const SourceOpts& src, const SolverOpts& sopt,
              const std::string& schedule_text, const std::string& oracle_text,
              int n_ref, const std::string& output,
              const std::string& format) {
  const BuiltProblem bp = build_from_source(src);
  reject_linear_only(bp);

  ns::StudySchedule schedule;
  if (!schedule_text.empty()) schedule.ns = parse_schedule(schedule_text);
  schedule.newton = newton_config(sopt);
  if (n_ref > 0) schedule.n_ref = n_ref;
  if (oracle_text == "closed-form") {
    schedule.oracle = ns::OracleChoice::ClosedForm;
  } else if (oracle_text == "fine-grid") {
    schedule.oracle = ns::OracleChoice::FineGrid;
  } else {  // auto
    schedule.oracle = bp.nl.label() == "affine" ? ns::OracleChoice::ClosedForm
                                                : ns::OracleChoice::FineGrid;
  }

  const ns::ConvergenceReport report =
      ns::run_convergence_study(bp.nl, schedule, policy_of(sopt));

  std::string content;
  if (format == "json") {
    content = render_json(ns::study_to_json(report));
  } else {
    std::stringstream ss;
    ns::write_study_csv(ss, report);
    content = ss.str();
  }
  return write_output(output, content);
}

int cmd_verify(const SourceOpts& src, const SolverOpts& sopt,
               std::vector<int> ns_list, const std::string& schedule_text,
               const std::string& output, const std::string& format) {
  const BuiltProblem bp = build_from_source(src);
  reject_linear_only(bp);
  if (!schedule_text.empty()) ns_list = parse_schedule(schedule_text);

  const ns::VerifyReport report =
      ns::run_verify(bp.nl, ns_list, newton_config(sopt), policy_of(sopt));

  std::string content;
  if (format == "json") {
    content = render_json(ns::verify_to_json(report));
  } else {
    std::stringstream ss;
    ns::write_verify_csv(ss, report);
    content = ss.str();
  }
  return write_output(output, content);
}

int cmd_spurious(const std::string& output, const std::string& format) {
  const ns::SpuriousDemoReport report = ns::spurious_demo();
  std::string content;
  if (format == "json") {
    content = render_json(ns::spurious_to_json(report));
  } else {
    std::stringstream ss;
    ns::write_spurious_csv(ss, report);
    content = ss.str();
  }
  return write_output(output, content);
}

int cmd_check(const SourceOpts& src, double relaxed_a, bool have_relaxed_a,
              const std::string& output, const std::string& format) {
  const BuiltProblem bp = build_from_source(src);

  std::vector<ns::AssumptionVerdict> checks;
  checks.push_back(ns::check_H1(bp.nl));
  checks.push_back(ns::check_H2(bp.nl, bp.sampling));
  if (bp.nl.h2a()) checks.push_back(ns::check_H2a(bp.nl, bp.sampling));
  if (have_relaxed_a)
    checks.push_back(
        ns::check_relaxed_convexity(bp.nl, relaxed_a, bp.sampling));

  std::string content;
  if (format == "json") {
    content = render_json(ns::checks_to_json(checks));
  } else {
    std::stringstream ss;
    ns::write_checks_csv(ss, checks);
    content = ss.str();
  }
  const int wc = write_output(output, content);
  if (wc != kExitOk) return wc;

  int rc = kExitOk;
  for (const auto& v : checks) {
    if (v.pass) continue;
    rc = kExitAssumption;
    switch (v.hypothesis) {
      case ns::Hypothesis::H1:
        std::cerr << "check failed: H1 requires f(t,0) != 0 for t in [0,1] "
                     "(violated at t="
                  << ns::fmt17(v.witness->first) << ")\n";
        break;
      case ns::Hypothesis::H2:
        std::cerr << "check failed: H2 requires f(t,x) nondecreasing in x "
                     "(violated at t="
                  << ns::fmt17(v.witness->first)
                  << ", x=" << ns::fmt17(v.witness->second) << ")\n";
        break;
      case ns::Hypothesis::H2a:
        std::cerr << "check failed: H2a requires f(t,x) <= a + b|x|^gamma "
                     "(violated at t="
                  << ns::fmt17(v.witness->first)
                  << ", x=" << ns::fmt17(v.witness->second) << ")\n";
        break;
      case ns::Hypothesis::RelaxedConvexity:
        std::cerr << "check failed: x -> F(t,x) + (a/2pi) x^2 is not convex "
                     "(witness t="
                  << ns::fmt17(v.witness->first)
                  << ", x=" << ns::fmt17(v.witness->second) << ")\n";
        break;
    }
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Discrete two-point Dirichlet problems by direct energy minimization"};
  app.require_subcommand(1);

  // solve
  SourceOpts solve_src;
  SolverOpts solve_sopt;
  int solve_n = 64;
  std::string solve_output, solve_format = "json";
  CLI::App* solve_cmd =
      app.add_subcommand("solve", "minimize the energy at one grid size");
  add_source_flags(solve_cmd, solve_src);
  add_solver_flags(solve_cmd, solve_sopt);
  solve_cmd->add_option("--n", solve_n, "number of subintervals (>= 2)");
  solve_cmd->add_option("--output", solve_output, "output file (default stdout)");
  solve_cmd->add_option("--format", solve_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  // study
  SourceOpts study_src;
  SolverOpts study_sopt;
  std::string study_schedule, study_oracle = "auto";
  int study_n_ref = 0;
  std::string study_output, study_format = "csv";
  CLI::App* study_cmd = app.add_subcommand(
      "study", "convergence study against an oracle over an n-schedule");
  add_source_flags(study_cmd, study_src);
  add_solver_flags(study_cmd, study_sopt);
  study_cmd->add_option("--schedule", study_schedule,
                        "comma-separated n values (default 16..4096 doubling)");
  study_cmd->add_option("--oracle", study_oracle,
                        "auto | closed-form | fine-grid")
      ->check(CLI::IsMember({"auto", "closed-form", "fine-grid"}));
  study_cmd->add_option("--n-ref", study_n_ref,
                        "fine-grid reference level (power of two >= 4096)");
  study_cmd->add_option("--output", study_output, "output file (default stdout)");
  study_cmd->add_option("--format", study_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  // verify
  SourceOpts verify_src;
  SolverOpts verify_sopt;
  std::vector<int> verify_ns = {64};
  std::string verify_schedule, verify_output, verify_format = "csv";
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "check the a-priori bounds on computed solutions");
  add_source_flags(verify_cmd, verify_src);
  add_solver_flags(verify_cmd, verify_sopt);
  verify_cmd
      ->add_option("--n", verify_ns,
                   "grid size(s); repeat the flag or comma-separate")
      ->delimiter(',');
  verify_cmd->add_option("--schedule", verify_schedule,
                         "comma-separated n values (overrides --n)");
  verify_cmd->add_option("--output", verify_output,
                         "output file (default stdout)");
  verify_cmd->add_option("--format", verify_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  // spurious
  std::string spurious_output, spurious_format = "csv";
  CLI::App* spurious_cmd = app.add_subcommand(
      "spurious",
      "linear demo: unique, non-spurious, and no-solution cases + lambda1 "
      "table");
  spurious_cmd->add_option("--output", spurious_output,
                           "output file (default stdout)");
  spurious_cmd->add_option("--format", spurious_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  // check
  SourceOpts check_src;
  double check_relaxed_a = 0.0;
  std::string check_output, check_format = "csv";
  CLI::App* check_cmd = app.add_subcommand(
      "check", "run the H1/H2/H2a and relaxed-convexity checks");
  add_source_flags(check_cmd, check_src);
  CLI::Option* relaxed_opt = check_cmd->add_option(
      "--relaxed-a", check_relaxed_a,
      "also check relaxed convexity with this constant in (0,1)");
  check_cmd->add_option("--output", check_output,
                        "output file (default stdout)");
  check_cmd->add_option("--format", check_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadFlags;
  }

  try {
    if (app.got_subcommand(solve_cmd))
      return cmd_solve(solve_src, solve_sopt, solve_n, solve_output,
                       solve_format);
    if (app.got_subcommand(study_cmd))
      return cmd_study(study_src, study_sopt, study_schedule, study_oracle,
                       study_n_ref, study_output, study_format);
    if (app.got_subcommand(verify_cmd))
      return cmd_verify(verify_src, verify_sopt, verify_ns, verify_schedule,
                        verify_output, verify_format);
    if (app.got_subcommand(spurious_cmd))
      return cmd_spurious(spurious_output, spurious_format);
    if (app.got_subcommand(check_cmd))
      return cmd_check(check_src, check_relaxed_a, relaxed_opt->count() > 0,
                       check_output, check_format);
    std::cerr << "error: no subcommand\n";
    return kExitBadFlags;
  } catch (const ns::ParseError& e) {
    std::cerr << "parse error at column " << e.column() << ": " << e.what()
              << "\n";
    return kExitParse;
  } catch (const ns::AssumptionError& e) {
    std::cerr << e.what() << "\n";
    return kExitAssumption;
  } catch (const ns::SolveFailure& e) {
    std::cerr << e.what() << "\n";
    return e.status() == ns::SolveStatus::Singular ? kExitSingular
                                                   : kExitNoConvergence;
  } catch (const ns::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadFlags;
  } catch (const ns::EvalError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return kExitAssumption;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadFlags;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssumption;
  }
}

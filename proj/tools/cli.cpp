#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fxt/analysis.hpp"
#include "fxt/errors.hpp"
#include "fxt/harness.hpp"
#include "fxt/verify.hpp"

namespace fxt::cli {

namespace {

struct Overrides {
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> slack;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--output-dir", o.output_dir, "Directory for runs/ and summary.json");
  cmd->add_option("--seed", o.seed, "Seed for random problem instances");
  cmd->add_option("--slack", o.slack, "Relative slack on bound dominance")->check(CLI::NonNegativeNumber);
}

ExperimentSpec load_with_overrides(const std::string& path, const Overrides& o) {
  ExperimentSpec spec = load_experiment_spec(path);
  if (!o.output_dir.empty()) spec.output_dir = o.output_dir;
  if (o.seed) spec.seed = *o.seed;
  if (o.slack) spec.slack = *o.slack;
  validate_experiment_spec(spec);
  return spec;
}

int cmd_run(const std::string& path, const Overrides& o, std::ostream& out) {
  const ExperimentSpec spec = load_with_overrides(path, o);
  const ExperimentReport report = run_experiment(spec);
  print_report_table(out, report);
  return report.all_pass() ? kExitOk : kExitCheckFailed;
}

int cmd_sweep(const std::string& path, const Overrides& o, const std::vector<double>& norms,
              std::optional<std::uint64_t> direction_seed, std::ostream& out) {
  ExperimentSpec spec = load_with_overrides(path, o);
  if (!norms.empty()) {
    spec.initial_points.clear();
    spec.norm_sweep = NormSweep{direction_seed.value_or(spec.seed), norms};
  } else if (direction_seed && spec.norm_sweep) {
    spec.norm_sweep->direction_seed = *direction_seed;
  }
  validate_experiment_spec(spec);
  const ExperimentReport report = run_experiment(spec);

  out << "x0_norm,settle_time,stop_reason,final_grad_norm\n";
  char line[160];
  for (const auto& r : report.runs) {
    std::snprintf(line, sizeof line, "%.6g,%.6g,%s,%.3g\n", r.x0_norm,
                  r.settle_time.value_or(std::nan("")),
                  r.stop_reason ? std::string(to_string(*r.stop_reason)).c_str() : "error",
                  r.final_grad_norm);
    out << line;
  }
  const auto bound = report.fixed_time_bound();
  const auto u = report.uniformity();
  std::snprintf(line, sizeof line, "max_settle_time %.6g  bound %s  uniformity %s\n",
                report.max_settle_time(),
                bound ? std::to_string(bound->value).c_str() : "n/a",
                u ? (*u ? "pass" : "FAIL") : "n/a");
  out << line;
  return report.all_pass() ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const std::string& scope_label, std::ostream& out) {
  const auto scope = parse_verify_scope(scope_label);
  if (!scope) throw ConfigError("unknown scope '" + scope_label + "'");
  bool ok = true;
  char line[160];
  for (const auto& suite : run_verification(*scope)) {
    std::snprintf(line, sizeof line, "%-12s passed %4zu  failed %4zu\n", suite.name.c_str(),
                  suite.passed, suite.failed);
    out << line;
    for (const auto& f : suite.failures) out << "  FAIL " << f << "\n";
    ok = ok && suite.ok();
  }
  out << (ok ? "verify: pass\n" : "verify: FAIL\n");
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_list_problems(std::ostream& out) {
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %-12s %s\n", "name", "kind", "flows");
  out << line;
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"sphere", "objective"},          {"quadratic-Q", "objective"},
      {"pl-sine", "objective"},         {"log-sum-exp-reg", "objective"},
      {"quartic", "objective"},         {"constrained-qp", "constrained"},
      {"constrained-sphere", "constrained"}, {"bilinear-quad", "saddle"},
      {"scalar-saddle", "saddle"},      {"constrained-as-saddle", "saddle"},
  };
  for (const auto& [name, kind] : rows) {
    const char* flows = kind == "objective"     ? "nominal,p-rescaled,fixed-time,newton-fixed-time"
                        : kind == "constrained" ? "dual-ascent,primal-at-nu-star"
                                                : "saddle-newton";
    std::snprintf(line, sizeof line, "%-24s %-12s %s\n", name.c_str(), kind.c_str(), flows);
    out << line;
  }
  return kExitOk;
}

struct BoundFlags {
  FlowParams fp;
  std::optional<double> k;
  std::optional<double> mu;
  std::optional<double> grad0;
  std::optional<double> gap0;
  std::optional<double> dual_mu;
  double p = 3.0;
};

void print_bound(std::ostream& out, const SettlingBound& b, const char* variant = "") {
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-10s %.10g\n", std::string(to_string(b.tag)).c_str(),
                variant, b.value);
  out << line;
}

int cmd_bounds(const BoundFlags& f, std::ostream& out) {
  try {
    f.fp.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-10s %s\n", "bound", "variant", "value");
  out << line;
  if (f.k) {
    print_bound(out, bound_T3(f.fp, Curvature::kStrict, *f.k));
    if (f.grad0) {
      print_bound(out, bound_T1(*f.k, *f.grad0));
      print_bound(out, bound_Tp_finite(Curvature::kStrict, f.p, *f.k, *f.grad0));
    }
  }
  if (f.mu) {
    print_bound(out, bound_T3(f.fp, Curvature::kPl, *f.mu));
    if (f.gap0) {
      print_bound(out, bound_T2(*f.mu, *f.gap0, true), "printed");
      print_bound(out, bound_T2(*f.mu, *f.gap0, false), "rederived");
      print_bound(out, bound_Tp_finite(Curvature::kPl, f.p, *f.mu, *f.gap0));
    }
  }
  print_bound(out, bound_TNM(f.fp));
  const SettlingBound tsp = bound_TSP(f.fp);
  SettlingBound variant = tsp;
  variant.value = tsp.inputs.at("printed");
  print_bound(out, variant, "printed");
  variant.value = tsp.inputs.at("rederived");
  print_bound(out, variant, "rederived");
  if (f.dual_mu) {
    const SettlingBound tnu = bound_Tnu(f.fp, *f.dual_mu);
    print_bound(out, tnu);
    if (f.k) print_bound(out, bound_Tineq(tnu, bound_T3(f.fp, Curvature::kStrict, *f.k)));
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fixed-time gradient flows: experiments, sweeps, bounds and verification", "fxt"};
  app.require_subcommand(1, 1);

  std::string config;
  Overrides run_o;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment config");
  run_cmd->add_option("config", config, "Experiment config (YAML)")->required();
  add_overrides(run_cmd, run_o);

  std::string sweep_config;
  Overrides sweep_o;
  std::vector<double> norms;
  std::optional<std::uint64_t> direction_seed;
  auto* sweep_cmd = app.add_subcommand("sweep", "Settle times over a norm sweep of initial conditions");
  sweep_cmd->add_option("config", sweep_config, "Experiment config (YAML)")->required();
  sweep_cmd->add_option("--norms", norms, "Initial-condition norms (replaces the config's)")
      ->delimiter(',');
  sweep_cmd->add_option("--direction-seed", direction_seed, "Seed of the shared direction");
  add_overrides(sweep_cmd, sweep_o);

  std::string scope = "all";
  auto* verify_cmd = app.add_subcommand("verify", "Run the property suites");
  verify_cmd->add_option("--scope", scope, "all | problems | flows | bounds | experiments")
      ->check(CLI::IsMember({"all", "problems", "flows", "bounds", "experiments"}));

  auto* list_cmd = app.add_subcommand("list-problems", "List catalog problems");

  BoundFlags bf;
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate settling-time bounds");
  bounds_cmd->add_option("--c1", bf.fp.c1, "Gain of the sublinear term");
  bounds_cmd->add_option("--c2", bf.fp.c2, "Gain of the superlinear term");
  bounds_cmd->add_option("--p1", bf.fp.p1, "Exponent p1 > 2");
  bounds_cmd->add_option("--p2", bf.fp.p2, "Exponent p2 in (1, 2)");
  bounds_cmd->add_option("--k", bf.k, "Strong convexity constant")->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--mu", bf.mu, "PL constant")->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--grad0", bf.grad0, "Initial gradient norm")->check(CLI::NonNegativeNumber);
  bounds_cmd->add_option("--gap0", bf.gap0, "Initial optimality gap")->check(CLI::NonNegativeNumber);
  bounds_cmd->add_option("--p", bf.p, "Exponent of the finite-time p-flow")->check(CLI::Range(2.0, 1e300));
  bounds_cmd->add_option("--dual-mu", bf.dual_mu, "PL constant of the negated dual")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*run_cmd) return cmd_run(config, run_o, out);
    if (*sweep_cmd) return cmd_sweep(sweep_config, sweep_o, norms, direction_seed, out);
    if (*verify_cmd) return cmd_verify(scope, out);
    if (*list_cmd) return cmd_list_problems(out);
    if (*bounds_cmd) return cmd_bounds(bf, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace fxt::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fxt/analysis.hpp"
#include "fxt/flows.hpp"
#include "fxt/integrate.hpp"
#include "fxt/problems.hpp"

namespace fxt {

enum class ProblemKind { kObjective, kConstrained, kSaddle };

struct ProblemSpec {
  std::string name;
  /// Builder parameters (dim, seed, eps, n, m, ...); unknown keys are a ConfigError.
  std::map<std::string, double> params;
};

/// Initial conditions sharing one random unit direction, scaled to each norm.
struct NormSweep {
  std::uint64_t direction_seed = 1;
  std::vector<double> norms;
};

struct ExperimentSpec {
  std::string name;
  ProblemSpec problem;
  FlowKind flow = FlowKind::kFixedTime;
  FlowParams params;
  /// Gains of the primal phase when the flow is primal-at-nu-star.
  FlowParams primal_params;
  /// Exponent of the p-rescaled flow.
  double pexp = 3.0;
  std::vector<Vector> initial_points;
  std::optional<NormSweep> norm_sweep;
  /// Start of the dual phase for primal-at-nu-star (zeros when absent).
  std::optional<Vector> nu0;
  IntegratorConfig integrator;
  /// Empty means pick from the requested bounds.
  std::optional<LyapunovKind> lyapunov;
  std::vector<BoundTag> bounds;
  std::filesystem::path output_dir = "out";
  double slack = 0.05;
  std::uint64_t seed = 1;
  /// Off for in-process suites that only need the report.
  bool write_files = true;
};

/// Parses a YAML experiment config. Throws ConfigError on malformed input.
ExperimentSpec parse_experiment_spec(const std::string& yaml_text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

ProblemKind problem_kind_of(const std::string& problem_name);
ObjectiveProblem make_named_objective(const ProblemSpec& ps, std::uint64_t seed);
ConstrainedProblem make_named_constrained(const ProblemSpec& ps, std::uint64_t seed);
SaddleProblem make_named_saddle(const ProblemSpec& ps, std::uint64_t seed);

/// Throws ConfigError for unknown names, incompatible flow/problem pairings,
/// bounds that do not apply, missing certificates, or no initial conditions.
void validate_experiment_spec(const ExperimentSpec& spec);

struct BoundCheck {
  SettlingBound bound;
  /// Time compared against the bound; NaN when the run did not converge.
  double compared_time = 0.0;
};

/// compared_time ≤ value·(1 + slack), false when compared_time is NaN.
bool dominates(const BoundCheck& check, double slack);

struct RunRecord {
  std::size_t index = 0;
  Vector x0;
  double x0_norm = 0.0;
  std::optional<double> settle_time;
  std::optional<StopReason> stop_reason;
  double final_time = 0.0;
  double final_grad_norm = 0.0;
  /// Dual-phase settle time when the run is the primal phase of a two-phase solve.
  std::optional<double> dual_settle_time;
  std::vector<BoundCheck> bounds;
  std::optional<LyapunovCheckReport> lyapunov;
  std::string error;
  std::string csv_path;
};

bool run_passes(const RunRecord& run, double slack);

struct ExperimentReport {
  std::string name;
  std::string problem;
  std::string flow;
  LyapunovKind lyapunov = LyapunovKind::kNone;
  double slack = 0.05;
  std::vector<RunRecord> runs;

  /// Largest settle time over converged runs; NaN when none converged.
  [[nodiscard]] double max_settle_time() const;
  [[nodiscard]] double min_settle_time() const;
  /// Smallest fixed-time bound attached to the runs, if any.
  [[nodiscard]] std::optional<SettlingBound> fixed_time_bound() const;
  /// Every run converged, max settle ≤ bound·(1+slack), and the spread of
  /// settle times is below the bound. Absent without a fixed-time bound.
  [[nodiscard]] std::optional<bool> uniformity() const;
  [[nodiscard]] bool all_pass() const;
};

/// Builds problem and flow, integrates every initial condition, checks the
/// requested bounds and the matching Lyapunov inequality, and (when
/// write_files) writes runs/<name>/<idx>.csv and summary.json under output_dir.
ExperimentReport run_experiment(const ExperimentSpec& spec);

struct ConstrainedSolveReport {
  Trajectory dual;
  Trajectory primal;
  std::optional<double> dual_settle;
  std::optional<double> primal_settle;
  SettlingBound t_nu;
  std::optional<SettlingBound> t_x;
  std::optional<SettlingBound> t_ineq;
  /// ‖∇f(x) + Aᵀν‖ and ‖Ax − b‖ at the returned point.
  double stationarity_residual = 0.0;
  double feasibility_residual = 0.0;
  bool converged = false;
  std::string message;
};

struct ConstrainedSolution {
  Vector x;
  Vector nu;
  ConstrainedSolveReport report;
};

/// Dual-ascent flow from nu0 to ν*, then the primal flow at ν* from x0.
/// Non-convergence of either phase is reported, not thrown. A horizon left
/// unset in cfg defaults to ten times each phase's bound.
ConstrainedSolution solve_constrained(const ConstrainedProblem& cp, const FlowParams& fp_dual,
                                      const FlowParams& fp_primal, const IntegratorConfig& cfg,
                                      const Vector& x0, const Vector& nu0);

struct SaddleSolveReport {
  Trajectory trajectory;
  SettlingBound t_sp;
  double final_grad_norm = 0.0;
  std::optional<double> distance_to_known;
  bool dominance = false;
};

struct SaddleSolution {
  Vector x;
  Vector z;
  SaddleSolveReport report;
};

/// Saddle Newton flow from the stacked s0 = (x0, z0). A singular Hessian
/// shows up as the trajectory's stop reason.
SaddleSolution solve_saddle(const SaddleProblem& sp, const FlowParams& fp,
                            const IntegratorConfig& cfg, const Vector& s0);

/// Built-in experiments covering every flow with its matching bound. Files off.
std::vector<ExperimentSpec> canonical_experiments();

/// Plain-text table, stable column order.
void print_report_table(std::ostream& out, const ExperimentReport& report);

/// summary.json content.
std::string report_to_json(const ExperimentReport& report);

}  // namespace fxt

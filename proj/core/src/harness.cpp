#include "fxt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "fxt/errors.hpp"

namespace fxt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool needs_gap(BoundTag tag) {
  return tag == BoundTag::kT2 || tag == BoundTag::kT3Pl || tag == BoundTag::kTnu;
}

LyapunovKind resolve_lyapunov(const ExperimentSpec& spec) {
  if (spec.lyapunov) return *spec.lyapunov;
  const bool gap = std::any_of(spec.bounds.begin(), spec.bounds.end(), needs_gap);
  return gap ? LyapunovKind::kGapSq : LyapunovKind::kGradSq;
}

IntegratorConfig with_horizon(IntegratorConfig cfg, double bound_value) {
  if (!cfg.t_max) {
    const double t = 10.0 * bound_value;
    cfg.t_max = (std::isfinite(t) && t > cfg.dt && t > 0.0) ? t : kDefaultHorizon;
  }
  return cfg;
}

// What a run needs beyond the field: certificates and how bounds read x0.
struct Setup {
  FlowField field;
  double k = 0.0;
  double mu = 0.0;
  bool mu_sampled = false;
  std::function<double(const Vector&)> grad0;
  std::function<double(const Vector&)> gap0;
  // Two-phase runs: the dual phase shared by every primal run.
  std::optional<double> dual_settle;
  std::optional<SettlingBound> t_nu;
  std::string setup_error;
};

Setup build_setup(const ExperimentSpec& spec) {
  Setup s;
  switch (problem_kind_of(spec.problem.name)) {
    case ProblemKind::kObjective: {
      const ObjectiveProblem p = make_named_objective(spec.problem, spec.seed);
      s.k = p.strong_convexity_k;
      s.mu = p.pl_constant_mu;
      s.mu_sampled = p.pl_certificate_sampled;
      switch (spec.flow) {
        case FlowKind::kNominal:
          s.field = build_nominal_flow(p);
          break;
        case FlowKind::kPRescaled:
          s.field = build_p_flow(p, spec.pexp, spec.params.eps_sing);
          break;
        case FlowKind::kFixedTime:
          s.field = build_fixed_time_flow(p, spec.params);
          break;
        default:
          s.field = build_newton_fixed_time_flow(p, spec.params);
          break;
      }
      break;
    }
    case ProblemKind::kConstrained: {
      const ConstrainedProblem cp = make_named_constrained(spec.problem, spec.seed);
      if (spec.flow == FlowKind::kDualAscent) {
        s.field = build_dual_ascent_flow(cp, spec.params);
        s.k = s.mu = cp.dual_pl_mu;
        break;
      }
      // Primal phase: run the dual phase once, then flow in x at the ν it found.
      s.k = cp.objective.strong_convexity_k;
      s.mu = cp.dual_pl_mu;
      s.t_nu = bound_Tnu(spec.params, cp.dual_pl_mu);
      const Vector nu0 = spec.nu0.value_or(Vector(cp.m()));
      const FlowField dual = build_dual_ascent_flow(cp, spec.params);
      Vector nu_star = nu0;
      try {
        const Trajectory dt = integrate(dual, nu0, with_horizon(spec.integrator, s.t_nu->value),
                                        LyapunovKind::kNone);
        nu_star = dt.final_state();
        s.dual_settle = dt.settle_time;
        if (!dt.settle_time) s.setup_error = "dual phase stopped: " + std::string(to_string(dt.stop_reason));
      } catch (const Error& e) {
        s.setup_error = std::string("dual phase failed: ") + e.what();
      }
      s.field = build_primal_flow_at_nu(cp, nu_star, spec.primal_params);
      break;
    }
    case ProblemKind::kSaddle:
      s.field = build_saddle_newton_flow(make_named_saddle(spec.problem, spec.seed), spec.params);
      break;
  }
  s.grad0 = [f = s.field](const Vector& x) { return f.driving_gradient(x).norm(); };
  s.gap0 = [f = s.field](const Vector& x) {
    return f.objective && f.optimum ? std::max(0.0, f.objective(x) - *f.optimum) : kNaN;
  };
  return s;
}

SettlingBound compute_bound(const ExperimentSpec& spec, const Setup& s, BoundTag tag, const Vector& x0) {
  SettlingBound b;
  bool uses_mu = false;
  switch (tag) {
    case BoundTag::kT1:
      b = bound_T1(s.k, s.grad0(x0));
      break;
    case BoundTag::kT2:
      b = bound_T2_max(s.mu, s.gap0(x0));
      uses_mu = true;
      break;
    case BoundTag::kTpFinite:
      if (s.k > 0.0) {
        b = bound_Tp_finite(Curvature::kStrict, spec.pexp, s.k, s.grad0(x0));
      } else {
        b = bound_Tp_finite(Curvature::kPl, spec.pexp, s.mu, s.gap0(x0));
        uses_mu = true;
      }
      break;
    case BoundTag::kT3Strict:
      b = bound_T3(spec.flow == FlowKind::kPrimalAtNuStar ? spec.primal_params : spec.params,
                   Curvature::kStrict, s.k);
      break;
    case BoundTag::kT3Pl:
      b = bound_T3(spec.params, Curvature::kPl, s.mu);
      uses_mu = true;
      break;
    case BoundTag::kTNM:
      b = bound_TNM(spec.params);
      break;
    case BoundTag::kTnu:
      b = bound_Tnu(spec.params, s.mu);
      break;
    case BoundTag::kTineq:
      b = bound_Tineq(*s.t_nu, bound_T3(spec.primal_params, Curvature::kStrict, s.k));
      break;
    case BoundTag::kTSP:
      b = bound_TSP(spec.params);
      break;
    case BoundTag::kGenericFixed:
    case BoundTag::kGenericFinite:
      throw ConfigError("generic bounds are not experiment bounds");
  }
  if (uses_mu && s.mu_sampled) b.certificate = "empirical-certificate";
  return b;
}

std::optional<RateModel> select_rate_model(const ExperimentSpec& spec, const Setup& s,
                                           LyapunovKind lyap) {
  if (lyap == LyapunovKind::kNone) return std::nullopt;
  const bool grad = lyap == LyapunovKind::kGradSq;
  switch (spec.flow) {
    case FlowKind::kPRescaled:
      if (grad && s.k > 0.0) return rate_p_flow_strict(spec.pexp, s.k);
      if (!grad && s.mu > 0.0) return rate_p_flow_pl(spec.pexp, s.mu);
      return std::nullopt;
    case FlowKind::kFixedTime:
    case FlowKind::kDualAscent:
    case FlowKind::kPrimalAtNuStar: {
      const FlowParams& fp =
          spec.flow == FlowKind::kPrimalAtNuStar ? spec.primal_params : spec.params;
      if (grad && s.k > 0.0) return rate_fixed_time_strict(fp, s.k);
      if (!grad && s.mu > 0.0) return rate_fixed_time_pl(fp, s.mu);
      return std::nullopt;
    }
    case FlowKind::kNewtonFixedTime:
    case FlowKind::kSaddleNewton:
      if (grad) return rate_newton(spec.params);
      return std::nullopt;
    case FlowKind::kNominal:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<Vector> initial_conditions(const ExperimentSpec& spec, std::size_t dim) {
  std::vector<Vector> out = spec.initial_points;
  if (spec.norm_sweep) {
    const Vector dir = random_unit_vector(dim, spec.norm_sweep->direction_seed);
    for (double r : spec.norm_sweep->norms) out.push_back(r * dir);
  }
  return out;
}

void fill_from_trajectory(RunRecord& rec, const Trajectory& traj) {
  rec.settle_time = traj.settle_time;
  rec.stop_reason = traj.stop_reason;
  if (traj.size() > 0) {
    rec.final_time = traj.final_time();
    rec.final_grad_norm = traj.grad_norms.back();
  }
}

void write_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_trajectory_csv(out, traj);
}

}  // namespace

bool dominates(const BoundCheck& check, double slack) {
  return std::isfinite(check.compared_time) &&
         check.compared_time <= check.bound.value * (1.0 + slack);
}

bool run_passes(const RunRecord& run, double slack) {
  if (!run.error.empty()) return false;
  for (const auto& b : run.bounds)
    if (!dominates(b, slack)) return false;
  return !run.lyapunov || run.lyapunov->pass;
}

double ExperimentReport::max_settle_time() const {
  double best = kNaN;
  for (const auto& r : runs)
    if (r.settle_time && !(*r.settle_time <= best)) best = *r.settle_time;
  return best;
}

double ExperimentReport::min_settle_time() const {
  double best = kNaN;
  for (const auto& r : runs)
    if (r.settle_time && !(*r.settle_time >= best)) best = *r.settle_time;
  return best;
}

std::optional<SettlingBound> ExperimentReport::fixed_time_bound() const {
  std::optional<SettlingBound> best;
  for (const auto& r : runs) {
    for (const auto& b : r.bounds) {
      if (is_fixed_time(b.bound.tag) && (!best || b.bound.value < best->value)) best = b.bound;
    }
  }
  return best;
}

std::optional<bool> ExperimentReport::uniformity() const {
  const auto bound = fixed_time_bound();
  if (!bound) return std::nullopt;
  for (const auto& r : runs)
    if (!r.settle_time) return false;
  const double hi = max_settle_time();
  const double lo = min_settle_time();
  return hi <= bound->value * (1.0 + slack) && (hi - lo) < bound->value;
}

bool ExperimentReport::all_pass() const {
  for (const auto& r : runs)
    if (!run_passes(r, slack)) return false;
  const auto u = uniformity();
  return !u || *u;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  validate_experiment_spec(spec);
  const LyapunovKind lyap = resolve_lyapunov(spec);
  const Setup setup = build_setup(spec);
  const std::optional<RateModel> rate = select_rate_model(spec, setup, lyap);

  ExperimentReport report;
  report.name = spec.name;
  report.problem = spec.problem.name;
  report.flow = std::string(to_string(spec.flow));
  report.lyapunov = lyap;
  report.slack = spec.slack;

  const auto x0s = initial_conditions(spec, setup.field.dim);
  const auto run_dir = spec.output_dir / "runs" / spec.name;
  for (std::size_t i = 0; i < x0s.size(); ++i) {
    RunRecord rec;
    rec.index = i;
    rec.x0 = x0s[i];
    rec.x0_norm = x0s[i].norm();
    rec.dual_settle_time = setup.dual_settle;

    double horizon_bound = 0.0;
    for (BoundTag tag : spec.bounds) {
      BoundCheck check;
      check.bound = compute_bound(spec, setup, tag, rec.x0);
      horizon_bound = std::max(horizon_bound, check.bound.value);
      rec.bounds.push_back(std::move(check));
    }

    Trajectory traj;
    if (!setup.setup_error.empty()) {
      rec.error = setup.setup_error;
    } else {
      try {
        traj = integrate(setup.field, rec.x0, with_horizon(spec.integrator, horizon_bound), lyap);
      } catch (const NonFiniteState& e) {
        traj = e.partial();
        rec.error = e.what();
      } catch (const Error& e) {
        rec.error = e.what();
      }
    }
    fill_from_trajectory(rec, traj);
    if (rec.error.empty() && traj.stop_reason == StopReason::kSingularHessian) rec.error = traj.message;

    for (auto& check : rec.bounds) {
      double t = rec.settle_time.value_or(kNaN);
      if (check.bound.tag == BoundTag::kTineq) t += setup.dual_settle.value_or(kNaN);
      check.compared_time = t;
    }

    if (rate && traj.size() >= 3) {
      try {
        rec.lyapunov = check_lyapunov_inequality(traj, *rate);
      } catch (const InsufficientRecords&) {
      }
    }

    if (spec.write_files && traj.size() > 0) {
      const auto path = run_dir / (std::to_string(i) + ".csv");
      write_csv(path, traj);
      rec.csv_path = path.string();
    }
    report.runs.push_back(std::move(rec));
  }

  if (spec.write_files) {
    std::filesystem::create_directories(spec.output_dir);
    std::ofstream out(spec.output_dir / "summary.json");
    if (!out) throw Error("cannot write summary in '" + spec.output_dir.string() + "'");
    out << report_to_json(report) << '\n';
  }
  return report;
}

ConstrainedSolution solve_constrained(const ConstrainedProblem& cp, const FlowParams& fp_dual,
                                      const FlowParams& fp_primal, const IntegratorConfig& cfg,
                                      const Vector& x0, const Vector& nu0) {
  if (x0.size() != cp.n() || nu0.size() != cp.m()) {
    throw DimensionMismatch("solve_constrained: x0 must have length n and nu0 length m");
  }
  ConstrainedSolution sol;
  auto& rep = sol.report;
  rep.t_nu = bound_Tnu(fp_dual, cp.dual_pl_mu);

  const FlowField dual_field = build_dual_ascent_flow(cp, fp_dual);
  const LyapunovKind dual_lyap = dual_field.optimum ? LyapunovKind::kGapSq : LyapunovKind::kGradSq;
  try {
    rep.dual = integrate(dual_field, nu0, with_horizon(cfg, rep.t_nu.value), dual_lyap);
  } catch (const NonFiniteState& e) {
    rep.dual = e.partial();
    rep.message = std::string("dual phase: ") + e.what();
  }
  rep.dual_settle = rep.dual.settle_time;
  sol.nu = rep.dual.size() > 0 ? rep.dual.final_state() : nu0;
  if (!rep.dual_settle && rep.message.empty()) {
    rep.message = "dual phase stopped: " + std::string(to_string(rep.dual.stop_reason));
  }

  const double k = cp.objective.strong_convexity_k;
  if (k > 0.0) {
    rep.t_x = bound_T3(fp_primal, Curvature::kStrict, k);
    rep.t_ineq = bound_Tineq(rep.t_nu, *rep.t_x);
  }
  const FlowField primal_field = build_primal_flow_at_nu(cp, sol.nu, fp_primal);
  try {
    rep.primal = integrate(primal_field, x0,
                           with_horizon(cfg, rep.t_x ? rep.t_x->value : kDefaultHorizon / 10.0),
                           LyapunovKind::kGradSq);
  } catch (const NonFiniteState& e) {
    rep.primal = e.partial();
    if (rep.message.empty()) rep.message = std::string("primal phase: ") + e.what();
  }
  rep.primal_settle = rep.primal.settle_time;
  sol.x = rep.primal.size() > 0 ? rep.primal.final_state() : x0;
  if (!rep.primal_settle && rep.message.empty()) {
    rep.message = "primal phase stopped: " + std::string(to_string(rep.primal.stop_reason));
  }

  rep.stationarity_residual = lagrangian_gradient_x(cp, sol.x, sol.nu).norm();
  rep.feasibility_residual = (cp.A * sol.x - cp.b).norm();
  rep.converged = rep.dual_settle.has_value() && rep.primal_settle.has_value();
  return sol;
}

SaddleSolution solve_saddle(const SaddleProblem& sp, const FlowParams& fp,
                            const IntegratorConfig& cfg, const Vector& s0) {
  if (s0.size() != sp.n + sp.m) throw DimensionMismatch("solve_saddle: s0 must have length n + m");
  SaddleSolution sol;
  auto& rep = sol.report;
  rep.t_sp = bound_TSP(fp);
  const FlowField field = build_saddle_newton_flow(sp, fp);
  try {
    rep.trajectory = integrate(field, s0, with_horizon(cfg, rep.t_sp.value), LyapunovKind::kGradSq);
  } catch (const NonFiniteState& e) {
    rep.trajectory = e.partial();
    rep.trajectory.message = e.what();
  }
  const Vector s = rep.trajectory.size() > 0 ? rep.trajectory.final_state() : s0;
  sol.x = s.segment(0, sp.n);
  sol.z = s.segment(sp.n, sp.m);
  rep.final_grad_norm = rep.trajectory.size() > 0 ? rep.trajectory.grad_norms.back() : kNaN;
  if (sp.known_saddle) {
    rep.distance_to_known =
        (Vector::stack(sol.x, sol.z) - Vector::stack(sp.known_saddle->first, sp.known_saddle->second))
            .norm();
  }
  rep.dominance = rep.trajectory.settle_time &&
                  *rep.trajectory.settle_time <= rep.t_sp.value * 1.05;
  return sol;
}

std::vector<ExperimentSpec> canonical_experiments() {
  std::vector<ExperimentSpec> out;
  auto add = [&](std::string name, ProblemSpec problem, FlowKind flow,
                 std::vector<BoundTag> bounds) -> ExperimentSpec& {
    ExperimentSpec s;
    s.name = std::move(name);
    s.problem = std::move(problem);
    s.flow = flow;
    s.bounds = std::move(bounds);
    s.write_files = false;
    out.push_back(std::move(s));
    return out.back();
  };
  auto sweep = [](std::vector<double> norms, std::uint64_t seed = 7) {
    return NormSweep{seed, std::move(norms)};
  };

  add("sphere_p3", {"sphere", {{"dim", 2}}}, FlowKind::kPRescaled, {BoundTag::kT1, BoundTag::kTpFinite})
      .initial_points = {Vector{4.0, 0.0}, Vector{0.0, 0.25}};
  add("quadratic_p3", {"quadratic-Q", {{"dim", 10}}}, FlowKind::kPRescaled, {BoundTag::kT1})
      .norm_sweep = sweep({0.1, 1.0, 10.0});
  add("pl_sine_p3", {"pl-sine", {}}, FlowKind::kPRescaled, {BoundTag::kT2})
      .initial_points = {Vector{3.0}, Vector{-2.0}, Vector{0.5}, Vector{8.0}};
  add("sphere_fixed", {"sphere", {{"dim", 3}}}, FlowKind::kFixedTime, {BoundTag::kT3Strict})
      .norm_sweep = sweep({1e-2, 1.0, 1e2, 1e4, 1e6});
  add("quadratic_fixed", {"quadratic-Q", {{"dim", 10}}}, FlowKind::kFixedTime, {BoundTag::kT3Strict})
      .norm_sweep = sweep({0.1, 10.0, 1e3});
  add("quadratic_fixed_pl", {"quadratic-Q", {{"dim", 10}}}, FlowKind::kFixedTime, {BoundTag::kT3Pl})
      .norm_sweep = sweep({0.1, 10.0, 1e3});
  add("pl_sine_fixed", {"pl-sine", {}}, FlowKind::kFixedTime, {BoundTag::kT3Pl})
      .initial_points = {Vector{3.0}, Vector{-5.0}, Vector{9.0}};
  add("lse_fixed", {"log-sum-exp-reg", {{"dim", 5}}}, FlowKind::kFixedTime, {BoundTag::kT3Strict})
      .norm_sweep = sweep({1.0, 10.0, 100.0});
  add("quartic_newton", {"quartic", {{"dim", 4}}}, FlowKind::kNewtonFixedTime, {BoundTag::kTNM})
      .norm_sweep = sweep({0.1, 10.0, 1e3});
  add("dual_ascent", {"constrained-qp", {{"n", 10}, {"m", 3}}}, FlowKind::kDualAscent, {BoundTag::kTnu})
      .norm_sweep = sweep({1.0, 10.0});
  add("two_phase", {"constrained-qp", {{"n", 10}, {"m", 3}}}, FlowKind::kPrimalAtNuStar,
      {BoundTag::kT3Strict, BoundTag::kTineq})
      .norm_sweep = sweep({1.0, 10.0});
  add("scalar_saddle", {"scalar-saddle", {}}, FlowKind::kSaddleNewton, {BoundTag::kTSP})
      .initial_points = {Vector{1.0, 1.0}, Vector{-3.0, 2.0}};
  add("bilinear_saddle", {"bilinear-quad", {{"n", 3}, {"m", 2}}}, FlowKind::kSaddleNewton, {BoundTag::kTSP})
      .norm_sweep = sweep({1.0, 100.0});
  return out;
}

void print_report_table(std::ostream& out, const ExperimentReport& report) {
  char line[256];
  out << "experiment " << report.name << "  problem " << report.problem << "  flow " << report.flow
      << "  lyapunov " << to_string(report.lyapunov) << "\n";
  std::snprintf(line, sizeof line, "%-4s %-12s %-12s %-16s %-12s %-32s %-10s %s\n", "idx",
                "x0_norm", "settle_time", "stop", "final_grad", "bounds", "lyapunov", "verdict");
  out << line;
  for (const auto& r : report.runs) {
    std::string bounds;
    for (const auto& b : r.bounds) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s%s=%.6g", bounds.empty() ? "" : ",",
                    std::string(to_string(b.bound.tag)).c_str(), b.bound.value);
      bounds += buf;
    }
    if (bounds.empty()) bounds = "-";
    const std::string settle = r.settle_time ? [&] {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", *r.settle_time);
      return std::string(buf);
    }()
                                             : std::string("-");
    const std::string stop = r.stop_reason ? std::string(to_string(*r.stop_reason)) : "error";
    const std::string lyap = r.lyapunov ? (r.lyapunov->pass ? "pass" : "FAIL") : "-";
    std::snprintf(line, sizeof line, "%-4zu %-12.6g %-12s %-16s %-12.3g %-32s %-10s %s\n", r.index,
                  r.x0_norm, settle.c_str(), stop.c_str(), r.final_grad_norm, bounds.c_str(),
                  lyap.c_str(), run_passes(r, report.slack) ? "pass" : "FAIL");
    out << line;
    if (!r.error.empty()) out << "     error: " << r.error << "\n";
  }
  const auto u = report.uniformity();
  std::snprintf(line, sizeof line, "max_settle_time %.6g  uniformity %s  overall %s\n",
                report.max_settle_time(), u ? (*u ? "pass" : "FAIL") : "n/a",
                report.all_pass() ? "pass" : "FAIL");
  out << line;
}

}  // namespace fxt

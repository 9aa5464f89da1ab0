// Acceptance checks. One PASS/FAIL line per criterion; exits non-zero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fxt/analysis.hpp"
#include "fxt/errors.hpp"
#include "fxt/flows.hpp"
#include "fxt/harness.hpp"
#include "fxt/integrate.hpp"
#include "fxt/problems.hpp"

using namespace fxt;

namespace {

constexpr double kSlack = 1.05;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

IntegratorConfig adaptive(std::optional<double> t_max = std::nullopt) {
  IntegratorConfig c;
  c.t_max = t_max;
  return c;
}

// 1. p = 3 flow on the sphere from norm 4 settles at exactly 4.
Outcome closed_form_settling() {
  Outcome o;
  const FlowField f = build_p_flow(make_sphere(3), 3.0);
  const Trajectory tr = integrate(f, 4.0 * random_unit_vector(3, 1), adaptive(10.0));
  o.require(tr.settle_time.has_value(), "did not converge");
  if (tr.settle_time) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "settle %.6f vs 4.0", *tr.settle_time);
    o.detail = buf;
    o.require(rel(*tr.settle_time, 4.0) <= 0.01, buf);
  }
  return o;
}

// 2. Finite-time bounds dominate on random quadratics and on pl-sine.
Outcome finite_time_dominance() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t q = 0; q < 20; ++q) {
    const std::size_t dim = 2 + q % 9;
    const ObjectiveProblem p = make_random_quadratic(dim, 0.2 + 0.1 * (q % 5), 8.0, 100 + q);
    const FlowField f = build_p_flow(p, 3.0);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Vector x0 = std::pow(10.0, -2.0 + 0.2 * s) * random_unit_vector(dim, 1000 * q + s);
      const double bound = bound_T1(p.strong_convexity_k, p.gradient(x0).norm()).value;
      const Trajectory tr = integrate(f, x0, adaptive(10.0 * bound));
      o.require(tr.settle_time.has_value(), "quadratic run did not converge");
      if (tr.settle_time) {
        worst = std::max(worst, *tr.settle_time / bound);
        o.require(*tr.settle_time <= bound * kSlack, "T1 dominance violated");
      }
    }
  }
  const ObjectiveProblem pl = make_pl_sine();
  const FlowField f = build_p_flow(pl, 3.0);
  for (int s = 0; s < 20; ++s) {
    const Vector x0{-9.5 + s};
    const double gap0 = pl.value(x0) - *pl.optimum;
    const double bound = bound_T2_max(pl.pl_constant_mu, gap0).value;
    IntegratorConfig cfg = adaptive(10.0 * bound);
    const Trajectory tr = integrate(f, x0, cfg);
    o.require(tr.settle_time.has_value(), "pl-sine run did not converge");
    if (tr.settle_time) {
      worst = std::max(worst, *tr.settle_time / bound);
      o.require(*tr.settle_time <= bound * kSlack, "T2 dominance violated on pl-sine");
    }
  }
  if (o.ok) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "420 runs, worst settle/bound %.3f", worst);
    o.detail = buf;
  }
  return o;
}

// 3. Fixed-time uniformity over eight decades, with the p = 3 contrast.
Outcome fixed_time_uniformity() {
  Outcome o;
  const std::vector<double> norms{1e-2, 1.0, 1e2, 1e4, 1e6};
  const Vector dir = random_unit_vector(4, 3);
  std::vector<Vector> x0s;
  for (double r : norms) x0s.push_back(r * dir);

  const FlowParams fp;
  const auto sphere = make_sphere(4);
  const double bound = bound_T3(fp, Curvature::kStrict, sphere.strong_convexity_k).value;
  const auto fixed = settle_time_sweep(build_fixed_time_flow(sphere, fp), x0s, adaptive(10.0 * bound));
  double lo = 1e300, hi = 0.0;
  for (const auto& e : fixed) {
    o.require(e.settle_time.has_value(), "fixed-time run did not converge");
    if (!e.settle_time) continue;
    lo = std::min(lo, *e.settle_time);
    hi = std::max(hi, *e.settle_time);
    o.require(*e.settle_time <= bound * kSlack, "settle time above the fixed-time bound");
  }
  o.require(hi - lo < bound, "spread of settle times not below the bound");

  const auto pflow = settle_time_sweep(build_p_flow(sphere, 3.0), x0s, adaptive(1e4));
  double worst_ratio = 0.0;
  for (std::size_t i = 1; i < pflow.size(); ++i) {
    o.require(pflow[i].settle_time && pflow[i - 1].settle_time, "p-flow contrast run did not converge");
    if (!pflow[i].settle_time || !pflow[i - 1].settle_time) continue;
    const double decades = std::log10(norms[i] / norms[i - 1]);
    const double per_decade = std::pow(*pflow[i].settle_time / *pflow[i - 1].settle_time, 1.0 / decades);
    worst_ratio = std::max(worst_ratio, rel(per_decade, std::sqrt(10.0)));
    o.require(rel(per_decade, std::sqrt(10.0)) <= 0.10, "p-flow growth is not sqrt(10) per decade");
  }
  if (o.ok) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "settle in [%.4f, %.4f], bound %.4f; p=3 per-decade deviation %.2e",
                  lo, hi, bound, worst_ratio);
    o.detail = buf;
  }
  return o;
}

// 4. Newton flow: exact Lyapunov derivative and problem-independent bound.
Outcome newton_lyapunov() {
  Outcome o;
  const FlowParams fp;
  const RateModel model = rate_newton(fp);
  const double tnm = bound_TNM(fp).value;
  const std::vector<ObjectiveProblem> problems{make_sphere(6), make_random_quadratic(6, 1e-3, 1e3, 5),
                                               make_random_log_sum_exp_reg(6, 12, 0.1, 6),
                                               make_quartic(6, 0.5), make_pl_sine()};
  std::size_t samples = 0;
  double worst = 0.0;
  for (const auto& p : problems) {
    const FlowField nf = build_newton_fixed_time_flow(p, fp);
    const bool local = p.name == "pl-sine";  // Hessian stays invertible for |x| < 0.9
    for (std::uint64_t s = 0; s < 200; ++s) {
      Vector x = random_gaussian_vector(p.dim, 40000 + 1000 * samples + s);
      if (local) x[0] = 0.89 * std::tanh(x[0]);
      const double g = p.gradient(x).norm();
      if (g <= 1e-12) continue;
      const double expected = model(0.5 * g * g);
      const double got = chain_rule_lyapunov_rate(p, nf, x);
      worst = std::max(worst, rel(got, expected));
      o.require(rel(got, expected) <= 1e-9, "chain-rule rate differs on " + p.name);
    }
    samples += 200;
    for (double r : {0.05, 0.5, 5.0, 50.0}) {
      Vector x0 = r * random_unit_vector(p.dim, 17);
      if (local) x0[0] = std::clamp(x0[0], -0.85, 0.85);
      const Trajectory tr = integrate(nf, x0, adaptive(10.0 * tnm));
      o.require(tr.settle_time.has_value(), "Newton run did not converge on " + p.name);
      if (tr.settle_time) o.require(*tr.settle_time <= tnm * kSlack, "TNM dominance violated on " + p.name);
    }
  }
  if (o.ok) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu states, worst relative rate error %.2e", samples, worst);
    o.detail = buf;
  }
  return o;
}

// 5. Two-phase constrained solve against the KKT system.
Outcome constrained_solve() {
  Outcome o;
  const FlowParams fp;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix Q = random_spd(10, 0.5, 5.0, 500 + seed);
    const Vector q = random_gaussian_vector(10, 600 + seed);
    const Matrix A = random_gaussian_matrix(3, 10, 700 + seed);
    const Vector b = random_gaussian_vector(3, 800 + seed);
    const auto [x_kkt, nu_kkt] = solve_kkt_qp(Q, q, A, b);
    const ConstrainedProblem cp = make_constrained_qp(Q, q, A, b);
    const auto sol = solve_constrained(cp, fp, fp, IntegratorConfig{}, 3.0 * random_unit_vector(10, seed),
                                       Vector(3));
    o.require(sol.report.converged, "two-phase solve did not converge");
    if (!sol.report.converged) continue;
    const double err = std::max((sol.x - x_kkt).norm(), (sol.nu - nu_kkt).norm());
    worst = std::max(worst, err);
    o.require(err <= 1e-6, "two-phase answer differs from the KKT solution");
    o.require(sol.report.t_ineq.has_value(), "no combined bound");
    if (sol.report.t_ineq) {
      o.require(*sol.report.dual_settle + *sol.report.primal_settle <= sol.report.t_ineq->value * kSlack,
                "combined bound dominance violated");
    }
  }
  const auto unit = solve_constrained(make_unit_constrained_sphere(), fp, fp, IntegratorConfig{},
                                      Vector{-2, 5}, Vector{0.0});
  o.require(unit.report.converged && (unit.x - Vector{1, 0}).norm() <= 1e-6 &&
                std::abs(unit.nu[0] + 1.0) <= 1e-6,
            "unit instance did not give x=[1,0], nu=-1");
  if (o.ok) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "10 QPs, worst KKT error %.2e", worst);
    o.detail = buf;
  }
  return o;
}

// 6. Saddle Newton flow.
Outcome saddle_dynamics() {
  Outcome o;
  const FlowParams fp;
  const double tsp = bound_TSP(fp).value;
  double worst = 0.0;
  auto check = [&](const SaddleProblem& sp, const Vector& s0) {
    const auto sol = solve_saddle(sp, fp, IntegratorConfig{}, s0);
    const auto& tr = sol.report.trajectory;
    o.require(tr.settle_time.has_value() && sol.report.final_grad_norm <= 1e-8 * (1 + 1e-9),
              sp.name + " did not reach the gradient threshold");
    o.require(tr.settle_time && *tr.settle_time <= tsp * kSlack, sp.name + " settle above bound");
    o.require(sol.report.distance_to_known && *sol.report.distance_to_known <= 1e-6,
              sp.name + " differs from the linear-system saddle");
    if (sol.report.distance_to_known) worst = std::max(worst, *sol.report.distance_to_known);
    return sol;
  };
  check(make_scalar_saddle(), Vector{4, -7});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SaddleProblem sp = make_random_bilinear_quad(5, 3, 900 + seed);
    check(sp, 10.0 * random_unit_vector(8, seed));
  }

  const ConstrainedProblem cp = make_random_constrained_qp(10, 3, 42);
  const Vector x0 = 2.0 * random_unit_vector(10, 43);
  const auto two_phase = solve_constrained(cp, fp, fp, IntegratorConfig{}, x0, Vector(3));
  const auto as_saddle = solve_saddle(make_constrained_as_saddle(cp), fp, IntegratorConfig{},
                                      Vector::stack(x0, Vector(3)));
  const double gap = std::max((two_phase.x - as_saddle.x).norm(), (two_phase.nu - as_saddle.z).norm());
  o.require(two_phase.report.converged && as_saddle.report.trajectory.settle_time && gap <= 1e-5,
            "constrained-as-saddle disagrees with the two-phase answer");
  if (o.ok) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "11 instances, worst oracle error %.2e; wrapped-vs-two-phase %.2e", worst,
                  gap);
    o.detail = buf;
  }
  return o;
}

// 7. Lyapunov inequality on the canonical p-rescaled and fixed-time experiments.
Outcome lyapunov_sweeps() {
  Outcome o;
  std::size_t checked = 0;
  for (const auto& spec : canonical_experiments()) {
    if (spec.flow != FlowKind::kPRescaled && spec.flow != FlowKind::kFixedTime) continue;
    const auto rep = run_experiment(spec);
    for (const auto& run : rep.runs) {
      o.require(run.lyapunov.has_value(), spec.name + " has no Lyapunov report");
      if (!run.lyapunov) continue;
      ++checked;
      o.require(run.lyapunov->pass && run.lyapunov->max_violation <= run.lyapunov->tolerance,
                spec.name + " violates its Lyapunov inequality");
    }
  }
  o.require(checked > 0, "no runs checked");
  if (o.ok) o.detail = std::to_string(checked) + " runs checked";
  return o;
}

// 8. Oracles and identities.
Outcome oracle_identities() {
  Outcome o;
  for (const auto& p : catalog(8, 3)) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Vector x = random_gaussian_vector(p.dim, 7000 + s);
      const Vector g = p.gradient(x);
      o.require((g - finite_diff_gradient(p.value, x)).norm() <= 1e-6 * std::max(1.0, g.norm()),
                "FD gradient mismatch on " + p.name);
      if (p.has_hessian()) {
        const Matrix h = p.hessian(x);
        o.require((h - finite_diff_hessian(p.value, x)).max_abs() <= 1e-4 * std::max(1.0, h.max_abs()),
                  "FD Hessian mismatch on " + p.name);
      }
    }
  }
  for (const FlowParams& fp : {FlowParams{}, FlowParams{0.5, 3.0, 5.0, 1.1}, FlowParams{2.0, 0.7, 2.2, 1.8}}) {
    const double a1 = fp.alpha1(), a2 = fp.alpha2();
    const double generic =
        generic_fixed_bound(fp.c1 * std::pow(2.0, a1 / 2), fp.c2 * std::pow(2.0, a2 / 2), a1 / 2, a2 / 2).value;
    o.require(rel(generic, bound_TNM(fp).value) <= 1e-12, "generic fixed-time identity");
  }
  for (double k : {0.1, 1.0, 7.0}) {
    for (double g0 : {1e-3, 1.0, 1e3}) {
      const double generic = generic_finite_bound(std::pow(2.0, 0.75) * k, 0.75, 0.5 * g0 * g0).value;
      o.require(rel(generic, bound_T1(k, g0).value) <= 1e-12, "generic finite-time identity");
    }
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto cp = make_random_constrained_qp(10, 3, seed);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Vector nu = random_gaussian_vector(3, 100 * seed + s);
      const Vector a = dual_function_gradient(cp, nu);
      o.require((a - dual_gradient_via_lagrangian(cp, nu)).norm() <= 1e-9 * std::max(1.0, a.norm()),
                "dual gradient paths disagree");
    }
  }
  if (o.ok) o.detail = "FD, identities and dual paths hold";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "closed-form settling", 1.0, closed_form_settling},
      {2, "finite-time bound dominance", 30.0, finite_time_dominance},
      {3, "fixed-time uniformity", 30.0, fixed_time_uniformity},
      {4, "Newton exact Lyapunov derivative", 10.0, newton_lyapunov},
      {5, "constrained two-phase solve", 30.0, constrained_solve},
      {6, "saddle dynamics", 30.0, saddle_dynamics},
      {7, "Lyapunov inequality sweeps", 30.0, lyapunov_sweeps},
      {8, "oracle and consistency identities", 10.0, oracle_identities},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      out.ok = false;
      out.detail += " (over time budget)";
    }
    std::printf("%s  criterion %d  %-34s %7.3fs  %s\n", out.ok ? "PASS" : "FAIL", c.id, c.name, secs,
                out.detail.c_str());
    failed += out.ok ? 0 : 1;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}

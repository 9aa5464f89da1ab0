#include "fxt/verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "fxt/analysis.hpp"
#include "fxt/errors.hpp"
#include "fxt/harness.hpp"

namespace fxt {

namespace {

class Suite {
 public:
  explicit Suite(std::string name) { result_.name = std::move(name); }

  void check(bool ok, const std::string& what) {
    if (ok) {
      ++result_.passed;
    } else {
      ++result_.failed;
      result_.failures.push_back(what);
    }
  }

  void near(double got, double want, double tol, const std::string& what) {
    char buf[128];
    std::snprintf(buf, sizeof buf, " (got %.12g, want %.12g, tol %.3g)", got, want, tol);
    check(std::abs(got - want) <= tol, what + buf);
  }

  // Runs body; an exception counts as one failure.
  void guarded(const std::string& what, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      check(false, what + " threw: " + e.what());
    }
  }

  SuiteResult take() { return std::move(result_); }

 private:
  SuiteResult result_;
};

std::vector<Vector> sample_points(std::size_t dim, double scale, std::uint64_t seed, std::size_t n) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(scale * random_gaussian_vector(dim, seed + i));
  return out;
}

SuiteResult problems_suite() {
  Suite s("problems");
  for (const auto& p : catalog(6, 3)) {
    s.guarded(p.name, [&] {
      const double scale = p.name == "pl-sine" ? 2.0 : 1.0;
      for (const auto& x : sample_points(p.dim, scale, 40, 3)) {
        const Vector g = p.gradient(x);
        const Vector fd = finite_diff_gradient(p.value, x);
        s.check((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()), p.name + ": FD gradient");
        if (p.has_hessian()) {
          const Matrix h = p.hessian(x);
          const Matrix fdh = finite_diff_hessian(p.value, x);
          s.check((h - fdh).max_abs() <= 1e-4 * std::max(1.0, h.max_abs()), p.name + ": FD Hessian");
        }
      }
      if (p.minimizer) {
        s.check(p.gradient(*p.minimizer).norm() <= 1e-8, p.name + ": gradient vanishes at x*");
      }
    });
  }

  s.guarded("constrained", [&] {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto cp = make_random_constrained_qp(10, 3, seed);
      for (const auto& nu : sample_points(3, 1.0, 60 + seed, 3)) {
        const Vector a = dual_function_gradient(cp, nu);
        const Vector b = dual_gradient_via_lagrangian(cp, nu);
        s.check((a - b).norm() <= 1e-9 * std::max(1.0, a.norm()), "dual gradient: two paths agree");
        const ScalarField g = [&](const Vector& v) { return dual_function_value(cp, v); };
        s.check((a - finite_diff_gradient(g, nu)).norm() <= 1e-6 * std::max(1.0, a.norm()),
                "dual gradient: FD check");
      }
      const Vector r = lagrangian_gradient_x(cp, *cp.known_x, *cp.known_nu);
      s.check(r.norm() <= 1e-9 && (cp.A * *cp.known_x - cp.b).norm() <= 1e-9, "KKT pair residuals");
    }
    const auto unit = make_unit_constrained_sphere();
    s.near((*unit.known_x)[0], 1.0, 1e-12, "unit instance x1");
    s.near((*unit.known_x)[1], 0.0, 1e-12, "unit instance x2");
    s.near((*unit.known_nu)[0], -1.0, 1e-12, "unit instance nu");
  });

  s.guarded("saddle", [&] {
    for (const auto& sp : saddle_catalog(5)) {
      const Vector x = random_gaussian_vector(sp.n, 81);
      const Vector z = random_gaussian_vector(sp.m, 82);
      const ScalarField fx = [&](const Vector& v) { return sp.value(v, z); };
      const ScalarField fz = [&](const Vector& v) { return sp.value(x, v); };
      s.check((sp.grad_x(x, z) - finite_diff_gradient(fx, x)).norm() <= 1e-6, sp.name + ": FD grad_x");
      s.check((sp.grad_z(x, z) - finite_diff_gradient(fz, z)).norm() <= 1e-6, sp.name + ": FD grad_z");
      if (sp.known_saddle) {
        const auto& [xs, zs] = *sp.known_saddle;
        s.check(sp.grad_x(xs, zs).norm() + sp.grad_z(xs, zs).norm() <= 1e-9,
                sp.name + ": gradient vanishes at the saddle");
      }
    }
  });
  return s.take();
}

SuiteResult flows_suite() {
  Suite s("flows");
  IntegratorConfig cfg;

  s.guarded("p=3 closed form", [&] {
    const auto field = build_p_flow(make_sphere(2), 3.0);
    IntegratorConfig c = cfg;
    c.t_max = 40.0;
    const auto traj = integrate(field, Vector{4.0, 0.0}, c);
    s.check(traj.settle_time.has_value(), "p=3 sphere converges");
    if (traj.settle_time) s.near(*traj.settle_time, 4.0, 0.04, "p=3 sphere settles at 4");
  });

  s.guarded("nominal linear decay", [&] {
    IntegratorConfig c = cfg;
    c.t_max = 1.0;
    const auto traj = integrate(build_nominal_flow(make_sphere(2)), Vector{1.0, 0.0}, c);
    s.near(traj.final_state()[0], std::exp(-1.0), 1e-6, "nominal flow reaches e^-1");
  });

  s.guarded("fixed-time sphere uniformity", [&] {
    const FlowParams fp;
    const auto field = build_fixed_time_flow(make_sphere(3), fp);
    const double bound = bound_T3(fp, Curvature::kStrict, 1.0).value;
    IntegratorConfig c = cfg;
    c.t_max = 10.0 * bound;
    const Vector dir = random_unit_vector(3, 7);
    for (double r : {1e-2, 1.0, 1e2, 1e4, 1e6}) {
      const auto traj = integrate(field, r * dir, c);
      s.check(traj.settle_time && *traj.settle_time <= 1.05 * bound,
              "fixed-time settle within T3 from norm " + std::to_string(r));
    }
  });

  s.guarded("newton lyapunov equality", [&] {
    const FlowParams fp;
    const RateModel rate = rate_newton(fp);
    for (const auto& p : catalog(5, 2)) {
      const auto field = build_newton_fixed_time_flow(p, fp);
      // pl-sine has an invertible Hessian only for |x| < 0.95.
      const double scale = p.name == "pl-sine" ? 0.3 : 1.0;
      for (const auto& x : sample_points(p.dim, scale, 90, 10)) {
        const double g = p.gradient(x).norm();
        const double want = rate(0.5 * g * g);
        const double got = chain_rule_lyapunov_rate(p, field, x);
        s.check(std::abs(got - want) <= 1e-9 * std::abs(want), p.name + ": chain-rule V-dot");
      }
    }
  });
  return s.take();
}

SuiteResult bounds_suite() {
  Suite s("bounds");
  const FlowParams fp;
  s.guarded("formulas", [&] {
    s.near(bound_T1(1.0, 4.0).value, 4.0, 1e-12, "T1(1, 4)");
    s.near(bound_T1(2.0, 16.0).value, 4.0, 1e-12, "T1(2, 16)");
    s.near(bound_T2(0.5, 1.0, true).value, 8.0, 1e-12, "T2 printed");
    s.near(bound_T2(0.5, 1.0, false).value, 8.0 * std::pow(0.5, 0.125), 1e-12, "T2 re-derived");
    s.near(bound_T3(fp, Curvature::kStrict, 1.0).value, 3.0855210111919895, 1e-12, "T3 strict");
    s.near(bound_T3(fp, Curvature::kPl, 0.5).value, 12.0, 1e-12, "T3 pl");
    s.near(bound_TNM(fp).value, 3.0855210111919895, 1e-12, "TNM");
    s.near(bound_TSP(fp).value, 3.0 * std::pow(2.0, 0.25), 1e-12, "TSP larger variant");
    s.near(generic_fixed_bound(1.0, 1.0, 0.5, 2.0).value, 3.0, 1e-12, "generic fixed");
    s.near(generic_finite_bound(1.0, 0.5, 1.0).value, 2.0, 1e-12, "generic finite");
    const double limit = bound_Tp_finite(Curvature::kStrict, 1e6, 2.0, 9.0).value;
    s.near(limit, 4.5, 4.5e-3, "Tp-finite large-p limit");
  });

  s.guarded("identities", [&] {
    const double a1 = fp.alpha1();
    const double a2 = fp.alpha2();
    const double tnm = bound_TNM(fp).value;
    const double gen = generic_fixed_bound(fp.c1 * std::pow(2.0, a1 / 2.0), fp.c2 * std::pow(2.0, a2 / 2.0),
                                           a1 / 2.0, a2 / 2.0)
                           .value;
    s.near(gen, tnm, 1e-12 * tnm, "generic fixed reproduces TNM");
    for (double k : {0.3, 1.0, 4.0}) {
      for (double g0 : {0.01, 1.0, 250.0}) {
        const double t1 = bound_T1(k, g0).value;
        const double fin = generic_finite_bound(std::pow(2.0, 0.75) * k, 0.75, 0.5 * g0 * g0).value;
        s.near(fin, t1, 1e-12 * t1, "generic finite reproduces T1");
      }
    }
    const double mu = 0.7, gap = 3.0;
    const double t2 = bound_T2(mu, gap, false).value;
    const double fin = generic_finite_bound(std::pow(2.0 * mu, 0.75), 0.875, 0.5 * gap * gap).value;
    s.near(fin, t2, 1e-12 * t2, "generic finite reproduces re-derived T2");
  });

  s.guarded("monotonicity", [&] {
    s.check(bound_T1(1.0, 2.0).value < bound_T1(1.0, 3.0).value, "T1 grows with grad0");
    s.check(bound_T1(2.0, 2.0).value < bound_T1(1.0, 2.0).value, "T1 shrinks with k");
    s.check(bound_T2(0.5, 2.0, true).value < bound_T2(0.5, 3.0, true).value, "T2 grows with gap0");
    s.check(bound_T2(1.0, 2.0, true).value < bound_T2(0.5, 2.0, true).value, "T2 shrinks with mu");
    FlowParams doubled = fp;
    doubled.c1 = doubled.c2 = 2.0;
    s.near(bound_TNM(doubled).value, 0.5 * bound_TNM(fp).value, 1e-12, "TNM halves with gains");
    s.near(bound_T3(fp, Curvature::kStrict, 2.0).value, 0.5 * bound_T3(fp, Curvature::kStrict, 1.0).value,
           1e-12, "T3 halves with k");
  });
  return s.take();
}

SuiteResult experiments_suite() {
  Suite s("experiments");
  for (const auto& spec : canonical_experiments()) {
    s.guarded(spec.name, [&] {
      const auto report = run_experiment(spec);
      for (const auto& r : report.runs) {
        std::string why = r.error;
        if (why.empty() && !run_passes(r, report.slack)) why = "bound or Lyapunov check failed";
        s.check(why.empty(), spec.name + " run " + std::to_string(r.index) + ": " + why);
      }
      const auto u = report.uniformity();
      if (u) s.check(*u, spec.name + ": uniformity");
    });
  }
  return s.take();
}

}  // namespace

std::string_view to_string(VerifyScope scope) {
  switch (scope) {
    case VerifyScope::kAll:
      return "all";
    case VerifyScope::kProblems:
      return "problems";
    case VerifyScope::kFlows:
      return "flows";
    case VerifyScope::kBounds:
      return "bounds";
    case VerifyScope::kExperiments:
      return "experiments";
  }
  return "unknown";
}

std::optional<VerifyScope> parse_verify_scope(std::string_view label) {
  for (auto s : {VerifyScope::kAll, VerifyScope::kProblems, VerifyScope::kFlows, VerifyScope::kBounds,
                 VerifyScope::kExperiments})
    if (to_string(s) == label) return s;
  return std::nullopt;
}

std::vector<SuiteResult> run_verification(VerifyScope scope) {
  std::vector<SuiteResult> out;
  const bool all = scope == VerifyScope::kAll;
  if (all || scope == VerifyScope::kProblems) out.push_back(problems_suite());
  if (all || scope == VerifyScope::kFlows) out.push_back(flows_suite());
  if (all || scope == VerifyScope::kBounds) out.push_back(bounds_suite());
  if (all || scope == VerifyScope::kExperiments) out.push_back(experiments_suite());
  return out;
}

}  // namespace fxt

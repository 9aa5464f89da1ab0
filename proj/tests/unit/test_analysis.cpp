#include <cmath>

#include "doctest.h"
#include "fxt/analysis.hpp"
#include "fxt/errors.hpp"

using namespace fxt;

namespace {

constexpr double kNewtonPattern = 3.0855210111919895;  // 2^{1/4}/0.5 + 2^{-1/2}

FlowParams gains(double c) {
  FlowParams fp;
  fp.c1 = fp.c2 = c;
  return fp;
}

}  // namespace

TEST_CASE("finite-time bounds by hand") {
  CHECK(bound_T1(1, 4).value == doctest::Approx(4.0));
  CHECK(bound_T1(2, 16).value == doctest::Approx(4.0));
  CHECK(bound_T1(1, 0).value == 0.0);

  CHECK(bound_T2(0.5, 1, true).value == doctest::Approx(8.0));
  CHECK(bound_T2(0.5, 1, false).value == doctest::Approx(8.0 * std::pow(0.5, 0.125)));
  CHECK_FALSE(bound_T2(0.5, 1, false).as_printed);
  CHECK(bound_T2(0.5, 0, true).value == 0.0);
  CHECK(bound_T2_max(0.5, 1).value == doctest::Approx(8.0));

  CHECK(bound_Tp_finite(Curvature::kStrict, 3, 1, 0).value == 0.0);
  const auto tp = bound_Tp_finite(Curvature::kStrict, 3, 1, 4);
  CHECK(tp.inputs.at("beta1") == doctest::Approx(0.75));
  CHECK(tp.inputs.at("beta2") == doctest::Approx(0.875));
  // Large p recovers ‖∇f(x0)‖/k.
  CHECK(bound_Tp_finite(Curvature::kStrict, 1e6, 2, 5).value == doctest::Approx(2.5).epsilon(1e-3));
}

TEST_CASE("fixed-time bounds by hand") {
  const FlowParams fp;
  CHECK(bound_T3(fp, Curvature::kStrict, 1).value == doctest::Approx(kNewtonPattern).epsilon(1e-12));
  CHECK(bound_T3(fp, Curvature::kStrict, 2).value ==
        doctest::Approx(kNewtonPattern / 2).epsilon(1e-12));
  CHECK(bound_T3(fp, Curvature::kPl, 0.5).value == doctest::Approx(12.0));
  CHECK(bound_TNM(fp).value == doctest::Approx(kNewtonPattern).epsilon(1e-12));
  CHECK(bound_TNM(gains(2)).value == doctest::Approx(kNewtonPattern / 2).epsilon(1e-12));

  FlowParams steep = fp;
  steep.p1 = 2.0 + 1e-9;  // alpha1 -> 2 is the pole
  CHECK(bound_TNM(steep).value > 1e6);

  const auto tsp = bound_TSP(fp);
  CHECK(tsp.inputs.at("printed") == doctest::Approx(3.0 * std::pow(2.0, 0.25)));
  CHECK(tsp.inputs.at("rederived") == doctest::Approx(kNewtonPattern));
  CHECK(tsp.value == doctest::Approx(3.0 * std::pow(2.0, 0.25)));
  const auto tsp2 = bound_TSP(gains(2));
  CHECK(tsp2.inputs.at("printed") == doctest::Approx(tsp.inputs.at("printed") / 2));
  CHECK(tsp2.inputs.at("rederived") == doctest::Approx(tsp.inputs.at("rederived") / 2));

  SettlingBound a, b;
  a.value = 3;
  b.value = 4;
  CHECK(bound_Tineq(a, b).value == 7.0);
  b.value = 0;
  CHECK(bound_Tineq(a, b).value == 3.0);
  const auto tnu = bound_Tnu(fp, 0.5);
  CHECK(tnu.value == doctest::Approx(12.0));
  CHECK(bound_Tineq(tnu, bound_T3(fp, Curvature::kStrict, 1)).value == doctest::Approx(12.0 + kNewtonPattern));
}

TEST_CASE("generic bounds and identities") {
  CHECK(generic_fixed_bound(1, 1, 0.5, 2).value == doctest::Approx(3.0));
  CHECK(generic_fixed_bound(1e12, 1, 0.5, 2).value == doctest::Approx(1.0));
  CHECK(generic_finite_bound(1, 0.5, 1).value == doctest::Approx(2.0));
  CHECK(generic_finite_bound(1, 0.5, 0).value == 0.0);

  for (const FlowParams& fp : {FlowParams{}, FlowParams{0.7, 2.5, 4.0, 1.2}, FlowParams{3, 0.2, 2.5, 1.9}}) {
    const double a1 = fp.alpha1(), a2 = fp.alpha2();
    const double g = generic_fixed_bound(fp.c1 * std::pow(2.0, a1 / 2), fp.c2 * std::pow(2.0, a2 / 2), a1 / 2,
                                         a2 / 2).value;
    CHECK(g == doctest::Approx(bound_TNM(fp).value).epsilon(1e-12));
  }
  for (double k : {0.3, 1.0, 4.0}) {
    for (double g0 : {0.01, 1.0, 250.0}) {
      CHECK(generic_finite_bound(std::pow(2.0, 0.75) * k, 0.75, 0.5 * g0 * g0).value ==
            doctest::Approx(bound_T1(k, g0).value).epsilon(1e-12));
      CHECK(generic_finite_bound(std::pow(2.0 * k, 0.75), 0.875, 0.5 * g0 * g0).value ==
            doctest::Approx(bound_T2(k, g0, false).value).epsilon(1e-12));
    }
  }
}

TEST_CASE("monotonicity of the finite-time bounds") {
  double prev1 = -1, prev2 = -1;
  for (double s = 0.0; s < 100; s += 0.5) {
    const double t1 = bound_T1(1.5, s).value, t2 = bound_T2(1.5, s, true).value;
    CHECK(t1 >= prev1);
    CHECK(t2 >= prev2);
    prev1 = t1;
    prev2 = t2;
  }
  CHECK(bound_T1(2, 9).value < bound_T1(1, 9).value);
  CHECK(bound_T2(2, 9, true).value < bound_T2(1, 9, true).value);
}

TEST_CASE("bound labels") {
  for (auto t : {BoundTag::kT1, BoundTag::kT2, BoundTag::kTpFinite, BoundTag::kT3Strict, BoundTag::kT3Pl,
                 BoundTag::kTNM, BoundTag::kTnu, BoundTag::kTineq, BoundTag::kTSP, BoundTag::kGenericFixed,
                 BoundTag::kGenericFinite}) {
    CHECK(parse_bound_tag(to_string(t)) == t);
  }
  CHECK(is_fixed_time(BoundTag::kTNM));
  CHECK_FALSE(is_fixed_time(BoundTag::kT1));
}

TEST_CASE("Lyapunov checks on real trajectories") {
  const FlowParams fp;
  IntegratorConfig cfg;
  cfg.t_max = 10.0;

  const Trajectory sphere = integrate(build_fixed_time_flow(make_sphere(3), fp), Vector{2, -1, 0.5}, cfg);
  const auto rep = check_lyapunov_inequality(sphere, rate_fixed_time_strict(fp, 1.0));
  CHECK(rep.pass);
  CHECK(rep.n_samples + 2 == sphere.size());

  // Equality needs a uniform fine grid; adaptive steps are too coarse for differencing.
  IntegratorConfig fine;
  fine.method = IntegrationMethod::kFixedRk4;
  fine.dt = 1e-3;
  fine.t_max = 10.0;
  fine.stop_grad_norm = 1e-5;
  for (const auto& p : catalog(4, 5)) {
    if (!p.has_hessian()) continue;
    CAPTURE(p.name);
    const double scale = p.name == "pl-sine" ? 0.3 : 2.0;
    const Trajectory tr = integrate(build_newton_fixed_time_flow(p, fp), scale * random_unit_vector(p.dim, 9), fine);
    const auto r = check_lyapunov_inequality(tr, rate_newton(fp));
    CHECK(r.pass);
    CHECK(r.max_abs_deviation <= r.tolerance);
  }

  const Trajectory pf = integrate(build_p_flow(make_sphere(2), 3.0), Vector{3, 1}, cfg);
  CHECK(check_lyapunov_inequality(pf, rate_p_flow_strict(3.0, 1.0)).pass);
}

TEST_CASE("Lyapunov check edge cases") {
  Trajectory flat;
  for (int i = 0; i < 5; ++i) {
    flat.times.push_back(i * 0.1);
    flat.states.push_back(Vector{1.0});
    flat.lyapunov_values.push_back(2.0);
  }
  const auto rep = check_lyapunov_inequality(flat, [](double) { return 0.0; });
  CHECK(rep.pass);
  CHECK(rep.max_violation == doctest::Approx(0.0));

  // A rate model that demands decay is violated by a constant V.
  CHECK_FALSE(check_lyapunov_inequality(flat, [](double v) { return -v; }).pass);

  Trajectory short_traj;
  short_traj.times = {0.0, 0.1};
  short_traj.lyapunov_values = {1.0, 0.5};
  CHECK_THROWS_AS(check_lyapunov_inequality(short_traj, [](double) { return 0.0; }), InsufficientRecords);
}

TEST_CASE("chain rule rate matches the Newton model") {
  const FlowParams fp;
  const auto p = make_random_quadratic(5, 0.5, 5.0, 4);
  const FlowField nf = build_newton_fixed_time_flow(p, fp);
  const auto model = rate_newton(fp);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Vector x = random_gaussian_vector(5, 100 + s);
    const double g = p.gradient(x).norm();
    const double rate = chain_rule_lyapunov_rate(p, nf, x);
    CHECK(rate == doctest::Approx(model(0.5 * g * g)).epsilon(1e-9));
  }
}

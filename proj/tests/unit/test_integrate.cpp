#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fxt/errors.hpp"
#include "fxt/integrate.hpp"

using namespace fxt;

namespace {

IntegratorConfig rk4(double dt, double t_max) {
  IntegratorConfig c;
  c.method = IntegrationMethod::kFixedRk4;
  c.dt = dt;
  c.t_max = t_max;
  return c;
}

IntegratorConfig adaptive(double t_max) {
  IntegratorConfig c;
  c.t_max = t_max;
  return c;
}

// Exact settle times of r' = -r^(1/2) - r^2 from r0 down to 1e-8.
constexpr std::pair<double, double> kSphereFixedTime[] = {
    {1e-2, 0.199750029}, {1.0, 1.671097697}, {1e2, 2.408203150}, {1e4, 2.418099152}, {1e6, 2.418198152}};

// f = x0² + x1: the Hessian is singular everywhere.
ObjectiveProblem flat_valley() {
  ObjectiveProblem p;
  p.name = "flat-valley";
  p.dim = 2;
  p.value = [](const Vector& x) { return x[0] * x[0] + x[1]; };
  p.gradient = [](const Vector& x) { return Vector{2 * x[0], 1.0}; };
  p.hessian = [](const Vector&) { return Matrix{{2, 0}, {0, 0}}; };
  return p;
}

}  // namespace

TEST_CASE("p = 3 on the sphere settles at 2 sqrt(|x0|)") {
  const FlowField f = build_p_flow(make_sphere(2), 3.0);
  const Trajectory tr = integrate(f, Vector{4, 0}, rk4(1e-4, 10.0));
  REQUIRE(tr.stop_reason == StopReason::kConverged);
  CHECK(*tr.settle_time == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(tr.settle_time == tr.final_time());
  CHECK(tr.grad_norms.back() <= 1e-8 * (1 + 1e-6));

  const Trajectory ad = integrate(f, Vector{4, 0}, adaptive(10.0));
  REQUIRE(ad.settle_time);
  CHECK(*ad.settle_time == doctest::Approx(*tr.settle_time).epsilon(1e-2));
}

TEST_CASE("starting at the minimizer settles at t = 0") {
  const Trajectory tr = integrate(build_fixed_time_flow(make_sphere(3), FlowParams{}), Vector(3),
                                  adaptive(5.0));
  CHECK(tr.stop_reason == StopReason::kConverged);
  CHECK(*tr.settle_time == 0.0);
  CHECK(tr.size() == 1);
}

TEST_CASE("nominal flow decays exponentially") {
  IntegratorConfig c = rk4(1e-3, 1.0);
  c.stop_grad_norm = 1e-10;
  const Trajectory tr = integrate(build_nominal_flow(make_sphere(1)), Vector{1.0}, c);
  CHECK(tr.stop_reason == StopReason::kHorizon);
  CHECK(tr.final_time() == doctest::Approx(1.0));
  CHECK(tr.final_state()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));

  IntegratorConfig e = c;
  e.method = IntegrationMethod::kFixedEuler;
  e.dt = 1e-4;
  const Trajectory te = integrate(build_nominal_flow(make_sphere(1)), Vector{1.0}, e);
  CHECK(te.final_state()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
}

TEST_CASE("fixed-time sweep on the sphere matches the exact settle times") {
  const FlowField f = build_fixed_time_flow(make_sphere(2), FlowParams{});
  const Vector dir = random_unit_vector(2, 7);
  std::vector<Vector> x0s;
  for (const auto& [r0, _] : kSphereFixedTime) x0s.push_back(r0 * dir);
  const auto sweep = settle_time_sweep(f, x0s, adaptive(10.0));
  REQUIRE(sweep.size() == x0s.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    CAPTURE(kSphereFixedTime[i].first);
    REQUIRE(sweep[i].settle_time);
    CHECK(*sweep[i].settle_time == doctest::Approx(kSphereFixedTime[i].second).epsilon(1e-4));
    CHECK(sweep[i].error.empty());
  }
}

TEST_CASE("fixed step results are stable under dt halving") {
  // Fixed steps chatter at a gradient scale set by dt, so the threshold here
  // sits well above it.
  const auto p = make_random_quadratic(4, 0.5, 5.0, 3);
  const FlowField f = build_fixed_time_flow(p, FlowParams{});
  const Vector x0 = 10.0 * random_unit_vector(4, 5);
  IntegratorConfig coarse = rk4(2e-4, 20.0), fine = rk4(1e-4, 20.0), ad = adaptive(20.0);
  coarse.stop_grad_norm = fine.stop_grad_norm = ad.stop_grad_norm = 1e-5;
  const auto ta = integrate(f, x0, coarse), tb = integrate(f, x0, fine), tc = integrate(f, x0, ad);
  REQUIRE(ta.settle_time);
  REQUIRE(tb.settle_time);
  REQUIRE(tc.settle_time);
  const double a = *ta.settle_time, b = *tb.settle_time, c = *tc.settle_time;
  CHECK(std::abs(a - b) <= 1e-3 * b);
  CHECK(std::abs(c - b) <= 1e-2 * b);
}

TEST_CASE("objective decreases along convex gradient flows") {
  for (const auto& p : catalog(4, 8)) {
    if (!p.convex) continue;
    CAPTURE(p.name);
    const Trajectory tr = integrate(build_fixed_time_flow(p, FlowParams{}), 3.0 * random_unit_vector(p.dim, 1),
                                    adaptive(50.0));
    CHECK(tr.stop_reason == StopReason::kConverged);
    for (std::size_t i = 1; i < tr.size(); ++i) REQUIRE(tr.objective_values[i] <= tr.objective_values[i - 1] + 1e-12);
  }
}

TEST_CASE("record stride keeps the final state") {
  IntegratorConfig c = rk4(1e-3, 10.0);
  c.record_stride = 7;
  c.stop_grad_norm = 1e-4;
  const Trajectory tr = integrate(build_p_flow(make_sphere(2), 3.0), Vector{1, 1}, c);
  REQUIRE(tr.stop_reason == StopReason::kConverged);
  CHECK(tr.final_time() == *tr.settle_time);
  CHECK(tr.size() < tr.accepted_steps);
}

TEST_CASE("trajectory CSV") {
  const Trajectory tr = integrate(build_fixed_time_flow(make_sphere(2), FlowParams{}), Vector{1, 0},
                                  adaptive(5.0));
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,x_0,x_1,grad_norm,f_value,lyapunov");
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == tr.size());
}

TEST_CASE("non-finite states raise with the partial trajectory") {
  FlowField f;
  f.dim = 1;
  f.velocity = [](const Vector&) { return Vector{1.0}; };
  f.driving_gradient = [](const Vector& x) { return Vector{x[0] > 0.5 ? std::nan("") : 1.0}; };
  try {
    integrate(f, Vector{0.0}, rk4(1e-2, 5.0));
    FAIL("expected NonFiniteState");
  } catch (const NonFiniteState& e) {
    CHECK(e.partial().size() >= 1);
    CHECK(e.partial().final_state()[0] <= 0.5 + 1e-12);
  }
  CHECK_THROWS_AS(integrate(build_nominal_flow(make_sphere(1)), Vector{std::nan("")}, adaptive(1.0)),
                  NonFiniteState);
}

TEST_CASE("singular Hessian ends the run with a stop reason") {
  const Trajectory tr = integrate(build_newton_fixed_time_flow(flat_valley(), FlowParams{}), Vector{1, 1},
                                  adaptive(5.0));
  CHECK(tr.stop_reason == StopReason::kSingularHessian);
  CHECK(tr.size() >= 1);
  CHECK_FALSE(tr.settle_time);
}

TEST_CASE("configuration errors") {
  const FlowField f = build_nominal_flow(make_sphere(2));
  IntegratorConfig c = adaptive(1.0);
  c.stop_grad_norm = 1e-13;
  CHECK_THROWS_AS(integrate(f, Vector{1, 0}, c), std::invalid_argument);
  CHECK_THROWS_AS(integrate(f, Vector{1, 0}, rk4(2.0, 1.0)), std::invalid_argument);
  c = adaptive(1.0);
  c.rel_tol = 0.0;
  CHECK_THROWS_AS(integrate(f, Vector{1, 0}, c), std::invalid_argument);
  CHECK_THROWS_AS(integrate(f, Vector{1, 0, 0}, adaptive(1.0)), DimensionMismatch);
  ObjectiveProblem no_opt = make_sphere(2);
  no_opt.optimum.reset();
  CHECK_THROWS_AS(integrate(build_nominal_flow(no_opt), Vector{1, 0}, adaptive(1.0), LyapunovKind::kGapSq),
                  MissingOptimum);
}

TEST_CASE("empty sweep and per-entry errors") {
  const FlowField f = build_nominal_flow(make_sphere(2));
  CHECK(settle_time_sweep(f, {}, adaptive(1.0)).empty());
  const std::vector<Vector> x0s{Vector{1, 0}, Vector{1, 0, 0}};
  const auto out = settle_time_sweep(f, x0s, adaptive(1.0));
  REQUIRE(out.size() == 2);
  CHECK(out[0].stop_reason == StopReason::kHorizon);
  CHECK_FALSE(out[1].error.empty());
}

TEST_CASE("method and Lyapunov labels round-trip") {
  for (auto m : {IntegrationMethod::kFixedEuler, IntegrationMethod::kFixedRk4, IntegrationMethod::kAdaptiveRk45})
    CHECK(parse_integration_method(to_string(m)) == m);
  for (auto l : {LyapunovKind::kGradSq, LyapunovKind::kGapSq, LyapunovKind::kNone})
    CHECK(parse_lyapunov_kind(to_string(l)) == l);
}

#include "fxt/flows.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "fxt/errors.hpp"

namespace fxt {

namespace {

constexpr std::array<std::pair<FlowKind, std::string_view>, 7> kFlowLabels{{
    {FlowKind::kNominal, "nominal"},
    {FlowKind::kPRescaled, "p-rescaled"},
    {FlowKind::kFixedTime, "fixed-time"},
    {FlowKind::kNewtonFixedTime, "newton-fixed-time"},
    {FlowKind::kDualAscent, "dual-ascent"},
    {FlowKind::kPrimalAtNuStar, "primal-at-nu-star"},
    {FlowKind::kSaddleNewton, "saddle-newton"},
}};

Vector solve_hessian(const Matrix& h, const Vector& rhs) {
  try {
    return lu_solve(h, rhs);
  } catch (const SingularMatrix& e) {
    throw SingularHessian(std::string("Hessian not invertible: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(FlowKind kind) {
  for (const auto& [k, label] : kFlowLabels)
    if (k == kind) return label;
  return "unknown";
}

std::optional<FlowKind> parse_flow_kind(std::string_view label) {
  for (const auto& [k, l] : kFlowLabels)
    if (l == label) return k;
  return std::nullopt;
}

double rescaling_exponent(double p) {
#ifdef FXT_MUTATE_FLOW_EXPONENT
  return (p - 2.0) / p;
#else
  return (p - 2.0) / (p - 1.0);
#endif
}

void FlowParams::validate() const {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("FlowParams: c1, c2 must be > 0");
  if (!(p1 > 2.0)) throw std::invalid_argument("FlowParams: p1 must be > 2");
  if (!(p2 > 1.0 && p2 < 2.0)) throw std::invalid_argument("FlowParams: p2 must lie in (1, 2)");
  if (!(eps_sing > 0.0)) throw std::invalid_argument("FlowParams: eps_sing must be > 0");
  if (!std::isfinite(c1) || !std::isfinite(c2) || !std::isfinite(p1)) {
    throw std::invalid_argument("FlowParams: parameters must be finite");
  }
}

Vector rescaled_direction(const Vector& g, double exponent_e, double eps_sing) {
  const double ng = g.norm();
  if (ng <= eps_sing) return Vector(g.size());
  return (-std::pow(ng, -exponent_e)) * g;
}

Vector fixed_time_drive(const Vector& g, const FlowParams& fp) {
  Vector out = fp.c1 * rescaled_direction(g, fp.e1(), fp.eps_sing);
  out += fp.c2 * rescaled_direction(g, fp.e2(), fp.eps_sing);
  return out;
}

FlowField build_nominal_flow(const ObjectiveProblem& p) {
  auto prob = std::make_shared<const ObjectiveProblem>(p);
  FlowField field;
  field.kind = FlowKind::kNominal;
  field.problem_name = p.name;
  field.dim = p.dim;
  field.velocity = [prob](const Vector& x) { return -prob->gradient(x); };
  field.driving_gradient = [prob](const Vector& x) { return prob->gradient(x); };
  field.objective = prob->value;
  field.optimum = p.optimum;
  field.monotone_gradient_norm = p.convex;
  return field;
}

FlowField build_p_flow(const ObjectiveProblem& p, double pexp, double eps_sing) {
  if (!(pexp > 2.0)) throw std::invalid_argument("build_p_flow: p must be > 2");
  auto prob = std::make_shared<const ObjectiveProblem>(p);
  const double e = rescaling_exponent(pexp);
  FlowField field;
  field.kind = FlowKind::kPRescaled;
  field.problem_name = p.name;
  field.dim = p.dim;
  field.velocity = [prob, e, eps_sing](const Vector& x) {
    return rescaled_direction(prob->gradient(x), e, eps_sing);
  };
  field.driving_gradient = [prob](const Vector& x) { return prob->gradient(x); };
  field.objective = prob->value;
  field.optimum = p.optimum;
  field.monotone_gradient_norm = p.convex;
  field.params.p1 = pexp;
  field.params.eps_sing = eps_sing;
  field.eps_sing = eps_sing;
  return field;
}

FlowField build_fixed_time_flow(const ObjectiveProblem& p, const FlowParams& fp) {
  fp.validate();
  auto prob = std::make_shared<const ObjectiveProblem>(p);
  FlowField field;
  field.kind = FlowKind::kFixedTime;
  field.problem_name = p.name;
  field.dim = p.dim;
  field.velocity = [prob, fp](const Vector& x) { return fixed_time_drive(prob->gradient(x), fp); };
  field.driving_gradient = [prob](const Vector& x) { return prob->gradient(x); };
  field.objective = prob->value;
  field.optimum = p.optimum;
  field.monotone_gradient_norm = p.convex;
  field.params = fp;
  field.eps_sing = fp.eps_sing;
  return field;
}

FlowField build_newton_fixed_time_flow(const ObjectiveProblem& p, const FlowParams& fp) {
  fp.validate();
  if (!p.has_hessian()) {
    throw std::invalid_argument("build_newton_fixed_time_flow: '" + p.name +
                                "' has no Hessian oracle");
  }
  auto prob = std::make_shared<const ObjectiveProblem>(p);
  FlowField field;
  field.kind = FlowKind::kNewtonFixedTime;
  field.problem_name = p.name;
  field.dim = p.dim;
  field.velocity = [prob, fp](const Vector& x) {
    const Vector g = prob->gradient(x);
    if (g.norm() <= fp.eps_sing) return Vector(g.size());
    return solve_hessian(prob->hessian(x), fixed_time_drive(g, fp));
  };
  field.driving_gradient = [prob](const Vector& x) { return prob->gradient(x); };
  field.objective = prob->value;
  field.optimum = p.optimum;
  field.monotone_gradient_norm = true;
  field.params = fp;
  field.eps_sing = fp.eps_sing;
  return field;
}

FlowField build_dual_ascent_flow(const ConstrainedProblem& cp, const FlowParams& fp) {
  fp.validate();
  auto prob = std::make_shared<const ConstrainedProblem>(cp);
  // ∇h = −∇g.
  auto grad_h = [prob](const Vector& nu) { return -dual_function_gradient(*prob, nu); };
  FlowField field;
  field.kind = FlowKind::kDualAscent;
  field.problem_name = cp.name;
  field.dim = cp.m();
  field.velocity = [grad_h, fp](const Vector& nu) { return fixed_time_drive(grad_h(nu), fp); };
  field.driving_gradient = grad_h;
  field.objective = [prob](const Vector& nu) { return -dual_function_value(*prob, nu); };
  if (cp.known_nu) field.optimum = -dual_function_value(cp, *cp.known_nu);
  field.monotone_gradient_norm = true;  // h is convex
  field.params = fp;
  field.eps_sing = fp.eps_sing;
  return field;
}

FlowField build_primal_flow_at_nu(const ConstrainedProblem& cp, const Vector& nu_star,
                                  const FlowParams& fp) {
  fp.validate();
  if (nu_star.size() != cp.m()) throw DimensionMismatch("build_primal_flow_at_nu: ν* length");
  auto prob = std::make_shared<const ConstrainedProblem>(cp);
  auto nu = std::make_shared<const Vector>(nu_star);
  FlowField field;
  field.kind = FlowKind::kPrimalAtNuStar;
  field.problem_name = cp.name;
  field.dim = cp.n();
  field.velocity = [prob, nu, fp](const Vector& x) {
    return fixed_time_drive(lagrangian_gradient_x(*prob, x, *nu), fp);
  };
  field.driving_gradient = [prob, nu](const Vector& x) {
    return lagrangian_gradient_x(*prob, x, *nu);
  };
  field.objective = [prob, nu](const Vector& x) {
    return prob->objective.value(x) + nu->dot(prob->A * x - prob->b);
  };
  field.monotone_gradient_norm = cp.objective.convex;
  field.params = fp;
  field.eps_sing = fp.eps_sing;
  return field;
}

FlowField build_saddle_newton_flow(const SaddleProblem& sp, const FlowParams& fp) {
  fp.validate();
  auto prob = std::make_shared<const SaddleProblem>(sp);
  const std::size_t n = sp.n;
  const std::size_t m = sp.m;
  auto stacked_gradient = [prob, n, m](const Vector& s) {
    const Vector x = s.segment(0, n);
    const Vector z = s.segment(n, m);
    return Vector::stack(prob->grad_x(x, z), prob->grad_z(x, z));
  };
  FlowField field;
  field.kind = FlowKind::kSaddleNewton;
  field.problem_name = sp.name;
  field.dim = n + m;
  field.velocity = [prob, fp, n, m, stacked_gradient](const Vector& s) {
    const Vector v = stacked_gradient(s);
    if (v.norm() <= fp.eps_sing) return Vector(v.size());
    const Vector x = s.segment(0, n);
    const Vector z = s.segment(n, m);
    return solve_hessian(full_saddle_hessian(*prob, x, z), fixed_time_drive(v, fp));
  };
  field.driving_gradient = stacked_gradient;
  field.objective = [prob, n, m](const Vector& s) {
    return prob->value(s.segment(0, n), s.segment(n, m));
  };
  field.monotone_gradient_norm = true;
  // No optimum: F is not minimized along the flow, so a gap Lyapunov
  // function does not apply.
  field.params = fp;
  field.eps_sing = fp.eps_sing;
  return field;
}

}  // namespace fxt

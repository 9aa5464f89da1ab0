#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "fxt/numerics.hpp"
#include "fxt/problems.hpp"

namespace fxt {

enum class FlowKind {
  kNominal,
  kPRescaled,
  kFixedTime,
  kNewtonFixedTime,
  kDualAscent,
  kPrimalAtNuStar,
  kSaddleNewton,
};

std::string_view to_string(FlowKind kind);
/// Parses the labels used in configs ("fixed-time", "saddle-newton", ...).
std::optional<FlowKind> parse_flow_kind(std::string_view label);

/// Rescaling exponent (p − 2)/(p − 1) of the p-flow family.
double rescaling_exponent(double p);

/// Gains and exponents shared by every flow. Single-exponent flows read only
/// (c1, p1); the primal phase of the constrained solver reads them as (d1, d2, q1, q2).
struct FlowParams {
  double c1 = 1.0;
  double c2 = 1.0;
  double p1 = 3.0;
  double p2 = 1.5;
  double eps_sing = 1e-12;

  /// Throws std::invalid_argument unless c1, c2 > 0, p1 > 2, 1 < p2 < 2, eps_sing > 0.
  void validate() const;

  /// e1 = (p1−2)/(p1−1) ∈ (0,1).
  [[nodiscard]] double e1() const { return rescaling_exponent(p1); }
  /// e2 = (p2−2)/(p2−1) < 0.
  [[nodiscard]] double e2() const { return rescaling_exponent(p2); }
  /// α1 = 2 − e1 ∈ (1,2).
  [[nodiscard]] double alpha1() const { return 2.0 - e1(); }
  /// α2 = 2 − e2 > 2.
  [[nodiscard]] double alpha2() const { return 2.0 - e2(); }
};

/// −g / ‖g‖^e, or zero inside the regularization ball ‖g‖ ≤ eps_sing.
Vector rescaled_direction(const Vector& g, double exponent_e, double eps_sing);

/// State → velocity map together with the quantities the integrator traces.
struct FlowField {
  FlowKind kind = FlowKind::kNominal;
  std::string problem_name;
  std::size_t dim = 0;
  std::function<Vector(const Vector&)> velocity;
  /// The gradient whose vanishing defines the equilibrium: ∇f, ∇h, ∇ₓL or ∇F.
  std::function<Vector(const Vector&)> driving_gradient;
  /// Objective traced along the run (f, h = −g, L(·,ν*), or F); may be empty.
  std::function<double(const Vector&)> objective;
  std::optional<double> optimum;
  /// The exact flow never increases ‖driving gradient‖ (Newton-type flows,
  /// and gradient-type flows on convex problems). The adaptive integrator
  /// rejects steps that break this.
  bool monotone_gradient_norm = false;
  FlowParams params;
  double eps_sing = 1e-12;
};

/// ẋ = −∇f.
FlowField build_nominal_flow(const ObjectiveProblem& p);

/// ẋ = −∇f/‖∇f‖^((p−2)/(p−1)), p > 2.
FlowField build_p_flow(const ObjectiveProblem& p, double pexp, double eps_sing = 1e-12);

/// ẋ = −c1 ∇f/‖∇f‖^e1 − c2 ∇f/‖∇f‖^e2.
FlowField build_fixed_time_flow(const ObjectiveProblem& p, const FlowParams& fp);

/// ∇²f ẋ = −(c1 ∇f/‖∇f‖^e1 + c2 ∇f/‖∇f‖^e2). Velocity throws SingularHessian
/// where ∇²f cannot be inverted.
FlowField build_newton_fixed_time_flow(const ObjectiveProblem& p, const FlowParams& fp);

/// Fixed-time flow on h(ν) = −g(ν), state ν ∈ ℝᵐ.
FlowField build_dual_ascent_flow(const ConstrainedProblem& cp, const FlowParams& fp);

/// Fixed-time flow on x ↦ L(x, ν*).
FlowField build_primal_flow_at_nu(const ConstrainedProblem& cp, const Vector& nu_star,
                                  const FlowParams& fp);

/// Newton-type fixed-time flow on the stacked state s = (x, z):
/// ∇²F ṡ = −(c1 v/‖v‖^e1 + c2 v/‖v‖^e2) with v = ∇F.
FlowField build_saddle_newton_flow(const SaddleProblem& sp, const FlowParams& fp);

/// c1·rescaled(g, e1) + c2·rescaled(g, e2): the negated fixed-time drive −w.
Vector fixed_time_drive(const Vector& g, const FlowParams& fp);

}  // namespace fxt

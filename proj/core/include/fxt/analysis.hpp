#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "fxt/flows.hpp"
#include "fxt/integrate.hpp"
#include "fxt/problems.hpp"

namespace fxt {

enum class BoundTag {
  kT1,
  kT2,
  kTpFinite,
  kT3Strict,
  kT3Pl,
  kTNM,
  kTnu,
  kTineq,
  kTSP,
  kGenericFixed,
  kGenericFinite,
};

std::string_view to_string(BoundTag tag);
std::optional<BoundTag> parse_bound_tag(std::string_view label);

/// True for bounds that take no initial-condition data.
bool is_fixed_time(BoundTag tag);

/// Which curvature certificate a bound consumes.
enum class Curvature { kStrict, kPl };

struct SettlingBound {
  BoundTag tag = BoundTag::kT1;
  double value = 0.0;
  /// Every number that entered the formula, by name.
  std::map<std::string, double> inputs;
  /// False when value is the re-derived variant rather than the formula as printed.
  bool as_printed = true;
  /// "certified" or "empirical-certificate" (sampled PL constant).
  std::string certificate = "certified";
};

/// 2‖∇f(x0)‖^½ / k.
SettlingBound bound_T1(double k, double grad0_norm);

/// Printed: 8·gap0^{1/8}/(2μ)^{3/4}. Re-derived from V0 = ½gap0² and
/// V̇ ≤ −(2μ)^{3/4}V^{7/8}: 8·(½gap0²)^{1/8}/(2μ)^{3/4}.
SettlingBound bound_T2(double mu, double gap0, bool as_printed);
/// The larger of the two T2 variants; both are kept in inputs.
SettlingBound bound_T2_max(double mu, double gap0);

/// p-flow finite-time bound. `initial` is ‖∇f(x0)‖ (strict) or f(x0) − f* (pl).
/// For pl, k2 defaults to (2μ)^{β1}.
SettlingBound bound_Tp_finite(Curvature which, double pexp, double k_or_mu, double initial,
                              std::optional<double> k2 = std::nullopt);

/// Fixed-time bound of the two-term flow; k (strict) or μ (pl).
SettlingBound bound_T3(const FlowParams& fp, Curvature which, double k_or_mu);

/// Newton fixed-time bound; independent of the problem.
SettlingBound bound_TNM(const FlowParams& fp);

/// Saddle bound. Computes the printed formula (second numerator 2^{1−α1/2})
/// and the Newton-pattern variant (2^{1−α2/2}) and returns the larger.
SettlingBound bound_TSP(const FlowParams& fp);

/// Dual phase of the constrained solve: T3 (pl) with the dual PL constant.
SettlingBound bound_Tnu(const FlowParams& fp, double dual_mu);

/// t_nu + t_x.
SettlingBound bound_Tineq(const SettlingBound& t_nu, const SettlingBound& t_x);

/// From V̇ ≤ −a V^α − b V^β, α < 1 < β: 1/(a(1−α)) + 1/(b(β−1)).
SettlingBound generic_fixed_bound(double a_ft, double b_ft, double alpha_ft, double beta_ft);

/// From V̇ ≤ −c V^α, α ∈ (0,1): V0^{1−α}/(c(1−α)).
SettlingBound generic_finite_bound(double c, double alpha, double v0);

// ---------------------------------------------------------------------------
// Lyapunov rate models: V ↦ the upper bound the proofs place on V̇.

using RateModel = std::function<double(double)>;

/// p-flow with V = ½‖∇f‖²: −k(2V)^{1−e/2}.
RateModel rate_p_flow_strict(double pexp, double k);
/// p-flow with V = ½(f − f*)²: −(2μ)^{β1}V^{β2}.
RateModel rate_p_flow_pl(double pexp, double mu);
/// Fixed-time flow with V = ½‖∇f‖².
RateModel rate_fixed_time_strict(const FlowParams& fp, double k);
/// Fixed-time flow with V = ½(f − f*)².
RateModel rate_fixed_time_pl(const FlowParams& fp, double mu);
/// Newton-type flows with V = ½‖∇‖²; holds with equality.
RateModel rate_newton(const FlowParams& fp);

struct LyapunovCheckReport {
  std::size_t n_samples = 0;
  /// Most positive V̇_est − rhs(V) seen.
  double max_violation = 0.0;
  /// Largest |V̇_est − rhs(V)|; small when the model holds with equality.
  double max_abs_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Central-difference estimate of V̇ at every interior record (nonuniform
/// spacing) compared against rhs(V). Default tol = 1e-3·max(1, max|V̇_est|).
/// Throws InsufficientRecords below three finite records.
LyapunovCheckReport check_lyapunov_inequality(const Trajectory& traj, const RateModel& rhs,
                                              std::optional<double> tol = std::nullopt);

/// Chain-rule V̇ = ∇ᵀ(∇²)ẋ for V = ½‖∇f‖² under the given field.
double chain_rule_lyapunov_rate(const ObjectiveProblem& p, const FlowField& field, const Vector& x);

}  // namespace fxt

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fxt/errors.hpp"
#include "fxt/flows.hpp"
#include "fxt/numerics.hpp"

namespace fxt {

enum class IntegrationMethod { kFixedEuler, kFixedRk4, kAdaptiveRk45 };

std::string_view to_string(IntegrationMethod method);
std::optional<IntegrationMethod> parse_integration_method(std::string_view label);

/// Horizon used when neither the config nor a theoretical bound supplies one.
inline constexpr double kDefaultHorizon = 100.0;
/// Smallest step the adaptive controller will take.
inline constexpr double kMinAdaptiveStep = 1e-12;

struct IntegratorConfig {
  IntegrationMethod method = IntegrationMethod::kAdaptiveRk45;
  double dt = 1e-3;       // fixed-step methods; also the first trial step bound
  double rel_tol = 1e-8;  // adaptive only
  double abs_tol = 1e-10;
  std::optional<double> t_max;
  double stop_grad_norm = 1e-8;
  std::size_t record_stride = 1;
  std::size_t max_steps = 20'000'000;

  [[nodiscard]] double horizon() const { return t_max.value_or(kDefaultHorizon); }
  /// Throws std::invalid_argument on non-positive tolerances, dt ≥ t_max, or a
  /// stopping threshold at or below the flow's regularization radius.
  void validate(double eps_sing) const;
};

enum class LyapunovKind {
  kGradSq,  // V = ½‖∇‖²
  kGapSq,   // V = ½(f − f*)²
  kNone,
};

std::string_view to_string(LyapunovKind kind);
std::optional<LyapunovKind> parse_lyapunov_kind(std::string_view label);

enum class StopReason { kConverged, kHorizon, kSingularHessian };

std::string_view to_string(StopReason reason);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> grad_norms;
  /// NaN where the field has no objective.
  std::vector<double> objective_values;
  /// NaN when LyapunovKind::kNone.
  std::vector<double> lyapunov_values;
  LyapunovKind lyapunov = LyapunovKind::kNone;

  StopReason stop_reason = StopReason::kHorizon;
  /// Present iff stop_reason == kConverged; equals the final time.
  std::optional<double> settle_time;
  std::string message;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
  [[nodiscard]] const Vector& final_state() const { return states.back(); }
  [[nodiscard]] double final_time() const { return times.back(); }
};

/// Thrown when a state entry or the driving gradient becomes non-finite.
/// Carries everything recorded up to the failure.
class NonFiniteState : public Error {
 public:
  NonFiniteState(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// Integrates the field from x0 until ‖driving gradient‖ ≤ stop_grad_norm,
/// the horizon, or a singular Hessian (returned as stop reason with the
/// partial trajectory). The converging step is cut back so the final record
/// sits on the threshold crossing.
Trajectory integrate(const FlowField& field, const Vector& x0, const IntegratorConfig& cfg,
                     LyapunovKind lyap = LyapunovKind::kGradSq);

struct SweepEntry {
  Vector x0;
  std::optional<double> settle_time;
  std::optional<StopReason> stop_reason;
  double final_time = 0.0;
  double final_grad_norm = 0.0;
  std::string error;  // non-empty when the run threw
};

/// One integration per initial condition, in input order. Errors are captured
/// per entry; the sweep never aborts.
std::vector<SweepEntry> settle_time_sweep(const FlowField& field, std::span<const Vector> x0s,
                                          const IntegratorConfig& cfg,
                                          LyapunovKind lyap = LyapunovKind::kGradSq);

/// Header `t,x_0..x_{n-1},grad_norm,f_value,lyapunov`, one row per record.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace fxt

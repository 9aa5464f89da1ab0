#include "fxt/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fxt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Dormand-Prince 5(4) tableau.
namespace dp {
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b − b̂ (fifth minus fourth order weights).
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
}  // namespace dp

// y + h Σ wᵢ kᵢ
Vector combine(const Vector& y, double h, std::initializer_list<std::pair<double, const Vector*>> terms) {
  Vector out = y;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (const auto& [w, k] : terms) acc += w * (*k)[i];
    out[i] += h * acc;
  }
  return out;
}

struct Rk45Result {
  Vector y;
  Vector k7;  // f(y), reused as k1 of the next step
  double err = 0.0;
};

class Integrator {
 public:
  Integrator(const FlowField& field, const IntegratorConfig& cfg, LyapunovKind lyap)
      : field_(field), cfg_(cfg), lyap_(lyap) {
    traj_.lyapunov = lyap;
  }

  Trajectory run(const Vector& x0) {
    if (x0.size() != field_.dim) {
      throw DimensionMismatch("integrate: x0 has dimension " + std::to_string(x0.size()) +
                              ", field expects " + std::to_string(field_.dim));
    }
    if (lyap_ == LyapunovKind::kGapSq && (!field_.optimum || !field_.objective)) {
      throw MissingOptimum("integrate: gap-sq Lyapunov needs a known optimum for '" +
                           field_.problem_name + "'");
    }
    if (!x0.all_finite()) throw NonFiniteState("integrate: x0 is not finite", traj_);

    const double g0 = grad_norm(x0);
    record(0.0, x0, g0);
    if (g0 <= cfg_.stop_grad_norm) {
      finish_converged(0.0);
      return std::move(traj_);
    }

    try {
      if (cfg_.method == IntegrationMethod::kAdaptiveRk45) {
        run_adaptive(x0, g0);
      } else {
        run_fixed(x0, g0);
      }
    } catch (const SingularHessian& e) {
      traj_.stop_reason = StopReason::kSingularHessian;
      traj_.message = e.what();
      if (!pending_final_.empty()) append_pending();
    }
    return std::move(traj_);
  }

 private:
  double grad_norm(const Vector& y) const { return field_.driving_gradient(y).norm(); }

  Vector velocity(const Vector& y) const { return field_.velocity(y); }

  void record(double t, const Vector& y, double gnorm) {
    traj_.times.push_back(t);
    traj_.states.push_back(y);
    traj_.grad_norms.push_back(gnorm);
    const double f = field_.objective ? field_.objective(y) : kNaN;
    traj_.objective_values.push_back(f);
    double v = kNaN;
    switch (lyap_) {
      case LyapunovKind::kGradSq:
        v = 0.5 * gnorm * gnorm;
        break;
      case LyapunovKind::kGapSq: {
        const double gap = f - *field_.optimum;
        v = 0.5 * gap * gap;
        break;
      }
      case LyapunovKind::kNone:
        break;
    }
    traj_.lyapunov_values.push_back(v);
  }

  // Holds the latest unrecorded state so the final record is always present.
  void stash(double t, const Vector& y, double gnorm) {
    pending_t_ = t;
    pending_final_ = y;
    pending_g_ = gnorm;
  }

  void append_pending() {
    if (pending_final_.empty()) return;
    if (traj_.times.empty() || traj_.times.back() < pending_t_) {
      record(pending_t_, pending_final_, pending_g_);
    }
    pending_final_ = Vector();
  }

  void accept(double t, const Vector& y, double gnorm) {
    ++traj_.accepted_steps;
    if (traj_.accepted_steps % cfg_.record_stride == 0) {
      record(t, y, gnorm);
      pending_final_ = Vector();
    } else {
      stash(t, y, gnorm);
    }
  }

  void finish_converged(double t) {
    traj_.stop_reason = StopReason::kConverged;
    traj_.settle_time = t;
  }

  void finish_horizon(const char* why) {
    append_pending();
    traj_.stop_reason = StopReason::kHorizon;
    traj_.message = why;
  }

  [[noreturn]] void fail_non_finite(double t) {
    append_pending();
    char buf[96];
    std::snprintf(buf, sizeof buf, "non-finite state or gradient at t=%.6g", t);
    traj_.message = buf;
    throw NonFiniteState(buf, std::move(traj_));
  }

  // Cuts the step that crossed the threshold back to the crossing, starting
  // from the linear interpolant of the gradient norm and refining by
  // Illinois regula falsi. The final state satisfies ‖∇‖ ≤ threshold.
  template <typename StepFn>
  void converge_at_crossing(double t0, double g0, double h1, const Vector& y1,
                            double g1, StepFn&& step_from_y0) {
    const double thr = cfg_.stop_grad_norm;
    double lo = 0.0, f_lo = g0 - thr;
    double hi = h1, f_hi = g1 - thr;
    Vector y_hi = y1;
    double g_hi = g1;
    int stale_side = 0;
    for (int it = 0; it < 40; ++it) {
      if (f_hi >= -1e-3 * thr || hi - lo <= 1e-15 * std::max(1.0, t0)) break;
      const double h = hi - f_hi * (hi - lo) / (f_hi - f_lo);
      if (!(h > lo && h < hi)) break;
      const Vector y = step_from_y0(h);
      if (!y.all_finite()) break;
      const double g = grad_norm(y);
      if (!std::isfinite(g)) break;
      const double f = g - thr;
      if (f <= 0.0) {
        hi = h;
        f_hi = f;
        y_hi = y;
        g_hi = g;
        if (stale_side == -1) f_lo *= 0.5;
        stale_side = -1;
      } else {
        lo = h;
        f_lo = f;
        if (stale_side == 1) f_hi *= 0.5;
        stale_side = 1;
      }
    }
    ++traj_.accepted_steps;
    pending_final_ = Vector();
    record(t0 + hi, y_hi, g_hi);
    finish_converged(t0 + hi);
  }

  Vector fixed_step(const Vector& y, double h, const Vector& k1) const {
    if (cfg_.method == IntegrationMethod::kFixedEuler) return combine(y, h, {{1.0, &k1}});
    const Vector k2 = velocity(combine(y, 0.5 * h, {{1.0, &k1}}));
    const Vector k3 = velocity(combine(y, 0.5 * h, {{1.0, &k2}}));
    const Vector k4 = velocity(combine(y, h, {{1.0, &k3}}));
    return combine(y, h, {{1.0 / 6.0, &k1}, {1.0 / 3.0, &k2}, {1.0 / 3.0, &k3}, {1.0 / 6.0, &k4}});
  }

  void run_fixed(const Vector& x0, double g0) {
    const double t_end = cfg_.horizon();
    double t = 0.0;
    Vector y = x0;
    double g = g0;
    std::size_t steps = 0;
    while (t < t_end) {
      if (steps++ >= cfg_.max_steps) return finish_horizon("step limit reached");
      const double h = std::min(cfg_.dt, t_end - t);
      const Vector k1 = velocity(y);
      Vector y_new = fixed_step(y, h, k1);
      if (!y_new.all_finite()) fail_non_finite(t + h);
      const double g_new = grad_norm(y_new);
      if (!std::isfinite(g_new)) fail_non_finite(t + h);
      if (g_new <= cfg_.stop_grad_norm) {
        converge_at_crossing(t, g, h, y_new, g_new,
                             [&](double hh) { return fixed_step(y, hh, k1); });
        return;
      }
      // Land exactly on the horizon to avoid a sliver step from rounding.
      t = (t_end - t - h) <= 1e-12 * std::max(1.0, t_end) ? t_end : t + h;
      y = std::move(y_new);
      g = g_new;
      accept(t, y, g);
    }
    finish_horizon("horizon reached");
  }

  Rk45Result rk45_step(const Vector& y, double h, const Vector& k1, bool want_error) const {
    using namespace dp;
    const Vector k2 = velocity(combine(y, h, {{a21, &k1}}));
    const Vector k3 = velocity(combine(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vector k4 = velocity(combine(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vector k5 = velocity(combine(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vector k6 =
        velocity(combine(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    Rk45Result out;
    out.y = combine(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    if (!want_error || !out.y.all_finite()) {
      out.err = std::numeric_limits<double>::infinity();
      return out;
    }
    out.k7 = velocity(out.y);
    // The relative part is taken against the step's displacement, not |y|:
    // an offset minimizer would otherwise set a state resolution too coarse
    // to resolve the gradient threshold, and the controller settles into an
    // accepted ringing cycle at the stability edge.
    double displacement = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      displacement = std::max(displacement, std::abs(out.y[i] - y[i]));
    }
    const double scale = cfg_.abs_tol + cfg_.rel_tol * displacement;
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * out.k7[i]);
      sum += (e / scale) * (e / scale);
    }
    out.err = y.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(y.size()));
    if (!std::isfinite(out.err)) out.err = std::numeric_limits<double>::infinity();
    return out;
  }

  // Rounding headroom when comparing successive gradient norms.
  static double g_new_allowance(double g) { return g * (1.0 + 1e-9) + 1e-15; }

  double initial_step(const Vector& y0, const Vector& f0) const {
    // Hairer-Nørsett-Wanner starting step heuristic.
    auto scaled_rms = [&](const Vector& v, const Vector& ref) {
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(ref[i]);
        s += (v[i] / sc) * (v[i] / sc);
      }
      return std::sqrt(s / static_cast<double>(v.size()));
    };
    const double d0 = scaled_rms(y0, y0);
    const double d1 = scaled_rms(f0, y0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, cfg_.horizon());
    const Vector y1 = combine(y0, h0, {{1.0, &f0}});
    if (!y1.all_finite()) return std::max(kMinAdaptiveStep, h0 * 1e-3);
    const Vector f1 = velocity(y1);
    const double d2 = scaled_rms(f1 - f0, y0) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::clamp(std::min(100.0 * h0, h1), kMinAdaptiveStep, cfg_.horizon());
  }

  void run_adaptive(const Vector& x0, double g0) {
    const double t_end = cfg_.horizon();
    double t = 0.0;
    Vector y = x0;
    double g = g0;
    Vector k1 = velocity(y);
    double h = initial_step(y, k1);
    std::size_t steps = 0;

    while (t < t_end) {
      if (steps++ >= cfg_.max_steps) return finish_horizon("step limit reached");
      h = std::min(h, t_end - t);
      const bool at_floor = h <= kMinAdaptiveStep;
      Rk45Result step;
      bool usable = false;
      try {
        step = rk45_step(y, h, k1, true);
        usable = std::isfinite(step.err) && step.y.all_finite();
      } catch (const SingularHessian&) {
        // A stage left the invertible region; retry smaller unless at the floor.
        if (at_floor) throw;
      }

      if (!usable || (step.err > 1.0 && !at_floor)) {
        if (!usable && at_floor) fail_non_finite(t + h);
        ++traj_.rejected_steps;
        const double factor =
            usable ? std::max(0.1, 0.9 * std::pow(step.err, -0.2)) : 0.1;
        h = std::max(kMinAdaptiveStep, h * std::min(factor, 0.9));
        continue;
      }

      const double g_new = grad_norm(step.y);
      if (!std::isfinite(g_new)) fail_non_finite(t + h);
      // Near the equilibrium the field is non-Lipschitz and the controller can
      // lock onto an accepted oscillation at the stability edge. A rise in a
      // quantity the exact flow never increases exposes it.
      if (field_.monotone_gradient_norm && !at_floor && g_new > g_new_allowance(g) &&
          g_new > cfg_.stop_grad_norm) {
        ++traj_.rejected_steps;
        h = std::max(kMinAdaptiveStep, 0.5 * h);
        continue;
      }
      if (g_new <= cfg_.stop_grad_norm) {
        converge_at_crossing(t, g, h, step.y, g_new, [&](double hh) {
          return rk45_step(y, hh, k1, false).y;
        });
        return;
      }

      const double t_next = (t_end - t - h) <= 1e-12 * std::max(1.0, t_end) ? t_end : t + h;
      const double factor =
          step.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(step.err, -0.2), 0.2, 5.0);
      t = t_next;
      y = std::move(step.y);
      k1 = std::move(step.k7);
      g = g_new;
      accept(t, y, g);
      h = std::max(kMinAdaptiveStep, h * factor);
    }
    finish_horizon("horizon reached");
  }

  const FlowField& field_;
  const IntegratorConfig& cfg_;
  LyapunovKind lyap_;
  Trajectory traj_;
  double pending_t_ = 0.0;
  Vector pending_final_;
  double pending_g_ = 0.0;
};

}  // namespace

std::string_view to_string(IntegrationMethod method) {
  switch (method) {
    case IntegrationMethod::kFixedEuler:
      return "fixed-euler";
    case IntegrationMethod::kFixedRk4:
      return "fixed-rk4";
    case IntegrationMethod::kAdaptiveRk45:
      return "adaptive-rk45";
  }
  return "unknown";
}

std::optional<IntegrationMethod> parse_integration_method(std::string_view label) {
  for (auto m : {IntegrationMethod::kFixedEuler, IntegrationMethod::kFixedRk4,
                 IntegrationMethod::kAdaptiveRk45})
    if (to_string(m) == label) return m;
  return std::nullopt;
}

std::string_view to_string(LyapunovKind kind) {
  switch (kind) {
    case LyapunovKind::kGradSq:
      return "grad-sq";
    case LyapunovKind::kGapSq:
      return "gap-sq";
    case LyapunovKind::kNone:
      return "none";
  }
  return "unknown";
}

std::optional<LyapunovKind> parse_lyapunov_kind(std::string_view label) {
  for (auto k : {LyapunovKind::kGradSq, LyapunovKind::kGapSq, LyapunovKind::kNone})
    if (to_string(k) == label) return k;
  return std::nullopt;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kConverged:
      return "converged";
    case StopReason::kHorizon:
      return "horizon";
    case StopReason::kSingularHessian:
      return "singular-hessian";
  }
  return "unknown";
}

void IntegratorConfig::validate(double eps_sing) const {
  const double horizon_value = horizon();
  if (!(horizon_value > 0.0)) throw std::invalid_argument("IntegratorConfig: t_max must be > 0");
  if (method != IntegrationMethod::kAdaptiveRk45 && !(dt > 0.0 && dt < horizon_value)) {
    throw std::invalid_argument("IntegratorConfig: need 0 < dt < t_max");
  }
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
  }
  if (!(stop_grad_norm > eps_sing)) {
    throw std::invalid_argument("IntegratorConfig: stop_grad_norm must exceed eps_sing");
  }
  if (record_stride == 0) throw std::invalid_argument("IntegratorConfig: record_stride must be >= 1");
}

Trajectory integrate(const FlowField& field, const Vector& x0, const IntegratorConfig& cfg,
                     LyapunovKind lyap) {
  cfg.validate(field.eps_sing);
  Integrator integrator(field, cfg, lyap);
  return integrator.run(x0);
}

std::vector<SweepEntry> settle_time_sweep(const FlowField& field, std::span<const Vector> x0s,
                                          const IntegratorConfig& cfg, LyapunovKind lyap) {
  std::vector<SweepEntry> out;
  out.reserve(x0s.size());
  for (const Vector& x0 : x0s) {
    SweepEntry entry;
    entry.x0 = x0;
    try {
      const Trajectory traj = integrate(field, x0, cfg, lyap);
      entry.settle_time = traj.settle_time;
      entry.stop_reason = traj.stop_reason;
      entry.final_time = traj.final_time();
      entry.final_grad_norm = traj.grad_norms.back();
      entry.error = traj.message;
      if (traj.stop_reason == StopReason::kConverged) entry.error.clear();
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  out << ",grad_norm,f_value,lyapunov\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t r = 0; r < traj.size(); ++r) {
    put(traj.times[r]);
    for (std::size_t i = 0; i < n; ++i) {
      out << ',';
      put(traj.states[r][i]);
    }
    out << ',';
    put(traj.grad_norms[r]);
    out << ',';
    put(traj.objective_values[r]);
    out << ',';
    put(traj.lyapunov_values[r]);
    out << '\n';
  }
}

}  // namespace fxt

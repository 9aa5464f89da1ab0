#include "fxt/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "fxt/errors.hpp"

namespace fxt {

namespace {

constexpr std::array<std::pair<BoundTag, std::string_view>, 11> kBoundLabels{{
    {BoundTag::kT1, "T1"},
    {BoundTag::kT2, "T2"},
    {BoundTag::kTpFinite, "Tp-finite"},
    {BoundTag::kT3Strict, "T3-strict"},
    {BoundTag::kT3Pl, "T3-pl"},
    {BoundTag::kTNM, "TNM"},
    {BoundTag::kTnu, "Tnu"},
    {BoundTag::kTineq, "Tineq"},
    {BoundTag::kTSP, "TSP"},
    {BoundTag::kGenericFixed, "generic-fixed"},
    {BoundTag::kGenericFinite, "generic-finite"},
}};

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be non-negative and finite");
  }
}

void put_flow_params(SettlingBound& b, const FlowParams& fp) {
  b.inputs["c1"] = fp.c1;
  b.inputs["c2"] = fp.c2;
  b.inputs["alpha1"] = fp.alpha1();
  b.inputs["alpha2"] = fp.alpha2();
}

// 2^{1−α/2}/(c(|2−α|)) summed over the two exponents, scaled by 1/k.
double two_term_fixed(double c1, double c2, double a1, double a2, double num1_exp,
                      double num2_exp, double k) {
  return std::pow(2.0, 1.0 - num1_exp / 2.0) / (c1 * k * (2.0 - a1)) +
         std::pow(2.0, 1.0 - num2_exp / 2.0) / (c2 * k * (a2 - 2.0));
}

}  // namespace

std::string_view to_string(BoundTag tag) {
  for (const auto& [t, label] : kBoundLabels)
    if (t == tag) return label;
  return "unknown";
}

std::optional<BoundTag> parse_bound_tag(std::string_view label) {
  for (const auto& [t, l] : kBoundLabels)
    if (l == label) return t;
  return std::nullopt;
}

bool is_fixed_time(BoundTag tag) {
  switch (tag) {
    case BoundTag::kT3Strict:
    case BoundTag::kT3Pl:
    case BoundTag::kTNM:
    case BoundTag::kTnu:
    case BoundTag::kTineq:
    case BoundTag::kTSP:
    case BoundTag::kGenericFixed:
      return true;
    default:
      return false;
  }
}

SettlingBound bound_T1(double k, double grad0_norm) {
  require_positive(k, "bound_T1: k");
  require_nonnegative(grad0_norm, "bound_T1: grad0_norm");
  SettlingBound b;
  b.tag = BoundTag::kT1;
  b.value = 2.0 * std::sqrt(grad0_norm) / k;
  b.inputs = {{"k", k}, {"grad0_norm", grad0_norm}};
  return b;
}

SettlingBound bound_T2(double mu, double gap0, bool as_printed) {
  require_positive(mu, "bound_T2: mu");
  require_nonnegative(gap0, "bound_T2: gap0");
  const double denom = std::pow(2.0 * mu, 0.75);
  SettlingBound b;
  b.tag = BoundTag::kT2;
  b.as_printed = as_printed;
  b.value = as_printed ? 8.0 * std::pow(gap0, 1.0 / 8.0) / denom
                       : 8.0 * std::pow(0.5 * gap0 * gap0, 1.0 / 8.0) / denom;
  b.inputs = {{"mu", mu}, {"gap0", gap0}};
  return b;
}

SettlingBound bound_T2_max(double mu, double gap0) {
  const SettlingBound printed = bound_T2(mu, gap0, true);
  const SettlingBound rederived = bound_T2(mu, gap0, false);
  SettlingBound b = printed.value >= rederived.value ? printed : rederived;
  b.inputs["printed"] = printed.value;
  b.inputs["rederived"] = rederived.value;
  return b;
}

SettlingBound bound_Tp_finite(Curvature which, double pexp, double k_or_mu, double initial,
                              std::optional<double> k2) {
  if (!(pexp > 2.0)) throw std::invalid_argument("bound_Tp_finite: p must be > 2");
  require_positive(k_or_mu, "bound_Tp_finite: k_or_mu");
  require_nonnegative(initial, "bound_Tp_finite: initial");
  const double beta1 = pexp / (2.0 * (pexp - 1.0));
  const double beta2 = (3.0 * pexp - 2.0) / (4.0 * (pexp - 1.0));
  SettlingBound b;
  b.tag = BoundTag::kTpFinite;
  b.inputs = {{"p", pexp}, {"beta1", beta1}, {"beta2", beta2}};
  if (which == Curvature::kStrict) {
    b.value = std::pow(initial, 2.0 - 2.0 * beta1) / (2.0 * k_or_mu * (1.0 - beta1));
    b.inputs["k"] = k_or_mu;
    b.inputs["grad0_norm"] = initial;
  } else {
    const double k2_value = k2.value_or(std::pow(2.0 * k_or_mu, beta1));
    require_positive(k2_value, "bound_Tp_finite: k2");
    b.value = std::pow(initial, 2.0 - 2.0 * beta2) /
              (std::pow(2.0, 1.0 - beta2) * k2_value * (1.0 - beta2));
    b.inputs["mu"] = k_or_mu;
    b.inputs["k2"] = k2_value;
    b.inputs["gap0"] = initial;
  }
  return b;
}

SettlingBound bound_T3(const FlowParams& fp, Curvature which, double k_or_mu) {
  fp.validate();
  require_positive(k_or_mu, "bound_T3: k_or_mu");
  const double a1 = fp.alpha1();
  const double a2 = fp.alpha2();
  SettlingBound b;
  put_flow_params(b, fp);
  if (which == Curvature::kStrict) {
    b.tag = BoundTag::kT3Strict;
    b.value = two_term_fixed(fp.c1, fp.c2, a1, a2, a1, a2, k_or_mu);
    b.inputs["k"] = k_or_mu;
  } else {
    const double two_mu = 2.0 * k_or_mu;
    b.tag = BoundTag::kT3Pl;
    b.value = 4.0 / (fp.c1 * std::pow(two_mu, a1 / 2.0) * (2.0 - a1)) +
              4.0 / (fp.c2 * std::pow(two_mu, a2 / 2.0) * (a2 - 2.0));
    b.inputs["mu"] = k_or_mu;
  }
  return b;
}

SettlingBound bound_TNM(const FlowParams& fp) {
  fp.validate();
  SettlingBound b;
  b.tag = BoundTag::kTNM;
  b.value = two_term_fixed(fp.c1, fp.c2, fp.alpha1(), fp.alpha2(), fp.alpha1(), fp.alpha2(), 1.0);
  put_flow_params(b, fp);
  return b;
}

SettlingBound bound_TSP(const FlowParams& fp) {
  fp.validate();
  const double a1 = fp.alpha1();
  const double a2 = fp.alpha2();
  const double printed = two_term_fixed(fp.c1, fp.c2, a1, a2, a1, a1, 1.0);
  const double newton_pattern = two_term_fixed(fp.c1, fp.c2, a1, a2, a1, a2, 1.0);
  SettlingBound b;
  b.tag = BoundTag::kTSP;
  b.as_printed = printed >= newton_pattern;
  b.value = std::max(printed, newton_pattern);
  put_flow_params(b, fp);
  b.inputs["printed"] = printed;
  b.inputs["rederived"] = newton_pattern;
  return b;
}

SettlingBound bound_Tnu(const FlowParams& fp, double dual_mu) {
  SettlingBound b = bound_T3(fp, Curvature::kPl, dual_mu);
  b.tag = BoundTag::kTnu;
  return b;
}

SettlingBound bound_Tineq(const SettlingBound& t_nu, const SettlingBound& t_x) {
  SettlingBound b;
  b.tag = BoundTag::kTineq;
  b.value = t_nu.value + t_x.value;
  b.inputs = {{"t_nu", t_nu.value}, {"t_x", t_x.value}};
  if (t_nu.certificate != "certified" || t_x.certificate != "certified") {
    b.certificate = "empirical-certificate";
  }
  return b;
}

SettlingBound generic_fixed_bound(double a_ft, double b_ft, double alpha_ft, double beta_ft) {
  require_positive(a_ft, "generic_fixed_bound: a");
  require_positive(b_ft, "generic_fixed_bound: b");
  if (!(alpha_ft < 1.0) || !(beta_ft > 1.0)) {
    throw std::invalid_argument("generic_fixed_bound: need alpha < 1 < beta");
  }
  SettlingBound b;
  b.tag = BoundTag::kGenericFixed;
  b.value = 1.0 / (a_ft * (1.0 - alpha_ft)) + 1.0 / (b_ft * (beta_ft - 1.0));
  b.inputs = {{"a", a_ft}, {"b", b_ft}, {"alpha", alpha_ft}, {"beta", beta_ft}};
  return b;
}

SettlingBound generic_finite_bound(double c, double alpha, double v0) {
  require_positive(c, "generic_finite_bound: c");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("generic_finite_bound: alpha must lie in (0, 1)");
  }
  require_nonnegative(v0, "generic_finite_bound: V0");
  SettlingBound b;
  b.tag = BoundTag::kGenericFinite;
  b.value = std::pow(v0, 1.0 - alpha) / (c * (1.0 - alpha));
  b.inputs = {{"c", c}, {"alpha", alpha}, {"V0", v0}};
  return b;
}

// ---------------------------------------------------------------------------

RateModel rate_p_flow_strict(double pexp, double k) {
  const double e = rescaling_exponent(pexp);
  return [e, k](double v) { return -k * std::pow(2.0 * v, 1.0 - e / 2.0); };
}

RateModel rate_p_flow_pl(double pexp, double mu) {
  const double beta1 = pexp / (2.0 * (pexp - 1.0));
  const double beta2 = (3.0 * pexp - 2.0) / (4.0 * (pexp - 1.0));
  const double coef = std::pow(2.0 * mu, beta1);
  return [coef, beta2](double v) { return -coef * std::pow(v, beta2); };
}

RateModel rate_fixed_time_strict(const FlowParams& fp, double k) {
  const double a1 = fp.alpha1();
  const double a2 = fp.alpha2();
  const double w1 = fp.c1 * k * std::pow(2.0, a1 / 2.0);
  const double w2 = fp.c2 * k * std::pow(2.0, a2 / 2.0);
  return [=](double v) { return -w1 * std::pow(v, a1 / 2.0) - w2 * std::pow(v, a2 / 2.0); };
}

RateModel rate_fixed_time_pl(const FlowParams& fp, double mu) {
  const double a1 = fp.alpha1();
  const double a2 = fp.alpha2();
  const double w1 = fp.c1 * std::pow(2.0 * mu, a1 / 2.0);
  const double w2 = fp.c2 * std::pow(2.0 * mu, a2 / 2.0);
  return [=](double v) {
    return -w1 * std::pow(v, (2.0 + a1) / 4.0) - w2 * std::pow(v, (2.0 + a2) / 4.0);
  };
}

RateModel rate_newton(const FlowParams& fp) {
  const double a1 = fp.alpha1();
  const double a2 = fp.alpha2();
  const double c1 = fp.c1;
  const double c2 = fp.c2;
  return [=](double v) {
    return -c1 * std::pow(2.0 * v, a1 / 2.0) - c2 * std::pow(2.0 * v, a2 / 2.0);
  };
}

LyapunovCheckReport check_lyapunov_inequality(const Trajectory& traj, const RateModel& rhs,
                                              std::optional<double> tol) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (i < traj.lyapunov_values.size() && std::isfinite(traj.lyapunov_values[i])) idx.push_back(i);
  }
  if (idx.size() < 3) {
    throw InsufficientRecords("check_lyapunov_inequality: need at least 3 records with V, got " +
                              std::to_string(idx.size()));
  }

  std::vector<double> vdot(idx.size() - 2);
  std::vector<double> model(idx.size() - 2);
  double scale = 0.0;
  for (std::size_t j = 1; j + 1 < idx.size(); ++j) {
    const double t0 = traj.times[idx[j - 1]];
    const double t1 = traj.times[idx[j]];
    const double t2 = traj.times[idx[j + 1]];
    const double vm = traj.lyapunov_values[idx[j - 1]];
    const double v0 = traj.lyapunov_values[idx[j]];
    const double vp = traj.lyapunov_values[idx[j + 1]];
    const double h0 = t1 - t0;
    const double h1 = t2 - t1;
    const double d = (h0 * h0 * vp - h1 * h1 * vm + (h1 * h1 - h0 * h0) * v0) / (h0 * h1 * (h0 + h1));
    vdot[j - 1] = d;
    model[j - 1] = rhs(v0);
    scale = std::max(scale, std::abs(d));
  }

  LyapunovCheckReport report;
  report.n_samples = vdot.size();
  report.tolerance = tol.value_or(1e-3 * std::max(1.0, scale));
  report.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < vdot.size(); ++j) {
    const double diff = vdot[j] - model[j];
    report.max_violation = std::max(report.max_violation, diff);
    report.max_abs_deviation = std::max(report.max_abs_deviation, std::abs(diff));
  }
  report.pass = report.max_violation <= report.tolerance;
  return report;
}

double chain_rule_lyapunov_rate(const ObjectiveProblem& p, const FlowField& field, const Vector& x) {
  if (!p.has_hessian()) {
    throw std::invalid_argument("chain_rule_lyapunov_rate: '" + p.name + "' has no Hessian oracle");
  }
  const Vector g = p.gradient(x);
  return g.dot(p.hessian(x) * field.velocity(x));
}

}  // namespace fxt

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fxt/errors.hpp"
#include "fxt/harness.hpp"

namespace fxt {

namespace {

struct ParamDefaults {
  std::string_view problem;
  ProblemKind kind;
  std::vector<std::string_view> keys;
};

const std::vector<ParamDefaults>& problem_table() {
  static const std::vector<ParamDefaults> table{
      {"sphere", ProblemKind::kObjective, {"dim"}},
      {"quadratic-Q", ProblemKind::kObjective, {"dim", "eig_min", "eig_max", "seed", "q_scale"}},
      {"pl-sine", ProblemKind::kObjective, {}},
      {"log-sum-exp-reg", ProblemKind::kObjective, {"dim", "terms", "eps", "seed"}},
      {"quartic", ProblemKind::kObjective, {"dim", "eps"}},
      {"constrained-qp", ProblemKind::kConstrained, {"n", "m", "seed"}},
      {"constrained-sphere", ProblemKind::kConstrained, {}},
      {"bilinear-quad", ProblemKind::kSaddle, {"n", "m", "seed", "affine"}},
      {"scalar-saddle", ProblemKind::kSaddle, {}},
      {"constrained-as-saddle", ProblemKind::kSaddle, {"n", "m", "seed"}},
  };
  return table;
}

const ParamDefaults& lookup_problem(const std::string& name) {
  for (const auto& row : problem_table())
    if (row.problem == name) return row;
  throw ConfigError("unknown problem '" + name + "'");
}

void check_param_keys(const ProblemSpec& ps) {
  const auto& row = lookup_problem(ps.name);
  for (const auto& [key, value] : ps.params) {
    if (std::find(row.keys.begin(), row.keys.end(), key) == row.keys.end()) {
      throw ConfigError("problem '" + ps.name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw ConfigError("problem parameter '" + key + "' is not finite");
  }
}

double param(const ProblemSpec& ps, const std::string& key, double fallback) {
  const auto it = ps.params.find(key);
  return it == ps.params.end() ? fallback : it->second;
}

std::size_t size_param(const ProblemSpec& ps, const std::string& key, std::size_t fallback) {
  const double v = param(ps, key, static_cast<double>(fallback));
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw ConfigError("problem parameter '" + key + "' must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

std::uint64_t seed_param(const ProblemSpec& ps, std::uint64_t fallback) {
  const double v = param(ps, "seed", static_cast<double>(fallback));
  if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("seed must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

// ---------------------------------------------------------------------------
// YAML helpers

[[noreturn]] void bad(const YAML::Node& node, const std::string& msg) {
  const auto mark = node.Mark();
  if (mark.line >= 0) throw ConfigError("line " + std::to_string(mark.line + 1) + ": " + msg);
  throw ConfigError(msg);
}

void require_map(const YAML::Node& node, const std::string& what,
                 std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) bad(node, what + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad(kv.first, "unknown key '" + key + "' in " + what);
    }
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) bad(node, what + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    bad(node, "cannot read " + what + " from '" + node.Scalar() + "'");
  }
}

double real(const YAML::Node& node, const std::string& what) {
  const auto v = scalar<double>(node, what);
  if (!std::isfinite(v)) bad(node, what + " must be finite");
  return v;
}

std::uint64_t count(const YAML::Node& node, const std::string& what) {
  const double v = real(node, what);
  if (v < 0.0 || v != std::floor(v)) bad(node, what + " must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

Vector real_list(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) bad(node, what + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& item : node) out.push_back(real(item, what));
  return Vector(std::move(out));
}

void read_flow_params(const YAML::Node& node, FlowParams& fp, double* pexp,
                      const std::string& what) {
  if (pexp) {
    require_map(node, what, {"kind", "c1", "c2", "p1", "p2", "p", "eps_sing"});
  } else {
    require_map(node, what, {"c1", "c2", "p1", "p2", "eps_sing"});
  }
  if (node["c1"]) fp.c1 = real(node["c1"], what + ".c1");
  if (node["c2"]) fp.c2 = real(node["c2"], what + ".c2");
  if (node["p1"]) fp.p1 = real(node["p1"], what + ".p1");
  if (node["p2"]) fp.p2 = real(node["p2"], what + ".p2");
  if (node["eps_sing"]) fp.eps_sing = real(node["eps_sing"], what + ".eps_sing");
  if (pexp && node["p"]) *pexp = real(node["p"], what + ".p");
}

void read_integrator(const YAML::Node& node, IntegratorConfig& cfg) {
  require_map(node, "integrator",
              {"method", "dt", "rel_tol", "abs_tol", "t_max", "stop_grad_norm", "record_stride",
               "max_steps"});
  if (node["method"]) {
    const auto label = scalar<std::string>(node["method"], "integrator.method");
    const auto m = parse_integration_method(label);
    if (!m) bad(node["method"], "unknown integration method '" + label + "'");
    cfg.method = *m;
  }
  if (node["dt"]) cfg.dt = real(node["dt"], "integrator.dt");
  if (node["rel_tol"]) cfg.rel_tol = real(node["rel_tol"], "integrator.rel_tol");
  if (node["abs_tol"]) cfg.abs_tol = real(node["abs_tol"], "integrator.abs_tol");
  if (node["t_max"]) cfg.t_max = real(node["t_max"], "integrator.t_max");
  if (node["stop_grad_norm"]) cfg.stop_grad_norm = real(node["stop_grad_norm"], "integrator.stop_grad_norm");
  if (node["record_stride"]) cfg.record_stride = count(node["record_stride"], "integrator.record_stride");
  if (node["max_steps"]) cfg.max_steps = count(node["max_steps"], "integrator.max_steps");
}

void read_initial_conditions(const YAML::Node& node, ExperimentSpec& spec) {
  require_map(node, "initial_conditions", {"points", "norms", "direction_seed"});
  if (node["points"]) {
    if (!node["points"].IsSequence()) bad(node["points"], "initial_conditions.points must be a list");
    for (const auto& pt : node["points"]) {
      spec.initial_points.push_back(real_list(pt, "initial_conditions.points[]"));
    }
  }
  if (node["norms"]) {
    NormSweep sweep;
    sweep.direction_seed = spec.seed;
    const Vector norms = real_list(node["norms"], "initial_conditions.norms");
    sweep.norms = norms.values();
    if (node["direction_seed"]) {
      sweep.direction_seed = count(node["direction_seed"], "initial_conditions.direction_seed");
    }
    spec.norm_sweep = std::move(sweep);
  } else if (node["direction_seed"]) {
    bad(node["direction_seed"], "direction_seed needs norms");
  }
}

bool needs_gap(BoundTag tag) {
  return tag == BoundTag::kT2 || tag == BoundTag::kT3Pl || tag == BoundTag::kTnu;
}

}  // namespace

ProblemKind problem_kind_of(const std::string& problem_name) {
  return lookup_problem(problem_name).kind;
}

ObjectiveProblem make_named_objective(const ProblemSpec& ps, std::uint64_t seed) {
  check_param_keys(ps);
  const auto& row = lookup_problem(ps.name);
  if (row.kind != ProblemKind::kObjective) throw ConfigError("'" + ps.name + "' is not an objective");
  try {
    if (ps.name == "sphere") return make_sphere(size_param(ps, "dim", 2));
    if (ps.name == "quadratic-Q") {
      return make_random_quadratic(size_param(ps, "dim", 10), param(ps, "eig_min", 0.5),
                                   param(ps, "eig_max", 5.0), seed_param(ps, seed),
                                   param(ps, "q_scale", 1.0));
    }
    if (ps.name == "pl-sine") return make_pl_sine();
    if (ps.name == "log-sum-exp-reg") {
      const std::size_t dim = size_param(ps, "dim", 10);
      return make_random_log_sum_exp_reg(dim, size_param(ps, "terms", 2 * dim),
                                         param(ps, "eps", 0.1), seed_param(ps, seed));
    }
    return make_quartic(size_param(ps, "dim", 10), param(ps, "eps", 0.5));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem '" + ps.name + "': " + e.what());
  }
}

ConstrainedProblem make_named_constrained(const ProblemSpec& ps, std::uint64_t seed) {
  check_param_keys(ps);
  if (lookup_problem(ps.name).kind != ProblemKind::kConstrained) {
    throw ConfigError("'" + ps.name + "' is not a constrained problem");
  }
  if (ps.name == "constrained-sphere") return make_unit_constrained_sphere();
  const std::size_t n = size_param(ps, "n", 10);
  const std::size_t m = size_param(ps, "m", 3);
  if (m > n) throw ConfigError("constrained-qp needs m <= n");
  try {
    return make_random_constrained_qp(n, m, seed_param(ps, seed));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("constrained-qp: ") + e.what());
  }
}

SaddleProblem make_named_saddle(const ProblemSpec& ps, std::uint64_t seed) {
  check_param_keys(ps);
  if (lookup_problem(ps.name).kind != ProblemKind::kSaddle) {
    throw ConfigError("'" + ps.name + "' is not a saddle problem");
  }
  if (ps.name == "scalar-saddle") return make_scalar_saddle();
  if (ps.name == "bilinear-quad") {
    return make_random_bilinear_quad(size_param(ps, "n", 3), size_param(ps, "m", 2),
                                     seed_param(ps, seed), param(ps, "affine", 1.0) != 0.0);
  }
  if (ps.params.count("n") || ps.params.count("m")) {
    ProblemSpec inner{"constrained-qp", ps.params};
    return make_constrained_as_saddle(make_named_constrained(inner, seed));
  }
  return make_constrained_as_saddle(make_unit_constrained_sphere());
}

ExperimentSpec parse_experiment_spec(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML parse error: ") + e.what());
  }
  require_map(root, "config",
              {"name", "seed", "problem", "flow", "primal_flow", "initial_conditions", "nu0",
               "integrator", "lyapunov", "bounds", "output_dir", "slack"});

  ExperimentSpec spec;
  if (!root["name"]) throw ConfigError("config needs a name");
  spec.name = scalar<std::string>(root["name"], "name");
  if (spec.name.empty() || spec.name.find('/') != std::string::npos) {
    bad(root["name"], "name must be non-empty and contain no '/'");
  }
  if (root["seed"]) spec.seed = count(root["seed"], "seed");

  if (!root["problem"]) throw ConfigError("config needs a problem");
  const YAML::Node prob = root["problem"];
  if (prob.IsScalar()) {
    spec.problem.name = prob.as<std::string>();
  } else {
    if (!prob.IsMap() || !prob["name"]) bad(prob, "problem needs a name");
    for (const auto& kv : prob) {
      const auto key = kv.first.as<std::string>();
      if (key == "name") {
        spec.problem.name = scalar<std::string>(kv.second, "problem.name");
      } else {
        spec.problem.params[key] = real(kv.second, "problem." + key);
      }
    }
  }

  if (!root["flow"]) throw ConfigError("config needs a flow");
  const YAML::Node flow = root["flow"];
  std::string flow_label;
  if (flow.IsScalar()) {
    flow_label = flow.as<std::string>();
  } else {
    if (!flow.IsMap() || !flow["kind"]) bad(flow, "flow needs a kind");
    flow_label = scalar<std::string>(flow["kind"], "flow.kind");
    read_flow_params(flow, spec.params, &spec.pexp, "flow");
  }
  const auto kind = parse_flow_kind(flow_label);
  if (!kind) bad(flow, "unknown flow '" + flow_label + "'");
  spec.flow = *kind;

  spec.primal_params = spec.params;
  if (root["primal_flow"]) read_flow_params(root["primal_flow"], spec.primal_params, nullptr, "primal_flow");
  if (root["initial_conditions"]) read_initial_conditions(root["initial_conditions"], spec);
  if (root["nu0"]) spec.nu0 = real_list(root["nu0"], "nu0");
  if (root["integrator"]) read_integrator(root["integrator"], spec.integrator);
  if (root["lyapunov"]) {
    const auto label = scalar<std::string>(root["lyapunov"], "lyapunov");
    if (label != "auto") {
      const auto lk = parse_lyapunov_kind(label);
      if (!lk) bad(root["lyapunov"], "unknown lyapunov kind '" + label + "'");
      spec.lyapunov = *lk;
    }
  }
  if (root["bounds"]) {
    if (!root["bounds"].IsSequence()) bad(root["bounds"], "bounds must be a list");
    for (const auto& item : root["bounds"]) {
      const auto label = scalar<std::string>(item, "bounds[]");
      const auto tag = parse_bound_tag(label);
      if (!tag) bad(item, "unknown bound '" + label + "'");
      spec.bounds.push_back(*tag);
    }
  }
  if (root["output_dir"]) spec.output_dir = scalar<std::string>(root["output_dir"], "output_dir");
  if (root["slack"]) spec.slack = real(root["slack"], "slack");

  validate_experiment_spec(spec);
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_spec(text.str());
}

void validate_experiment_spec(const ExperimentSpec& spec) {
  if (spec.name.empty()) throw ConfigError("experiment needs a name");
  const ProblemKind pk = problem_kind_of(spec.problem.name);

  const bool objective_flow = spec.flow == FlowKind::kNominal || spec.flow == FlowKind::kPRescaled ||
                              spec.flow == FlowKind::kFixedTime ||
                              spec.flow == FlowKind::kNewtonFixedTime;
  const bool constrained_flow =
      spec.flow == FlowKind::kDualAscent || spec.flow == FlowKind::kPrimalAtNuStar;
  if ((objective_flow && pk != ProblemKind::kObjective) ||
      (constrained_flow && pk != ProblemKind::kConstrained) ||
      (spec.flow == FlowKind::kSaddleNewton && pk != ProblemKind::kSaddle)) {
    throw ConfigError("flow '" + std::string(to_string(spec.flow)) + "' cannot run on problem '" +
                      spec.problem.name + "'");
  }

  try {
    spec.params.validate();
    spec.primal_params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (spec.flow == FlowKind::kPRescaled && !(spec.pexp > 2.0)) {
    throw ConfigError("p-rescaled flow needs p > 2");
  }
  try {
    spec.integrator.validate(spec.params.eps_sing);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(spec.slack >= 0.0)) throw ConfigError("slack must be >= 0");

  // Certificates and state dimension of the problem as the flow sees it.
  double k = 0.0;
  double mu = 0.0;
  bool has_optimum = false;
  bool has_hessian = true;
  std::size_t dim = 0;
  if (pk == ProblemKind::kObjective) {
    const auto p = make_named_objective(spec.problem, spec.seed);
    k = p.strong_convexity_k;
    mu = p.pl_constant_mu;
    has_optimum = p.optimum.has_value();
    has_hessian = p.has_hessian();
    dim = p.dim;
  } else if (pk == ProblemKind::kConstrained) {
    const auto cp = make_named_constrained(spec.problem, spec.seed);
    if (spec.flow == FlowKind::kDualAscent) {
      k = mu = cp.dual_pl_mu;
      has_optimum = cp.known_nu.has_value();
      dim = cp.m();
    } else {
      k = cp.objective.strong_convexity_k;
      dim = cp.n();
      if (spec.nu0 && spec.nu0->size() != cp.m()) throw ConfigError("nu0 has the wrong length");
      // The dual phase needs its bound for a default horizon.
      mu = cp.dual_pl_mu;
    }
  } else {
    const auto sp = make_named_saddle(spec.problem, spec.seed);
    dim = sp.n + sp.m;
  }
  if (spec.flow == FlowKind::kNewtonFixedTime && !has_hessian) {
    throw ConfigError("newton-fixed-time needs a Hessian oracle");
  }

  const bool p3 = spec.flow == FlowKind::kPRescaled && spec.pexp == 3.0;
  for (BoundTag tag : spec.bounds) {
    const std::string label(to_string(tag));
    bool ok = false;
    switch (tag) {
      case BoundTag::kT1:
        ok = p3 && k > 0.0;
        break;
      case BoundTag::kT2:
        ok = p3 && mu > 0.0 && has_optimum;
        break;
      case BoundTag::kTpFinite:
        ok = spec.flow == FlowKind::kPRescaled && (k > 0.0 || (mu > 0.0 && has_optimum));
        break;
      case BoundTag::kT3Strict:
        ok = (spec.flow == FlowKind::kFixedTime || spec.flow == FlowKind::kPrimalAtNuStar) && k > 0.0;
        break;
      case BoundTag::kT3Pl:
        ok = spec.flow == FlowKind::kFixedTime && mu > 0.0 && has_optimum;
        break;
      case BoundTag::kTNM:
        ok = spec.flow == FlowKind::kNewtonFixedTime;
        break;
      case BoundTag::kTnu:
        ok = spec.flow == FlowKind::kDualAscent && mu > 0.0;
        break;
      case BoundTag::kTineq:
        ok = spec.flow == FlowKind::kPrimalAtNuStar && k > 0.0 && mu > 0.0;
        break;
      case BoundTag::kTSP:
        ok = spec.flow == FlowKind::kSaddleNewton;
        break;
      case BoundTag::kGenericFixed:
      case BoundTag::kGenericFinite:
        throw ConfigError("bound '" + label + "' needs explicit constants; use the bounds command");
    }
    if (!ok) {
      throw ConfigError("bound '" + label + "' does not apply to flow '" +
                        std::string(to_string(spec.flow)) + "' on '" + spec.problem.name +
                        "' (flow mismatch or missing certificate)");
    }
  }

  const bool wants_gap = std::any_of(spec.bounds.begin(), spec.bounds.end(), needs_gap);
  const LyapunovKind lyap = spec.lyapunov.value_or(wants_gap ? LyapunovKind::kGapSq : LyapunovKind::kGradSq);
  if (lyap == LyapunovKind::kGapSq && !has_optimum) {
    throw ConfigError("gap-sq Lyapunov function needs a known optimum");
  }

  if (spec.initial_points.empty() && (!spec.norm_sweep || spec.norm_sweep->norms.empty())) {
    throw ConfigError("experiment '" + spec.name + "' has no initial conditions");
  }
  for (const auto& x0 : spec.initial_points) {
    if (x0.size() != dim) {
      throw ConfigError("initial point has dimension " + std::to_string(x0.size()) + ", expected " +
                        std::to_string(dim));
    }
    if (!x0.all_finite()) throw ConfigError("initial point is not finite");
  }
  if (spec.norm_sweep) {
    for (double r : spec.norm_sweep->norms) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("sweep norms must be finite and >= 0");
    }
  }
}

}  // namespace fxt

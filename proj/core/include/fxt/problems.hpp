#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fxt/numerics.hpp"

namespace fxt {

using GradientOracle = std::function<Vector(const Vector&)>;
using HessianOracle = std::function<Matrix(const Vector&)>;

/// Smooth objective with analytic oracles plus whatever is known about its
/// optimum and curvature. A certificate of 0 means "not certified".
struct ObjectiveProblem {
  std::string name;
  std::size_t dim = 0;
  ScalarField value;
  GradientOracle gradient;
  HessianOracle hessian;  // empty when the problem has no Hessian oracle

  std::optional<Vector> minimizer;
  std::optional<double> optimum;

  /// ∇²f(x) ⪰ k I everywhere.
  double strong_convexity_k = 0.0;
  /// ½‖∇f‖² ≥ μ (f − f*), either proven or sampled (see pl_certificate_sampled).
  double pl_constant_mu = 0.0;
  bool pl_certificate_sampled = false;
  bool convex = true;

  [[nodiscard]] bool has_hessian() const noexcept { return static_cast<bool>(hessian); }
};

/// min f(x) s.t. Ax = b, with the Fenchel conjugate f* in closed form.
struct ConstrainedProblem {
  std::string name;
  ObjectiveProblem objective;
  Matrix A;
  Vector b;
  ScalarField conjugate_value;
  GradientOracle conjugate_gradient;
  /// x̂(ν) = argmin_x f(x) + νᵀAx. Independent second route to the dual
  /// gradient; only the quadratic builders provide it.
  GradientOracle lagrangian_minimizer;
  /// PL constant of h = −g (the negated dual function).
  double dual_pl_mu = 0.0;
  /// KKT pair when it can be computed directly.
  std::optional<Vector> known_x;
  std::optional<Vector> known_nu;

  [[nodiscard]] std::size_t n() const noexcept { return objective.dim; }
  [[nodiscard]] std::size_t m() const noexcept { return A.rows(); }
};

using SaddleScalar = std::function<double(const Vector&, const Vector&)>;
using SaddleGradient = std::function<Vector(const Vector&, const Vector&)>;
using SaddleBlock = std::function<Matrix(const Vector&, const Vector&)>;

/// Convex-concave F(x, z): minimized over x ∈ ℝⁿ, maximized over z ∈ ℝᵐ.
struct SaddleProblem {
  std::string name;
  std::size_t n = 0;
  std::size_t m = 0;
  SaddleScalar value;
  SaddleGradient grad_x;
  SaddleGradient grad_z;
  SaddleBlock hess_xx;
  /// Upper-right block of ∇²F, n×m: ∂(∇ₓF)/∂z. The lower-left block is its transpose.
  SaddleBlock hess_zx;
  SaddleBlock hess_zz;

  std::optional<std::pair<Vector, Vector>> known_saddle;
  double k1 = 0.0;
  double k2 = 0.0;
  /// ∇ₓₓF ⪰ k1 I and ∇zzF ⪯ −k2 I with k1, k2 > 0.
  bool strictly_convex_concave = true;
  /// ∇ₓₓF invertible and the coupling block full row-rank; weaker premise
  /// that still gives convergence to a critical point.
  bool coupling_full_rank = true;
};

// ---------------------------------------------------------------------------
// Objective builders

ObjectiveProblem make_sphere(std::size_t dim);

/// f = ½xᵀQx + qᵀx with Q symmetric positive definite.
ObjectiveProblem make_quadratic(const Matrix& Q, const Vector& q, std::string name = "quadratic-Q");

/// Random SPD Q = U diag(λ) Uᵀ with λ spread over [eig_min, eig_max] (both attained)
/// and q ~ N(0, q_scale²).
ObjectiveProblem make_random_quadratic(std::size_t dim, double eig_min, double eig_max,
                                       std::uint64_t seed, double q_scale = 1.0);

/// Scalar f = x² + 3 sin²x: nonconvex but PL, x* = 0.
ObjectiveProblem make_pl_sine();

/// f = log Σᵢ exp(aᵢᵀx) + (ε/2)‖x‖² with aᵢ the rows of `rows`.
ObjectiveProblem make_log_sum_exp_reg(const Matrix& rows, double eps);
ObjectiveProblem make_random_log_sum_exp_reg(std::size_t dim, std::size_t terms, double eps,
                                             std::uint64_t seed);

/// f = ¼Σxᵢ⁴ + (ε/2)‖x‖².
ObjectiveProblem make_quartic(std::size_t dim, double eps);

/// Default instances of every catalog objective.
std::vector<ObjectiveProblem> catalog(std::size_t dim = 10, std::uint64_t seed = 1);

/// Names of the objective builders above, as used in experiment configs.
std::vector<std::string> objective_names();

/// Axis-aligned sampling box.
struct Box {
  Vector lower;
  Vector upper;
};

inline constexpr double kPlSafetyFactor = 0.99;

/// Grid estimate of the PL constant: min over the grid of ½‖∇f‖²/(f − f*),
/// skipping points with |f − f*| < 1e-12, times kPlSafetyFactor.
/// Throws MissingOptimum when f* is unknown.
double estimate_pl_constant(const ObjectiveProblem& p, const Box& box, std::size_t grid_n);

// ---------------------------------------------------------------------------
// Equality-constrained programs

/// Quadratic objective ½xᵀQx + qᵀx, with f*(y) = ½(y−q)ᵀQ⁻¹(y−q).
/// Throws std::invalid_argument if A is not full row rank.
ConstrainedProblem make_constrained_qp(const Matrix& Q, const Vector& q, const Matrix& A,
                                       const Vector& b, std::string name = "constrained-qp");

/// Random instance: Q from make_random_quadratic, A and b Gaussian.
ConstrainedProblem make_random_constrained_qp(std::size_t n, std::size_t m, std::uint64_t seed);

/// The hand-checkable instance: f = ½‖x‖², A = [1 0], b = [1].
ConstrainedProblem make_unit_constrained_sphere();

/// g(ν) = −νᵀb − f*(−Aᵀν).
double dual_function_value(const ConstrainedProblem& cp, const Vector& nu);

/// ∇g(ν) = −b + A ∇f*(−Aᵀν).
Vector dual_function_gradient(const ConstrainedProblem& cp, const Vector& nu);

/// ∇g(ν) = A x̂(ν) − b through the Lagrangian minimizer.
Vector dual_gradient_via_lagrangian(const ConstrainedProblem& cp, const Vector& nu);

/// ∇ₓL(x, ν) = ∇f(x) + Aᵀν.
Vector lagrangian_gradient_x(const ConstrainedProblem& cp, const Vector& x, const Vector& nu);

/// Solves the KKT system [[Q Aᵀ];[A 0]]·[x;ν] = [−q;b] directly.
std::pair<Vector, Vector> solve_kkt_qp(const Matrix& Q, const Vector& q, const Matrix& A,
                                       const Vector& b);

// ---------------------------------------------------------------------------
// Saddle problems

/// F = ½xᵀPx + xᵀSz − ½zᵀRz + pᵀx + rᵀz.
SaddleProblem make_bilinear_quad(const Matrix& P, const Matrix& S, const Matrix& R,
                                 const Vector& p, const Vector& r,
                                 std::string name = "bilinear-quad");
SaddleProblem make_random_bilinear_quad(std::size_t n, std::size_t m, std::uint64_t seed,
                                        bool affine = true);

/// F = ½x² + xz − ½z².
SaddleProblem make_scalar_saddle();

/// F(x, ν) = f(x) + νᵀ(Ax − b). ∇zzF = 0, so only the weaker rank premise holds.
SaddleProblem make_constrained_as_saddle(const ConstrainedProblem& cp);

std::vector<SaddleProblem> saddle_catalog(std::uint64_t seed = 1);

/// [[∇ₓₓF, ∇zₓF], [∇zₓFᵀ, ∇zzF]].
Matrix full_saddle_hessian(const SaddleProblem& sp, const Vector& x, const Vector& z);

/// Solves [P S; Sᵀ −R]·[x; z] = −[p; r].
std::pair<Vector, Vector> solve_bilinear_saddle(const Matrix& P, const Matrix& S, const Matrix& R,
                                                const Vector& p, const Vector& r);

// ---------------------------------------------------------------------------
// Random helpers shared by builders and tests.

Matrix random_gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);
Vector random_gaussian_vector(std::size_t n, std::uint64_t seed);
/// Haar-ish orthogonal matrix via Gram-Schmidt on a Gaussian matrix.
Matrix random_orthogonal(std::size_t n, std::uint64_t seed);
/// U diag(λ) Uᵀ with λ evenly spread over [eig_min, eig_max].
Matrix random_spd(std::size_t n, double eig_min, double eig_max, std::uint64_t seed);
/// Unit vector in a random direction.
Vector random_unit_vector(std::size_t n, std::uint64_t seed);

}  // namespace fxt

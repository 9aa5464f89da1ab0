#include "fxt/problems.hpp"

#include <memory>
#include <stdexcept>

#include "fxt/errors.hpp"

namespace fxt {

namespace {

void check_full_row_rank(const Matrix& A) {
  if (A.rows() == 0 || A.rows() > A.cols()) {
    throw std::invalid_argument("constraint matrix must be m×n with 0 < m <= n");
  }
  const Matrix gram = A * A.transpose();
  if (!(min_eigenvalue_symmetric(gram) > 1e-10)) {
    throw std::invalid_argument("constraint matrix is not full row rank");
  }
}

}  // namespace

ConstrainedProblem make_constrained_qp(const Matrix& Q, const Vector& q, const Matrix& A,
                                       const Vector& b, std::string name) {
  if (A.cols() != Q.rows() || A.rows() != b.size()) {
    throw DimensionMismatch("make_constrained_qp: A must be m×n and b of length m");
  }
  check_full_row_rank(A);

  ConstrainedProblem cp;
  cp.name = std::move(name);
  cp.objective = make_quadratic(Q, q);
  cp.A = A;
  cp.b = b;

  const Matrix q_inv = lu_solve(Q, Matrix::identity(Q.rows())).symmetrized();
  auto qi = std::make_shared<const Matrix>(q_inv);
  auto qv = std::make_shared<const Vector>(q);
  auto qm = std::make_shared<const Matrix>(Q);
  auto am = std::make_shared<const Matrix>(A);

  cp.conjugate_value = [qi, qv](const Vector& y) {
    const Vector d = y - *qv;
    return 0.5 * d.dot(*qi * d);
  };
  cp.conjugate_gradient = [qi, qv](const Vector& y) { return *qi * (y - *qv); };
  // Stationarity Qx + q + Aᵀν = 0, solved directly rather than through Q⁻¹.
  cp.lagrangian_minimizer = [qm, qv, am](const Vector& nu) {
    return lu_solve(*qm, -(*qv + am->transpose() * nu));
  };
  // h(ν) = −g(ν) has constant Hessian A Q⁻¹ Aᵀ; its smallest eigenvalue is
  // both the strong convexity modulus and a PL constant for h.
  cp.dual_pl_mu = min_eigenvalue_symmetric((A * q_inv * A.transpose()).symmetrized());

  auto [x, nu] = solve_kkt_qp(Q, q, A, b);
  cp.known_x = std::move(x);
  cp.known_nu = std::move(nu);
  return cp;
}

ConstrainedProblem make_random_constrained_qp(std::size_t n, std::size_t m, std::uint64_t seed) {
  const Matrix Q = random_spd(n, 1.0, 10.0, seed);
  const Vector q = random_gaussian_vector(n, seed + 101);
  const Matrix A = random_gaussian_matrix(m, n, seed + 202);
  const Vector b = random_gaussian_vector(m, seed + 303);
  return make_constrained_qp(Q, q, A, b, "random-constrained-qp");
}

ConstrainedProblem make_unit_constrained_sphere() {
  ConstrainedProblem cp = make_constrained_qp(Matrix::identity(2), Vector(2), Matrix{{1.0, 0.0}},
                                              Vector{1.0}, "constrained-sphere");
  cp.objective.name = "sphere";
  return cp;
}

std::pair<Vector, Vector> solve_kkt_qp(const Matrix& Q, const Vector& q, const Matrix& A,
                                       const Vector& b) {
  const std::size_t n = Q.rows();
  const std::size_t m = A.rows();
  const Matrix kkt = block_matrix(Q, A.transpose(), A, Matrix(m, m));
  const Vector sol = lu_solve(kkt, Vector::stack(-q, b));
  return {sol.segment(0, n), sol.segment(n, m)};
}

double dual_function_value(const ConstrainedProblem& cp, const Vector& nu) {
  if (nu.size() != cp.m()) throw DimensionMismatch("dual_function_value: ν has wrong length");
  const Vector y = -(cp.A.transpose() * nu);
  return -nu.dot(cp.b) - cp.conjugate_value(y);
}

Vector dual_function_gradient(const ConstrainedProblem& cp, const Vector& nu) {
  if (nu.size() != cp.m()) throw DimensionMismatch("dual_function_gradient: ν has wrong length");
  const Vector y = -(cp.A.transpose() * nu);
  return cp.A * cp.conjugate_gradient(y) - cp.b;
}

Vector dual_gradient_via_lagrangian(const ConstrainedProblem& cp, const Vector& nu) {
  if (!cp.lagrangian_minimizer) {
    throw std::invalid_argument("dual_gradient_via_lagrangian: no Lagrangian minimizer oracle");
  }
  return cp.A * cp.lagrangian_minimizer(nu) - cp.b;
}

Vector lagrangian_gradient_x(const ConstrainedProblem& cp, const Vector& x, const Vector& nu) {
  if (x.size() != cp.n() || nu.size() != cp.m()) {
    throw DimensionMismatch("lagrangian_gradient_x: dimension mismatch");
  }
  return cp.objective.gradient(x) + cp.A.transpose() * nu;
}

// ---------------------------------------------------------------------------

std::pair<Vector, Vector> solve_bilinear_saddle(const Matrix& P, const Matrix& S, const Matrix& R,
                                                const Vector& p, const Vector& r) {
  const Matrix h = block_matrix(P, S, S.transpose(), -1.0 * R);
  const Vector sol = lu_solve(h, -Vector::stack(p, r));
  return {sol.segment(0, P.rows()), sol.segment(P.rows(), R.rows())};
}

SaddleProblem make_bilinear_quad(const Matrix& P, const Matrix& S, const Matrix& R,
                                 const Vector& p, const Vector& r, std::string name) {
  const std::size_t n = P.rows();
  const std::size_t m = R.rows();
  if (!P.square() || !R.square() || S.rows() != n || S.cols() != m || p.size() != n ||
      r.size() != m) {
    throw DimensionMismatch("make_bilinear_quad: block shapes do not agree");
  }
  auto Pm = std::make_shared<const Matrix>(P);
  auto Sm = std::make_shared<const Matrix>(S);
  auto Rm = std::make_shared<const Matrix>(R);
  auto pv = std::make_shared<const Vector>(p);
  auto rv = std::make_shared<const Vector>(r);

  SaddleProblem sp;
  sp.name = std::move(name);
  sp.n = n;
  sp.m = m;
  sp.value = [Pm, Sm, Rm, pv, rv](const Vector& x, const Vector& z) {
    return 0.5 * x.dot(*Pm * x) + x.dot(*Sm * z) - 0.5 * z.dot(*Rm * z) + pv->dot(x) +
           rv->dot(z);
  };
  sp.grad_x = [Pm, Sm, pv](const Vector& x, const Vector& z) { return *Pm * x + *Sm * z + *pv; };
  sp.grad_z = [Sm, Rm, rv](const Vector& x, const Vector& z) {
    return Sm->transpose() * x - *Rm * z + *rv;
  };
  sp.hess_xx = [Pm](const Vector&, const Vector&) { return *Pm; };
  sp.hess_zx = [Sm](const Vector&, const Vector&) { return *Sm; };
  sp.hess_zz = [Rm](const Vector&, const Vector&) { return -1.0 * *Rm; };
  sp.k1 = min_eigenvalue_symmetric(P);
  sp.k2 = min_eigenvalue_symmetric(R);
  sp.strictly_convex_concave = sp.k1 > 0.0 && sp.k2 > 0.0;
  sp.coupling_full_rank = true;
  sp.known_saddle = solve_bilinear_saddle(P, S, R, p, r);
  return sp;
}

SaddleProblem make_random_bilinear_quad(std::size_t n, std::size_t m, std::uint64_t seed,
                                        bool affine) {
  const Matrix P = random_spd(n, 1.0, 4.0, seed);
  const Matrix R = random_spd(m, 1.0, 4.0, seed + 11);
  const Matrix S = random_gaussian_matrix(n, m, seed + 22);
  const Vector p = affine ? random_gaussian_vector(n, seed + 33) : Vector(n);
  const Vector r = affine ? random_gaussian_vector(m, seed + 44) : Vector(m);
  return make_bilinear_quad(P, S, R, p, r);
}

SaddleProblem make_scalar_saddle() {
  return make_bilinear_quad(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Vector{0.0}, Vector{0.0},
                            "scalar-saddle");
}

SaddleProblem make_constrained_as_saddle(const ConstrainedProblem& cp) {
  auto shared = std::make_shared<const ConstrainedProblem>(cp);
  const std::size_t n = cp.n();
  const std::size_t m = cp.m();

  SaddleProblem sp;
  sp.name = "constrained-as-saddle";
  sp.n = n;
  sp.m = m;
  sp.value = [shared](const Vector& x, const Vector& nu) {
    return shared->objective.value(x) + nu.dot(shared->A * x - shared->b);
  };
  sp.grad_x = [shared](const Vector& x, const Vector& nu) {
    return lagrangian_gradient_x(*shared, x, nu);
  };
  sp.grad_z = [shared](const Vector& x, const Vector&) { return shared->A * x - shared->b; };
  sp.hess_xx = [shared](const Vector& x, const Vector&) { return shared->objective.hessian(x); };
  sp.hess_zx = [shared](const Vector&, const Vector&) { return shared->A.transpose(); };
  sp.hess_zz = [m](const Vector&, const Vector&) { return Matrix(m, m); };
  sp.k1 = cp.objective.strong_convexity_k;
  sp.k2 = 0.0;
  sp.strictly_convex_concave = false;
  sp.coupling_full_rank = true;  // A is full row rank by construction
  if (cp.known_x && cp.known_nu) sp.known_saddle = std::make_pair(*cp.known_x, *cp.known_nu);
  return sp;
}

std::vector<SaddleProblem> saddle_catalog(std::uint64_t seed) {
  std::vector<SaddleProblem> out;
  out.push_back(make_bilinear_quad(random_spd(3, 1.0, 4.0, seed), random_gaussian_matrix(3, 2, seed + 1),
                                   random_spd(2, 1.0, 4.0, seed + 2), Vector(3), Vector(2)));
  out.push_back(make_scalar_saddle());
  out.push_back(make_constrained_as_saddle(make_unit_constrained_sphere()));
  return out;
}

Matrix full_saddle_hessian(const SaddleProblem& sp, const Vector& x, const Vector& z) {
  if (x.size() != sp.n || z.size() != sp.m) {
    throw DimensionMismatch("full_saddle_hessian: dimension mismatch");
  }
  const Matrix upper_right = sp.hess_zx(x, z);
  return block_matrix(sp.hess_xx(x, z), upper_right, upper_right.transpose(), sp.hess_zz(x, z));
}

}  // namespace fxt

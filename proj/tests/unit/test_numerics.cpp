#include <cmath>
#include <random>

#include "doctest.h"
#include "fxt/errors.hpp"
#include "fxt/numerics.hpp"
#include "fxt/problems.hpp"

using namespace fxt;

namespace {

double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("lu_solve small systems") {
  CHECK(lu_solve(Matrix::identity(3), Vector{1, 2, 3}) == Vector{1, 2, 3});
  const Vector d = lu_solve(Matrix{{2, 0}, {0, 4}}, Vector{2, 8});
  CHECK(d[0] == doctest::Approx(1.0));
  CHECK(d[1] == doctest::Approx(2.0));
  const Vector z = lu_solve(Matrix{{1, 1}, {1, -1}}, Vector{0, 0});
  CHECK(z.norm() == 0.0);
}

TEST_CASE("lu_solve needs pivoting") {
  const Vector s = lu_solve(Matrix{{0, 1}, {1, 0}}, Vector{3, 5});
  CHECK(s[0] == doctest::Approx(5.0));
  CHECK(s[1] == doctest::Approx(3.0));
}

TEST_CASE("lu_solve flags singular matrices") {
  CHECK_THROWS_AS(lu_solve(Matrix{{1, 2}, {2, 4}}, Vector{1, 1}), SingularMatrix);
  CHECK_THROWS_AS(lu_solve(Matrix(3, 3), Vector(3)), SingularMatrix);
  // det = −2 sits far above the relative threshold.
  CHECK_NOTHROW(lu_solve(Matrix{{1, 1}, {1, -1}}, Vector{1, 0}));
}

TEST_CASE("lu_solve residual on random well-conditioned systems") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> dim(1, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = dim(rng);
    // Orthogonal times a diagonal with spread ≤ 1e6 keeps the condition bounded.
    const Matrix u = random_orthogonal(n, 1000 + trial);
    Vector d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = (i % 2 ? -1.0 : 1.0) * std::pow(10.0, 6.0 * i / std::max<std::size_t>(1, n - 1));
    const Matrix m = u * Matrix::diagonal(d) * u.transpose();
    const Vector rhs = random_gaussian_vector(n, 5000 + trial);
    const Vector s = lu_solve(m, rhs);
    REQUIRE((m * s - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("lu_solve with matrix right-hand side gives the inverse") {
  const Matrix m{{4, 1}, {2, 3}};
  const Matrix inv = lu_solve(m, Matrix::identity(2));
  const Matrix prod = m * inv;
  CHECK((prod - Matrix::identity(2)).max_abs() < 1e-15);
}

TEST_CASE("symmetric eigenvalues") {
  CHECK(min_eigenvalue_symmetric(Matrix::diagonal(Vector{3, 5})) == doctest::Approx(3.0));
  CHECK(min_eigenvalue_symmetric(Matrix::identity(4)) == doctest::Approx(1.0));
  CHECK(min_eigenvalue_symmetric(Matrix{{2, 1}, {1, 2}}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_eigenvalue_symmetric(Matrix{{2, 1}, {1, 2}}) == doctest::Approx(3.0).epsilon(1e-12));
  const auto all = symmetric_eigenvalues(Matrix{{2, 1, 0}, {1, 2, 1}, {0, 1, 2}});
  REQUIRE(all.size() == 3);
  CHECK(all[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
  CHECK(all[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(all[2] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("random_spd attains its eigenvalue range") {
  const Matrix q = random_spd(8, 0.5, 5.0, 3);
  CHECK(q.is_symmetric(1e-12));
  CHECK(min_eigenvalue_symmetric(q) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(max_eigenvalue_symmetric(q) == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("min eigenvalue bounds every Rayleigh quotient") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix g = random_gaussian_matrix(7, 7, seed);
    const Matrix m = (g + g.transpose()).symmetrized();
    const double lo = min_eigenvalue_symmetric(m);
    for (std::uint64_t k = 0; k < 100; ++k) {
      const Vector v = random_unit_vector(7, 100 * seed + k);
      REQUIRE(lo <= v.dot(m * v) + 1e-12);
    }
  }
}

TEST_CASE("finite differences") {
  const ScalarField half_sq = [](const Vector& x) { return 0.5 * x.norm_squared(); };
  CHECK(max_abs_diff(finite_diff_gradient(half_sq, Vector{3, 4}), Vector{3, 4}) <= 1e-9);
  const ScalarField constant = [](const Vector&) { return 7.0; };
  CHECK(finite_diff_gradient(constant, Vector{1, -2, 5}).norm() == 0.0);

  const ScalarField pl_sine = [](const Vector& x) {
    return x[0] * x[0] + 3.0 * std::sin(x[0]) * std::sin(x[0]);
  };
  CHECK(finite_diff_gradient(pl_sine, Vector{0.5})[0] == doctest::Approx(3.5244129544).epsilon(1e-9));
  CHECK(finite_diff_hessian(pl_sine, Vector{0.0})(0, 0) == doctest::Approx(8.0).epsilon(1e-6));

  CHECK((finite_diff_hessian(half_sq, Vector{2, -1, 0.5}) - Matrix::identity(3)).max_abs() < 1e-6);
  const ScalarField diag = [](const Vector& x) { return x[0] * x[0] + 3.0 * x[1] * x[1]; };
  CHECK((finite_diff_hessian(diag, Vector{1, 1}) - Matrix::diagonal(Vector{2, 6})).max_abs() < 1e-6);
}

TEST_CASE("vector and matrix plumbing") {
  const Vector s = Vector::stack(Vector{1, 2}, Vector{3});
  CHECK(s == Vector{1, 2, 3});
  CHECK(s.segment(1, 2) == Vector{2, 3});
  CHECK(Vector{3, 4}.norm() == doctest::Approx(5.0));
  CHECK_FALSE(Vector{1.0, std::nan("")}.all_finite());
  const Matrix b = block_matrix(Matrix::identity(1), Matrix{{2}}, Matrix{{3}}, Matrix{{4}});
  CHECK(b == Matrix{{1, 2}, {3, 4}});
  CHECK(Matrix{{1, 2}, {3, 4}}.transpose() == Matrix{{1, 3}, {2, 4}});
  CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), DimensionMismatch);
}

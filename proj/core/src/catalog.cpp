#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>

#include "fxt/errors.hpp"
#include "fxt/problems.hpp"

namespace fxt {

Matrix random_gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

Vector random_gaussian_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

Vector random_unit_vector(std::size_t n, std::uint64_t seed) {
  Vector v = random_gaussian_vector(n, seed);
  const double nv = v.norm();
  if (nv == 0.0) {
    Vector e(n);
    e[0] = 1.0;
    return e;
  }
  return (1.0 / nv) * v;
}

Matrix random_orthogonal(std::size_t n, std::uint64_t seed) {
  Matrix g = random_gaussian_matrix(n, n, seed);
  // Modified Gram-Schmidt over columns.
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += g(i, k) * g(i, j);
      for (std::size_t i = 0; i < n; ++i) g(i, j) -= proj * g(i, k);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += g(i, j) * g(i, j);
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) g(i, j) /= nrm;
  }
  return g;
}

Matrix random_spd(std::size_t n, double eig_min, double eig_max, std::uint64_t seed) {
  if (!(eig_min > 0.0) || eig_max < eig_min) {
    throw std::invalid_argument("random_spd: need 0 < eig_min <= eig_max");
  }
  const Matrix u = random_orthogonal(n, seed);
  Vector lambda(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    // Geometric spacing keeps ill-conditioned spectra spread across decades.
    lambda[i] = eig_min * std::pow(eig_max / eig_min, t);
  }
  return (u * Matrix::diagonal(lambda) * u.transpose()).symmetrized();
}

ObjectiveProblem make_sphere(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("make_sphere: dim must be positive");
  ObjectiveProblem p;
  p.name = "sphere";
  p.dim = dim;
  p.value = [](const Vector& x) { return 0.5 * x.norm_squared(); };
  p.gradient = [](const Vector& x) { return x; };
  p.hessian = [dim](const Vector&) { return Matrix::identity(dim); };
  p.minimizer = Vector(dim);
  p.optimum = 0.0;
  p.strong_convexity_k = 1.0;
  p.pl_constant_mu = 1.0;
  return p;
}

ObjectiveProblem make_quadratic(const Matrix& Q, const Vector& q, std::string name) {
  if (!Q.square() || Q.rows() != q.size() || Q.rows() == 0) {
    throw DimensionMismatch("make_quadratic: Q must be n×n with q of length n");
  }
  if (!Q.is_symmetric(1e-12)) throw std::invalid_argument("make_quadratic: Q is not symmetric");
  const double k = min_eigenvalue_symmetric(Q);
  if (!(k > 0.0)) throw std::invalid_argument("make_quadratic: Q is not positive definite");

  auto Qs = std::make_shared<const Matrix>(Q);
  auto qs = std::make_shared<const Vector>(q);
  ObjectiveProblem p;
  p.name = std::move(name);
  p.dim = Q.rows();
  p.value = [Qs, qs](const Vector& x) { return 0.5 * x.dot(*Qs * x) + qs->dot(x); };
  p.gradient = [Qs, qs](const Vector& x) { return *Qs * x + *qs; };
  p.hessian = [Qs](const Vector&) { return *Qs; };
  Vector xstar = -lu_solve(Q, q);
  p.optimum = 0.5 * qs->dot(xstar);
  p.minimizer = std::move(xstar);
  p.strong_convexity_k = k;
  // Strong convexity with modulus k implies PL with μ = k.
  p.pl_constant_mu = k;
  return p;
}

ObjectiveProblem make_random_quadratic(std::size_t dim, double eig_min, double eig_max,
                                       std::uint64_t seed, double q_scale) {
  const Matrix Q = random_spd(dim, eig_min, eig_max, seed);
  const Vector q = q_scale * random_gaussian_vector(dim, seed ^ 0x9e3779b97f4a7c15ULL);
  return make_quadratic(Q, q);
}

ObjectiveProblem make_pl_sine() {
  ObjectiveProblem p;
  p.name = "pl-sine";
  p.dim = 1;
  p.value = [](const Vector& x) {
    const double s = std::sin(x[0]);
    return x[0] * x[0] + 3.0 * s * s;
  };
  p.gradient = [](const Vector& x) { return Vector{2.0 * x[0] + 3.0 * std::sin(2.0 * x[0])}; };
  p.hessian = [](const Vector& x) { return Matrix{{2.0 + 6.0 * std::cos(2.0 * x[0])}}; };
  p.minimizer = Vector{0.0};
  p.optimum = 0.0;
  p.convex = false;
  p.strong_convexity_k = 0.0;
  Box box{Vector{-10.0}, Vector{10.0}};
  p.pl_constant_mu = estimate_pl_constant(p, box, 20001);
  p.pl_certificate_sampled = true;
  return p;
}

namespace {

// Softmax weights and log-sum-exp of the vector a·x, computed stably.
std::pair<Vector, double> softmax_lse(const Matrix& a, const Vector& x) {
  const Vector z = a * x;
  const double zmax = *std::max_element(z.begin(), z.end());
  Vector w(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    w[i] = std::exp(z[i] - zmax);
    sum += w[i];
  }
  w *= 1.0 / sum;
  return {w, zmax + std::log(sum)};
}

// Damped Newton to machine precision; used only to attach x* to smooth
// strongly convex catalog entries without a closed-form minimizer.
Vector newton_minimize(const ObjectiveProblem& p, Vector x) {
  for (int it = 0; it < 200; ++it) {
    const Vector g = p.gradient(x);
    if (g.norm() <= 1e-14 * std::max(1.0, std::abs(p.value(x)))) break;
    const Vector d = -lu_solve(p.hessian(x), g);
    const double f0 = p.value(x);
    double step = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      if (p.value(x + step * d) <= f0 + 1e-4 * step * g.dot(d)) break;
      step *= 0.5;
    }
    x += step * d;
  }
  return x;
}

}  // namespace

ObjectiveProblem make_log_sum_exp_reg(const Matrix& rows, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("make_log_sum_exp_reg: eps must be positive");
  if (rows.rows() == 0 || rows.cols() == 0) {
    throw std::invalid_argument("make_log_sum_exp_reg: need at least one term");
  }
  auto a = std::make_shared<const Matrix>(rows);
  const std::size_t n = rows.cols();
  ObjectiveProblem p;
  p.name = "log-sum-exp-reg";
  p.dim = n;
  p.value = [a, eps](const Vector& x) {
    return softmax_lse(*a, x).second + 0.5 * eps * x.norm_squared();
  };
  p.gradient = [a, eps](const Vector& x) {
    const auto [w, lse] = softmax_lse(*a, x);
    return a->transpose() * w + eps * x;
  };
  p.hessian = [a, eps, n](const Vector& x) {
    const auto [w, lse] = softmax_lse(*a, x);
    const Vector aw = a->transpose() * w;
    Matrix h(n, n);
    for (std::size_t i = 0; i < a->rows(); ++i)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) h(r, c) += w[i] * (*a)(i, r) * (*a)(i, c);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) h(r, c) -= aw[r] * aw[c];
    for (std::size_t r = 0; r < n; ++r) h(r, r) += eps;
    return h.symmetrized();
  };
  p.strong_convexity_k = eps;
  p.pl_constant_mu = eps;
  Vector xstar = newton_minimize(p, Vector(n));
  p.optimum = p.value(xstar);
  p.minimizer = std::move(xstar);
  return p;
}

ObjectiveProblem make_random_log_sum_exp_reg(std::size_t dim, std::size_t terms, double eps,
                                             std::uint64_t seed) {
  return make_log_sum_exp_reg(random_gaussian_matrix(terms, dim, seed), eps);
}

ObjectiveProblem make_quartic(std::size_t dim, double eps) {
  if (dim == 0) throw std::invalid_argument("make_quartic: dim must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("make_quartic: eps must be positive");
  ObjectiveProblem p;
  p.name = "quartic";
  p.dim = dim;
  p.value = [eps](const Vector& x) {
    double s = 0.0;
    for (double v : x) s += 0.25 * v * v * v * v + 0.5 * eps * v * v;
    return s;
  };
  p.gradient = [eps](const Vector& x) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] * x[i] * x[i] + eps * x[i];
    return g;
  };
  p.hessian = [eps](const Vector& x) {
    Matrix h(x.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) h(i, i) = 3.0 * x[i] * x[i] + eps;
    return h;
  };
  p.minimizer = Vector(dim);
  p.optimum = 0.0;
  p.strong_convexity_k = eps;
  p.pl_constant_mu = eps;
  return p;
}

std::vector<std::string> objective_names() {
  return {"sphere", "quadratic-Q", "pl-sine", "log-sum-exp-reg", "quartic"};
}

std::vector<ObjectiveProblem> catalog(std::size_t dim, std::uint64_t seed) {
  std::vector<ObjectiveProblem> out;
  out.push_back(make_sphere(dim));
  out.push_back(make_random_quadratic(dim, 0.5, 5.0, seed));
  out.push_back(make_pl_sine());
  out.push_back(make_random_log_sum_exp_reg(dim, 2 * dim, 0.1, seed + 1));
  out.push_back(make_quartic(dim, 0.5));
  return out;
}

double estimate_pl_constant(const ObjectiveProblem& p, const Box& box, std::size_t grid_n) {
  if (!p.optimum) throw MissingOptimum("estimate_pl_constant: '" + p.name + "' has no known f*");
  if (grid_n < 100) throw std::invalid_argument("estimate_pl_constant: grid_n must be >= 100");
  if (p.dim == 0 || p.dim > 3) {
    throw std::invalid_argument("estimate_pl_constant: grid oracle supports dim 1..3");
  }
  if (box.lower.size() != p.dim || box.upper.size() != p.dim) {
    throw DimensionMismatch("estimate_pl_constant: box dimension");
  }
  const double fstar = *p.optimum;
  std::size_t total = 1;
  for (std::size_t d = 0; d < p.dim; ++d) total *= grid_n;

  double best = std::numeric_limits<double>::infinity();
  Vector x(p.dim);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t d = 0; d < p.dim; ++d) {
      const std::size_t k = rem % grid_n;
      rem /= grid_n;
      const double t = static_cast<double>(k) / static_cast<double>(grid_n - 1);
      x[d] = box.lower[d] + t * (box.upper[d] - box.lower[d]);
    }
    const double gap = p.value(x) - fstar;
    if (std::abs(gap) < 1e-12) continue;
    const double ratio = 0.5 * p.gradient(x).norm_squared() / gap;
    best = std::min(best, ratio);
  }
  if (!std::isfinite(best)) {
    throw std::invalid_argument("estimate_pl_constant: every grid point is at the optimum");
  }
  return best * kPlSafetyFactor;
}

}  // namespace fxt

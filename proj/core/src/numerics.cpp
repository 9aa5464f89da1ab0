#include "fxt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fxt/errors.hpp"

namespace fxt {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) + " vs " +
                            std::to_string(b));
  }
}

}  // namespace

double Vector::dot(const Vector& other) const {
  require_same_size(size(), other.size(), "Vector::dot");
  return std::inner_product(data_.begin(), data_.end(), other.data_.begin(), 0.0);
}

double Vector::norm() const {
  // Scaled accumulation so that norms of states near 1e150 do not overflow.
  double scale = 0.0;
  for (double v : data_) {
    if (std::isnan(v)) return v;  // std::max would drop it
    scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double sum = 0.0;
  for (double v : data_) {
    const double r = v / scale;
    sum += r * r;
  }
  return scale * std::sqrt(sum);
}

bool Vector::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Vector& Vector::operator+=(const Vector& other) {
  require_same_size(size(), other.size(), "Vector::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require_same_size(size(), other.size(), "Vector::operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Vector& Vector::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

Vector Vector::stack(const Vector& a, const Vector& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.data_.begin(), a.data_.end());
  out.insert(out.end(), b.data_.begin(), b.data_.end());
  return Vector(std::move(out));
}

Vector Vector::segment(std::size_t offset, std::size_t count) const {
  if (offset + count > size()) {
    throw DimensionMismatch("Vector::segment out of range");
  }
  return Vector(std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(offset),
                                    data_.begin() + static_cast<std::ptrdiff_t>(offset + count)));
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator-(Vector a) { return a *= -1.0; }
Vector operator*(double s, Vector a) { return a *= s; }
Vector operator*(Vector a, double s) { return a *= s; }

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require_same_size(r.size(), cols_, "Matrix row length");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    require_same_size(rows[i].size(), c, "Matrix::from_rows row length");
    std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) {
    if (std::isnan(v)) return v;
    m = std::max(m, std::abs(v));
  }
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Matrix::is_symmetric(double tol) const noexcept {
  if (!square()) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
  return true;
}

Matrix Matrix::symmetrized() const {
  if (!square()) throw DimensionMismatch("Matrix::symmetrized needs a square matrix");
  Matrix s(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
  return s;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_size(rows_, other.rows_, "Matrix::operator+= rows");
  require_same_size(cols_, other.cols_, "Matrix::operator+= cols");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_size(rows_, other.rows_, "Matrix::operator-= rows");
  require_same_size(cols_, other.cols_, "Matrix::operator-= cols");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Vector operator*(const Matrix& m, const Vector& v) {
  require_same_size(m.cols(), v.size(), "Matrix*Vector");
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    out[i] = std::inner_product(r.begin(), r.end(), v.begin(), 0.0);
  }
  return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  require_same_size(a.cols(), b.rows(), "Matrix*Matrix");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix block_matrix(const Matrix& top_left, const Matrix& top_right, const Matrix& bottom_left,
                    const Matrix& bottom_right) {
  require_same_size(top_left.rows(), top_right.rows(), "block_matrix top rows");
  require_same_size(bottom_left.rows(), bottom_right.rows(), "block_matrix bottom rows");
  require_same_size(top_left.cols(), bottom_left.cols(), "block_matrix left cols");
  require_same_size(top_right.cols(), bottom_right.cols(), "block_matrix right cols");
  const std::size_t n = top_left.rows();
  const std::size_t c = top_left.cols();
  Matrix out(n + bottom_left.rows(), c + top_right.cols());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) {
      if (i < n) {
        out(i, j) = j < c ? top_left(i, j) : top_right(i, j - c);
      } else {
        out(i, j) = j < c ? bottom_left(i - n, j) : bottom_right(i - n, j - c);
      }
    }
  return out;
}

namespace {

// In-place LU with partial pivoting; returns the row permutation.
std::vector<std::size_t> lu_factor(Matrix& lu) {
  const std::size_t n = lu.rows();
  const double threshold = kPivotTolerance * lu.max_abs();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot_row = k;
    double pivot_mag = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > pivot_mag) {
        pivot_mag = std::abs(lu(i, k));
        pivot_row = i;
      }
    }
    if (!(pivot_mag > threshold) || pivot_mag == 0.0) {
      throw SingularMatrix("lu_solve: pivot " + std::to_string(pivot_mag) + " at column " +
                           std::to_string(k) + " below threshold");
    }
    if (pivot_row != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(pivot_row, j));
      std::swap(perm[k], perm[pivot_row]);
    }
    const double inv = 1.0 / lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = lu(i, k) * inv;
      lu(i, k) = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= l * lu(k, j);
    }
  }
  return perm;
}

Vector lu_substitute(const Matrix& lu, const std::vector<std::size_t>& perm, const Vector& rhs) {
  const std::size_t n = lu.rows();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * y[j];
    y[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= lu(ii, j) * y[j];
    y[ii] = s / lu(ii, ii);
  }
  return y;
}

}  // namespace

Vector lu_solve(const Matrix& m, const Vector& rhs) {
  if (!m.square()) throw DimensionMismatch("lu_solve: matrix is not square");
  require_same_size(m.rows(), rhs.size(), "lu_solve rhs");
  Matrix lu = m;
  const auto perm = lu_factor(lu);
  return lu_substitute(lu, perm, rhs);
}

Matrix lu_solve(const Matrix& m, const Matrix& rhs) {
  if (!m.square()) throw DimensionMismatch("lu_solve: matrix is not square");
  require_same_size(m.rows(), rhs.rows(), "lu_solve rhs");
  Matrix lu = m;
  const auto perm = lu_factor(lu);
  Matrix out(rhs.rows(), rhs.cols());
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    Vector col(rhs.rows());
    for (std::size_t i = 0; i < rhs.rows(); ++i) col[i] = rhs(i, c);
    const Vector s = lu_substitute(lu, perm, col);
    for (std::size_t i = 0; i < rhs.rows(); ++i) out(i, c) = s[i];
  }
  return out;
}

std::vector<double> symmetric_eigenvalues(const Matrix& m) {
  if (!m.square()) throw DimensionMismatch("symmetric_eigenvalues: matrix is not square");
  const std::size_t n = m.rows();
  Matrix a = m.symmetrized();

  auto off_norm_sq = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return s;
  };
  double frob_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) frob_sq += a(i, j) * a(i, j);
  const double target = 1e-32 * frob_sq;

  const std::size_t max_rotations = 10 * n * n;
  std::size_t rotations = 0;
  while (off_norm_sq() > target) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        if (rotations++ >= max_rotations) {
          throw NoConvergence("symmetric_eigenvalues: no convergence after " +
                              std::to_string(max_rotations) + " rotations");
        }
        // Classic Jacobi rotation annihilating a(p,q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double min_eigenvalue_symmetric(const Matrix& m) {
  if (m.rows() == 0) throw DimensionMismatch("min_eigenvalue_symmetric: empty matrix");
  return symmetric_eigenvalues(m).front();
}

double max_eigenvalue_symmetric(const Matrix& m) {
  if (m.rows() == 0) throw DimensionMismatch("max_eigenvalue_symmetric: empty matrix");
  return symmetric_eigenvalues(m).back();
}

Vector finite_diff_gradient(const ScalarField& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix finite_diff_hessian(const ScalarField& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_hessian: h must be positive");
  const std::size_t n = x.size();
  Matrix hess(n, n);
  Vector probe = x;
  auto eval = [&](std::size_t i, double si, std::size_t j, double sj) {
    probe[i] += si;
    probe[j] += sj;
    const double v = f(probe);
    probe[i] = x[i];
    probe[j] = x[j];
    return v;
  };
  const double f0 = f(x);
  for (std::size_t i = 0; i < n; ++i) {
    hess(i, i) = (eval(i, h, i, 0.0) - 2.0 * f0 + eval(i, -h, i, 0.0)) / (h * h);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (eval(i, h, j, h) - eval(i, h, j, -h) - eval(i, -h, j, h) +
                        eval(i, -h, j, -h)) /
                       (4.0 * h * h);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess.symmetrized();
}

}  // namespace fxt

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace fxt {

/// Dense real vector with a dimension fixed at construction.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double value = 0.0) : data_(n, value) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  [[nodiscard]] std::span<double> span() noexcept { return data_; }
  [[nodiscard]] std::span<const double> span() const noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  [[nodiscard]] double dot(const Vector& other) const;
  [[nodiscard]] double norm() const;
  [[nodiscard]] double norm_squared() const { return dot(*this); }
  [[nodiscard]] bool all_finite() const noexcept;

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double s) noexcept;

  /// Concatenates two vectors, [a; b].
  static Vector stack(const Vector& a, const Vector& b);
  /// Copies entries [offset, offset+count).
  [[nodiscard]] Vector segment(std::size_t offset, std::size_t count) const;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator-(Vector a);
Vector operator*(double s, Vector a);
Vector operator*(Vector a, double s);

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const Vector& d);
  /// Builds a matrix from equally sized rows; throws DimensionMismatch otherwise.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  [[nodiscard]] Matrix transpose() const;
  [[nodiscard]] double max_abs() const noexcept;
  [[nodiscard]] bool all_finite() const noexcept;
  [[nodiscard]] bool is_symmetric(double tol = 1e-12) const noexcept;
  /// (M + Mᵀ)/2.
  [[nodiscard]] Matrix symmetrized() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s) noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Vector operator*(const Matrix& m, const Vector& v);
Matrix operator*(const Matrix& a, const Matrix& b);

/// Assembles [[top_left, top_right], [bottom_left, bottom_right]].
Matrix block_matrix(const Matrix& top_left, const Matrix& top_right,
                    const Matrix& bottom_left, const Matrix& bottom_right);

/// Relative pivot threshold used by lu_solve: a pivot below
/// kPivotTolerance * max|M_ij| marks the matrix singular.
inline constexpr double kPivotTolerance = 1e-13;

/// Solves M s = rhs by LU factorization with partial pivoting.
/// Throws SingularMatrix when a pivot falls below the relative threshold.
Vector lu_solve(const Matrix& m, const Vector& rhs);

/// Solves M X = B column by column with a single factorization.
Matrix lu_solve(const Matrix& m, const Matrix& rhs);

/// All eigenvalues of a symmetric matrix, ascending (cyclic Jacobi).
/// Throws NoConvergence after 10·n² rotations.
std::vector<double> symmetric_eigenvalues(const Matrix& m);

double min_eigenvalue_symmetric(const Matrix& m);
double max_eigenvalue_symmetric(const Matrix& m);

using ScalarField = std::function<double(const Vector&)>;

inline constexpr double kGradientStep = 1e-5;
inline constexpr double kHessianStep = 1e-4;

/// Central-difference gradient, O(h²).
Vector finite_diff_gradient(const ScalarField& f, const Vector& x, double h = kGradientStep);

/// Central-difference Hessian, symmetrized.
Matrix finite_diff_hessian(const ScalarField& f, const Vector& x, double h = kHessianStep);

}  // namespace fxt

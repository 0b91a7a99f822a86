#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

// Small dense linear algebra kernels. Everything downstream works on 5x5 (or
// smaller) real symmetric information matrices plus modest complex channel
// matrices, so the kernels favour auditability over generality: cyclic Jacobi
// for symmetric eigendecompositions and one-sided Jacobi for singular values.
// Both deliver small singular values to high relative accuracy, which is what
// the rank decisions need.

namespace risloc {

// Relative cutoff shared by all rank decisions: a singular value (or
// eigenvalue magnitude) counts as nonzero when it exceeds rel_tol * largest.
inline constexpr double kRankRelTol = 1e-10;

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const { return data_[index(r, c)]; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  Matrix transposed() const {
    Matrix out(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
  }

  Matrix block(int r0, int c0, int nr, int nc) const {
    check_block(r0, c0, nr, nc);
    Matrix out(nr, nc);
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nc; ++c) out(r, c) = (*this)(r0 + r, c0 + c);
    return out;
  }

  void set_block(int r0, int c0, const Matrix& m) {
    check_block(r0, c0, m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) (*this)(r0 + r, c0 + c) = m(r, c);
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
      throw std::invalid_argument("matrix product: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (int r = 0; r < a.rows(); ++r)
      for (int k = 0; k < a.cols(); ++k) {
        const T arc = a(r, k);
        for (int c = 0; c < b.cols(); ++c) out(r, c) += arc * b(k, c);
      }
    return out;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b);
    Matrix out = a;
    for (size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
    return out;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b);
    Matrix out = a;
    for (size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
    return out;
  }

  friend Matrix operator*(T s, const Matrix& m) {
    Matrix out = m;
    for (auto& v : out.data_) v *= s;
    return out;
  }

  Matrix& operator+=(const Matrix& other) {
    check_same_shape(*this, other);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

 private:
  static size_t checked_size(int rows, int cols) {
    if (rows < 0 || cols < 0)
      throw std::invalid_argument("matrix dimensions must be non-negative");
    return static_cast<size_t>(rows) * static_cast<size_t>(cols);
  }
  static void check_same_shape(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
      throw std::invalid_argument("matrix shapes differ");
  }
  void check_block(int r0, int c0, int nr, int nc) const {
    if (r0 < 0 || c0 < 0 || nr < 0 || nc < 0 || r0 + nr > rows_ || c0 + nc > cols_)
      throw std::invalid_argument("matrix block out of range");
  }
  size_t index(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
      throw std::out_of_range("matrix index out of range");
    return static_cast<size_t>(r) * cols_ + c;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using MatrixD = Matrix<double>;
using MatrixC = Matrix<std::complex<double>>;

double max_abs(const MatrixD& m);
double frobenius_norm(const MatrixD& m);
double frobenius_norm(const MatrixC& m);
bool all_finite(const MatrixD& m);

// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
// eigenvalues are sorted descending; eigenvectors(i, k) is component i of the
// eigenvector for eigenvalues[k], so m == V * diag(values) * V^T.
struct SymEigenResult {
  std::vector<double> eigenvalues;
  MatrixD eigenvectors;
};
SymEigenResult sym_eigen(const MatrixD& m);

// Singular values (descending) via one-sided Jacobi column orthogonalisation.
std::vector<double> singular_values(const MatrixD& m);
std::vector<double> singular_values(const MatrixC& m);

// Number of singular values above rel_tol * largest. Zero matrices rank 0.
int numerical_rank(const MatrixD& m, double rel_tol = kRankRelTol);
int numerical_rank(const MatrixC& m, double rel_tol = kRankRelTol);

// Inverse of a real symmetric matrix through its eigendecomposition. When the
// smallest |eigenvalue| falls below rel_tol * largest the matrix is reported
// singular and no inverse is produced; rank and condition stay meaningful
// diagnostics either way. Inputs asymmetric beyond a 1e-10 relative skew are
// rejected outright.
struct SymInverseResult {
  bool singular = false;
  MatrixD inverse;     // empty when singular
  int rank = 0;
  double condition = 0.0;  // |largest| / |smallest| eigenvalue, inf-safe
};
SymInverseResult sym_inverse(const MatrixD& m, double rel_tol = kRankRelTol);

// Central-difference Jacobian of a vector-valued function: column i holds
// (f(x + h_i e_i) - f(x - h_i e_i)) / (2 h_i). Steps must be positive and the
// evaluations finite.
MatrixD central_diff(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::vector<double>& x, const std::vector<double>& steps);

}  // namespace risloc

#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace aqcast {

/// Dense row-major matrix of doubles; the only numeric container here.
/// Row vectors are 1xN matrices where convenient.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  const std::vector<double>& raw() const { return data_; }
  std::vector<double>& raw() { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  void fill(double v) { data_.assign(data_.size(), v); }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// --- GEMM kernels -----------------------------------------------------------
//
// The default kernels parallelize over output rows with OpenMP. Each output
// element is produced by exactly one thread running a fixed-order inner loop,
// so results are bit-identical to the serial reference for any thread count.
// The serial reference lives in aqcast::serial and is kept for tests and the
// kernel benchmark.

/// a(m x k) * b(k x n) -> m x n
Matrix matmul(const Matrix& a, const Matrix& b);

/// a(m x k) * b(n x k)^T -> m x n
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// a(k x m)^T * b(k x n) -> m x n
Matrix matmul_tn(const Matrix& a, const Matrix& b);

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
}  // namespace serial

// --- elementwise helpers ----------------------------------------------------

/// a += b (same shape)
void add_inplace(Matrix& a, const Matrix& b);

/// a(r, c) += row(0, c) for every r; row is 1 x cols
void add_row_broadcast(Matrix& a, const Matrix& row);

/// a *= s
void scale_inplace(Matrix& a, double s);

/// elementwise product
Matrix hadamard(const Matrix& a, const Matrix& b);

/// a += b * s
void axpy_inplace(Matrix& a, const Matrix& b, double s);

/// 1 x cols vector of column sums
Matrix column_sums(const Matrix& a);

/// true iff every entry is finite
bool all_finite(const Matrix& a);

}  // namespace aqcast

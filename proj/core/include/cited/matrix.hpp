#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cited {

/// Row-major dense matrix of doubles. Biases are stored as 1 x k matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

/// Adds a 1 x cols row vector to every row.
void add_row_vector(Matrix& m, const Matrix& bias);
/// 1 x cols matrix of column sums.
Matrix column_sums(const Matrix& m);
Matrix relu(const Matrix& m);
Matrix softmax_rows(const Matrix& logits);
void softmax_into(std::span<const double> logits, std::span<double> out);
std::vector<int> argmax_rows(const Matrix& m);
Matrix select_rows(const Matrix& m, std::span<const std::uint32_t> rows);

double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_norm(std::span<const double> v);
double frobenius_norm(const Matrix& m);

/// Square CSR matrix; column indices within a row are sorted ascending.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const;
  Matrix to_dense() const;
};

/// sparse * dense
Matrix spmm(const SparseMatrix& a, const Matrix& b);
/// sparse^T * dense
Matrix spmm_t(const SparseMatrix& a, const Matrix& b);

}  // namespace cited

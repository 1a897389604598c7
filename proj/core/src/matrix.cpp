#include "cited/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cited/error.hpp"

namespace cited {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, ErrorCode::ShapeMismatch,
          "matrix data length does not equal rows*cols");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), ErrorCode::ShapeMismatch, "matmul inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), ErrorCode::ShapeMismatch, "matmul_tn row counts differ");
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), ErrorCode::ShapeMismatch, "matmul_nt column counts differ");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto brow = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

void add_row_vector(Matrix& m, const Matrix& bias) {
  require(bias.rows() == 1 && bias.cols() == m.cols(), ErrorCode::ShapeMismatch,
          "bias must be 1 x cols");
  auto b = bias.row(0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) r[j] += b[j];
  }
}

Matrix column_sums(const Matrix& m) {
  Matrix out(1, m.cols());
  auto o = out.row(0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) o[j] += r[j];
  }
  return out;
}

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& x : out.values()) x = x > 0.0 ? x : 0.0;
  return out;
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp(logits[j] - mx);
    total += out[j];
  }
  for (double& x : out) x /= total;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) softmax_into(logits.row(i), out.row(i));
  return out;
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    out[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

Matrix select_rows(const Matrix& m, std::span<const std::uint32_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < m.rows(), ErrorCode::IndexOutOfRange, "row index out of range");
    std::copy_n(m.row(rows[i]).begin(), m.cols(), out.row(i).begin());
  }
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

double euclidean_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double frobenius_norm(const Matrix& m) { return euclidean_norm(m.values()); }

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  const auto first = indices.begin() + static_cast<std::ptrdiff_t>(offsets[r]);
  const auto last = indices.begin() + static_cast<std::ptrdiff_t>(offsets[r + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
  if (it == last || *it != c) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

Matrix SparseMatrix::to_dense() const {
  Matrix out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) out(r, indices[k]) = values[k];
  return out;
}

Matrix spmm(const SparseMatrix& a, const Matrix& b) {
  require(a.n == b.rows(), ErrorCode::ShapeMismatch, "spmm dimension mismatch");
  Matrix out(a.n, b.cols());
  for (std::size_t r = 0; r < a.n; ++r) {
    auto orow = out.row(r);
    for (std::size_t k = a.offsets[r]; k < a.offsets[r + 1]; ++k) {
      const double w = a.values[k];
      auto brow = b.row(a.indices[k]);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += w * brow[j];
    }
  }
  return out;
}

Matrix spmm_t(const SparseMatrix& a, const Matrix& b) {
  require(a.n == b.rows(), ErrorCode::ShapeMismatch, "spmm_t dimension mismatch");
  Matrix out(a.n, b.cols());
  for (std::size_t r = 0; r < a.n; ++r) {
    auto brow = b.row(r);
    for (std::size_t k = a.offsets[r]; k < a.offsets[r + 1]; ++k) {
      const double w = a.values[k];
      auto orow = out.row(a.indices[k]);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += w * brow[j];
    }
  }
  return out;
}

}  // namespace cited

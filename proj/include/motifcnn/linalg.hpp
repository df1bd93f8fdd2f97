#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace motifcnn {

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Column indices are sorted within each row
/// and no explicit zeros are stored.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

  /// Duplicate coordinates are summed; entries summing to zero are dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);

  /// Takes ownership of prebuilt CSR arrays; throws ValidationError if the
  /// invariants above do not hold.
  static SparseMatrix from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> offsets,
                               std::vector<std::size_t> columns, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_columns(std::size_t r) const {
    return {col_indices_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
  }
  std::span<const std::size_t> offsets() const { return row_offsets_; }

  double at(std::size_t r, std::size_t c) const;
  SparseMatrix transpose() const;
  DenseMatrix to_dense() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

// Kernels. All reductions run in ascending index order within an output
// element, so results are bit-identical for any thread count.

/// S * B
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& b);
/// S^T * B
DenseMatrix spmm_transposed(const SparseMatrix& s, const DenseMatrix& b);
/// A * B
DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b);
/// A^T * B
DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b);
/// A * B^T
DenseMatrix gemm_nt(const DenseMatrix& a, const DenseMatrix& b);

/// diag(v) * B. A zero in v zeroes the corresponding row.
DenseMatrix row_scale(std::span<const double> v, const DenseMatrix& b);
DenseMatrix map_elementwise(const std::function<double(double)>& f, const DenseMatrix& b);

/// a += b
void add_inplace(DenseMatrix& a, const DenseMatrix& b);
/// a += scale * b
void axpy_inplace(DenseMatrix& a, double scale, const DenseMatrix& b);

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace motifcnn

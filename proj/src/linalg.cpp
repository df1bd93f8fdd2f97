#include "motifcnn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "motifcnn/errors.hpp"
#include "motifcnn/parallel.hpp"

namespace motifcnn {

namespace {

// Below this many output rows the kernels stay on the calling thread.
constexpr std::size_t kParallelRowThreshold = 256;

int threads_for(std::size_t rows) {
  return rows >= kParallelRowThreshold ? num_threads() : 1;
}

void require(bool ok, const char* op, std::size_t ar, std::size_t ac, std::size_t br, std::size_t bc) {
  if (!ok) {
    throw ShapeError(std::string(op) + ": shape mismatch (" + std::to_string(ar) + "x" +
                     std::to_string(ac) + " vs " + std::to_string(br) + "x" + std::to_string(bc) + ")");
  }
}

}  // namespace

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw ShapeError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m(rows, cols);
  for (std::size_t i = 0; i < triplets.size();) {
    const std::size_t r = triplets[i].row;
    const std::size_t c = triplets[i].col;
    double sum = 0.0;
    for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c; ++i) sum += triplets[i].value;
    if (sum != 0.0) {
      m.col_indices_.push_back(c);
      m.values_.push_back(sum);
      ++m.row_offsets_[r + 1];
    }
  }
  std::partial_sum(m.row_offsets_.begin(), m.row_offsets_.end(), m.row_offsets_.begin());
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

SparseMatrix SparseMatrix::from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> offsets,
                                    std::vector<std::size_t> columns, std::vector<double> values) {
  if (offsets.size() != rows + 1 || offsets.front() != 0 || offsets.back() != columns.size() ||
      columns.size() != values.size()) {
    throw ValidationError("CSR arrays are inconsistent");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (offsets[r] > offsets[r + 1]) throw ValidationError("CSR offsets decrease", r);
    for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
      if (columns[k] >= cols) throw ValidationError("CSR column out of range", r);
      if (k > offsets[r] && columns[k] <= columns[k - 1]) throw ValidationError("CSR columns unsorted", r);
      if (values[k] == 0.0) throw ValidationError("CSR stores an explicit zero", r);
    }
  }
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_offsets_ = std::move(offsets);
  m.col_indices_ = std::move(columns);
  m.values_ = std::move(values);
  return m;
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  const auto cols = row_columns(r);
  const auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(cols_, rows_);
  for (std::size_t c : col_indices_) ++t.row_offsets_[c + 1];
  std::partial_sum(t.row_offsets_.begin(), t.row_offsets_.end(), t.row_offsets_.begin());
  t.col_indices_.resize(nnz());
  t.values_.resize(nnz());
  std::vector<std::size_t> cursor(t.row_offsets_.begin(), t.row_offsets_.end() - 1);
  // Visiting source rows in order keeps each transposed row sorted.
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const std::size_t slot = cursor[col_indices_[k]]++;
      t.col_indices_[slot] = r;
      t.values_[slot] = values_[k];
    }
  }
  return t;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) d(r, col_indices_[k]) = values_[k];
  }
  return d;
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& b) {
  require(s.cols() == b.rows(), "spmm", s.rows(), s.cols(), b.rows(), b.cols());
  DenseMatrix out(s.rows(), b.cols());
  const auto rows = static_cast<std::int64_t>(s.rows());
#pragma omp parallel for schedule(static) num_threads(threads_for(s.rows()))
  for (std::int64_t r = 0; r < rows; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    auto dst = out.row(ur);
    const auto cols = s.row_columns(ur);
    const auto vals = s.row_values(ur);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto src = b.row(cols[k]);
      const double v = vals[k];
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

DenseMatrix spmm_transposed(const SparseMatrix& s, const DenseMatrix& b) {
  require(s.rows() == b.rows(), "spmm_transposed", s.rows(), s.cols(), b.rows(), b.cols());
  return spmm(s.transpose(), b);
}

DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "gemm", a.rows(), a.cols(), b.rows(), b.cols());
  DenseMatrix out(a.rows(), b.cols());
  const auto rows = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static) num_threads(threads_for(a.rows()))
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    auto dst = out.row(ui);
    const auto lhs = a.row(ui);
    for (std::size_t k = 0; k < lhs.size(); ++k) {
      const double v = lhs[k];
      if (v == 0.0) continue;
      const auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows(), "gemm_tn", a.rows(), a.cols(), b.rows(), b.cols());
  DenseMatrix out(a.cols(), b.cols());
  const auto rows = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static) num_threads(threads_for(a.cols()))
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    auto dst = out.row(ui);
    for (std::size_t k = 0; k < a.rows(); ++k) {
      const double v = a(k, ui);
      if (v == 0.0) continue;
      const auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

DenseMatrix gemm_nt(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.cols(), "gemm_nt", a.rows(), a.cols(), b.rows(), b.cols());
  DenseMatrix out(a.rows(), b.rows());
  const auto rows = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static) num_threads(threads_for(a.rows()))
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const auto lhs = a.row(ui);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto rhs = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < lhs.size(); ++k) acc += lhs[k] * rhs[k];
      out(ui, j) = acc;
    }
  }
  return out;
}

DenseMatrix row_scale(std::span<const double> v, const DenseMatrix& b) {
  require(v.size() == b.rows(), "row_scale", v.size(), 1, b.rows(), b.cols());
  DenseMatrix out(b.rows(), b.cols());
  for (std::size_t i = 0; i < b.rows(); ++i) {
    if (v[i] == 0.0) continue;
    const auto src = b.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = v[i] * src[j];
  }
  return out;
}

DenseMatrix map_elementwise(const std::function<double(double)>& f, const DenseMatrix& b) {
  DenseMatrix out(b.rows(), b.cols());
  std::transform(b.values().begin(), b.values().end(), out.values().begin(), f);
  return out;
}

void add_inplace(DenseMatrix& a, const DenseMatrix& b) {
  require(a.same_shape(b), "add", a.rows(), a.cols(), b.rows(), b.cols());
  auto dst = a.values();
  const auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void axpy_inplace(DenseMatrix& a, double scale, const DenseMatrix& b) {
  require(a.same_shape(b), "axpy", a.rows(), a.cols(), b.rows(), b.cols());
  auto dst = a.values();
  const auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.same_shape(b), "max_abs_difference", a.rows(), a.cols(), b.rows(), b.cols());
  double worst = 0.0;
  const auto x = a.values();
  const auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  return worst;
}

}  // namespace motifcnn

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ridgetap {

using Index = std::uint32_t;

/// A sparse real vector: strictly increasing indices, finite nonzero values.
class SparseVector {
public:
    SparseVector() = default;
    explicit SparseVector(std::size_t dim) : dim_(dim) {}

    /// Builds from unsorted (index, value) pairs; duplicates are summed and
    /// zeros dropped. Throws DimensionError on out-of-range indices and
    /// Error on non-finite values.
    static SparseVector from_pairs(std::size_t dim, std::vector<std::pair<Index, double>> pairs);
    static SparseVector from_dense(std::span<const double> dense);

    /// Appends an entry past the current last index. Zeros are skipped.
    void push_back(Index idx, double value);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t nnz() const noexcept { return idx_.size(); }
    bool empty() const noexcept { return idx_.empty(); }

    std::span<const Index> indices() const noexcept { return idx_; }
    std::span<const double> values() const noexcept { return val_; }

    double squared_norm() const noexcept;
    double dot(std::span<const double> dense) const noexcept;
    /// dense += alpha * this
    void add_to(std::span<double> dense, double alpha = 1.0) const noexcept;
    SparseVector scaled(double alpha) const;
    Eigen::VectorXd to_dense() const;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<Index> idx_;
    std::vector<double> val_;
};

/// Sparse column-addressable matrix (CSC semantics, one SparseVector per column).
class ColumnMatrix {
public:
    ColumnMatrix() = default;
    explicit ColumnMatrix(std::size_t n_rows) : n_rows_(n_rows) {}

    static ColumnMatrix from_dense(const Eigen::MatrixXd& dense);
    static ColumnMatrix identity(std::size_t n);

    /// Appends a column; existing columns are not touched.
    void append(SparseVector column);
    /// Appends a zero column.
    void append_zero();

    std::size_t rows() const noexcept { return n_rows_; }
    std::size_t cols() const noexcept { return columns_.size(); }
    std::size_t nnz() const noexcept { return nnz_; }
    bool empty() const noexcept { return columns_.empty(); }

    const SparseVector& col(std::size_t j) const { return columns_.at(j); }
    std::span<const SparseVector> columns() const noexcept { return columns_; }

    double frobenius_sq() const noexcept;
    Eigen::MatrixXd to_dense() const;
    /// A * A^T as a dense n x n matrix.
    Eigen::MatrixXd gram_rows() const;
    /// Columns selected by index (with repetition allowed), each scaled.
    ColumnMatrix select(std::span<const std::size_t> which, std::span<const double> scale) const;

    friend bool operator==(const ColumnMatrix&, const ColumnMatrix&) = default;

private:
    std::size_t n_rows_ = 0;
    std::vector<SparseVector> columns_;
    std::size_t nnz_ = 0;
};

/// [A, x]: a copy of A with one more column.
ColumnMatrix append_column(const ColumnMatrix& a, SparseVector x);

}  // namespace ridgetap

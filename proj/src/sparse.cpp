#include "ridgetap/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "ridgetap/error.hpp"
#include "ridgetap/kernels.hpp"

namespace ridgetap {

SparseVector SparseVector::from_pairs(std::size_t dim, std::vector<std::pair<Index, double>> pairs) {
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseVector v(dim);
    std::size_t i = 0;
    while (i < pairs.size()) {
        const Index idx = pairs[i].first;
        if (idx >= dim) throw DimensionError("sparse index " + std::to_string(idx) +
                                             " out of range for dimension " + std::to_string(dim));
        double sum = 0.0;
        for (; i < pairs.size() && pairs[i].first == idx; ++i) sum += pairs[i].second;
        v.push_back(idx, sum);
    }
    return v;
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
    SparseVector v(dense.size());
    for (std::size_t i = 0; i < dense.size(); ++i) v.push_back(static_cast<Index>(i), dense[i]);
    return v;
}

void SparseVector::push_back(Index idx, double value) {
    if (!std::isfinite(value)) throw Error("non-finite value in sparse vector");
    if (idx >= dim_) throw DimensionError("sparse index out of range");
    if (!idx_.empty() && idx <= idx_.back()) throw Error("sparse indices must be strictly increasing");
    if (value == 0.0) return;
    idx_.push_back(idx);
    val_.push_back(value);
}

double SparseVector::squared_norm() const noexcept { return kernels::sum_sq(val_); }

double SparseVector::dot(std::span<const double> dense) const noexcept {
    return kernels::gather_dot(dense, idx_, val_);
}

void SparseVector::add_to(std::span<double> dense, double alpha) const noexcept {
    for (std::size_t i = 0; i < idx_.size(); ++i) dense[idx_[i]] += alpha * val_[i];
}

SparseVector SparseVector::scaled(double alpha) const {
    SparseVector out(dim_);
    if (alpha == 0.0) return out;
    out.idx_ = idx_;
    out.val_.reserve(val_.size());
    for (double v : val_) out.val_.push_back(alpha * v);
    return out;
}

Eigen::VectorXd SparseVector::to_dense() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < idx_.size(); ++i) d(idx_[i]) = val_[i];
    return d;
}

ColumnMatrix ColumnMatrix::from_dense(const Eigen::MatrixXd& dense) {
    ColumnMatrix m(static_cast<std::size_t>(dense.rows()));
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
        const Eigen::VectorXd c = dense.col(j);
        m.append(SparseVector::from_dense({c.data(), static_cast<std::size_t>(c.size())}));
    }
    return m;
}

ColumnMatrix ColumnMatrix::identity(std::size_t n) {
    ColumnMatrix m(n);
    for (std::size_t j = 0; j < n; ++j) {
        SparseVector e(n);
        e.push_back(static_cast<Index>(j), 1.0);
        m.append(std::move(e));
    }
    return m;
}

void ColumnMatrix::append(SparseVector column) {
    if (column.dim() != n_rows_)
        throw DimensionError("column has " + std::to_string(column.dim()) + " entries, matrix has " +
                             std::to_string(n_rows_) + " rows");
    nnz_ += column.nnz();
    columns_.push_back(std::move(column));
}

void ColumnMatrix::append_zero() { columns_.emplace_back(n_rows_); }

double ColumnMatrix::frobenius_sq() const noexcept {
    double s = 0.0;
    for (const auto& c : columns_) s += c.squared_norm();
    return s;
}

Eigen::MatrixXd ColumnMatrix::to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows_),
                                              static_cast<Eigen::Index>(columns_.size()));
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        const auto& c = columns_[j];
        for (std::size_t i = 0; i < c.nnz(); ++i)
            d(c.indices()[i], static_cast<Eigen::Index>(j)) = c.values()[i];
    }
    return d;
}

Eigen::MatrixXd ColumnMatrix::gram_rows() const {
    const auto n = static_cast<Eigen::Index>(n_rows_);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    // Rank-1 updates restricted to each column's support.
    for (const auto& c : columns_) {
        const auto idx = c.indices();
        const auto val = c.values();
        for (std::size_t a = 0; a < idx.size(); ++a) {
            for (std::size_t b = a; b < idx.size(); ++b) g(idx[b], idx[a]) += val[a] * val[b];
        }
    }
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose().triangularView<Eigen::StrictlyUpper>();
    return g;
}

ColumnMatrix ColumnMatrix::select(std::span<const std::size_t> which,
                                  std::span<const double> scale) const {
    if (which.size() != scale.size()) throw DimensionError("select: index/scale length mismatch");
    ColumnMatrix out(n_rows_);
    for (std::size_t s = 0; s < which.size(); ++s) out.append(col(which[s]).scaled(scale[s]));
    return out;
}

ColumnMatrix append_column(const ColumnMatrix& a, SparseVector x) {
    ColumnMatrix out = a;
    out.append(std::move(x));
    return out;
}

}  // namespace ridgetap

#pragma once

// MatrixMarket coordinate files, the line-per-column sparse format, and the
// dense text format used for bases.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "ridgetap/sparse.hpp"

namespace ridgetap {

enum class MatrixFormat { matrix_market, sparse_lines };

/// `%%MatrixMarket matrix coordinate real general` (integer also accepted),
/// 1-based indices. Duplicate entries are summed. Errors carry line numbers.
ColumnMatrix read_matrix_market(std::istream& is);
/// Entries sorted by (column, row), values as shortest round-trip decimals.
void write_matrix_market(std::ostream& os, const ColumnMatrix& a);

/// Header `%%SparseLines rows N`, then one line per column:
/// `col_id nnz idx:val ...` with col_id counting up from 1 and 1-based rows.
class SparseLinesReader {
public:
    explicit SparseLinesReader(std::istream& is);
    std::size_t rows() const noexcept { return rows_; }
    /// Next column, or nullopt at end of input.
    std::optional<SparseVector> next();

private:
    std::istream& is_;
    std::size_t rows_ = 0;
    std::size_t line_ = 0;
    std::size_t next_id_ = 1;
};

ColumnMatrix read_sparse_lines(std::istream& is);
void write_sparse_lines(std::ostream& os, const ColumnMatrix& a);

/// First line `rows cols`, then one row per line.
void write_dense_text(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_dense_text(std::istream& is);

ColumnMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format);
void write_matrix(const std::filesystem::path& path, const ColumnMatrix& a, MatrixFormat format);

/// Calls `sink` with every column in file order. Sparse-lines input is read
/// incrementally; MatrixMarket input is loaded whole first.
std::size_t for_each_column(const std::filesystem::path& path, MatrixFormat format,
                            const std::function<void(std::size_t rows, SparseVector)>& sink);

}  // namespace ridgetap

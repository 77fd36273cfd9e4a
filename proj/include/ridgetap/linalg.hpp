#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "ridgetap/sparse.hpp"

namespace ridgetap {

/// Thin SVD A = U diag(sigma) V^T truncated at the numerical rank.
struct SvdFactors {
    Eigen::MatrixXd U;      ///< n x r, orthonormal columns
    Eigen::VectorXd sigma;  ///< r values, nonincreasing, all above the rank cutoff
    Eigen::MatrixXd V;      ///< d x r, orthonormal columns (empty if not requested)
    std::size_t rank = 0;

    Eigen::MatrixXd reconstruct() const;
};

/// Head/tail split at the smallest singular value that still clears the
/// ridge regularizer tail_k / k.
struct SpectralSplit {
    std::size_t m = 0;         ///< number of head directions (1-based index of sigma_m)
    double tail_norm_k = 0.0;  ///< ||A - A_k||_F^2
    double tail_norm_m = 0.0;  ///< ||A - A_m||_F^2
};

enum class SvdVectors { both, left_only };

/// Largest dimension handled by the dense SVD; RIDGETAP_DENSE_LIMIT overrides
/// the default of 4096.
std::size_t dense_svd_limit();

/// Singular values at or below max(n,d) * eps * sigma_1 count as zero.
/// Throws DenseLimitError when neither side fits under dense_svd_limit().
SvdFactors svd(const ColumnMatrix& a, SvdVectors vectors = SvdVectors::both);
SvdFactors svd(const Eigen::MatrixXd& a, SvdVectors vectors = SvdVectors::both);

/// ||A - A_k||_F^2 = total_frob_sq - sum_{i<=k} sigma_i^2, or 0 once k >= rank.
/// Throws NumericalError when the result is below -1e-9 * total_frob_sq.
double tail_norm(const SvdFactors& f, std::size_t k, double total_frob_sq);

SpectralSplit spectral_split(const SvdFactors& f, std::size_t k, double total_frob_sq);

/// ||A - Z Z^T A||_F^2 computed as ||A||_F^2 - ||Z^T A||_F^2. Z must have
/// orthonormal columns (checked to 1e-8, ParameterError otherwise).
double project_residual(const ColumnMatrix& a, const Eigen::MatrixXd& z);

/// Max-abs deviation of Z^T Z from the identity.
double orthonormality_defect(const Eigen::MatrixXd& z);

/// Z^T a for a sparse column a.
Eigen::VectorXd project(const Eigen::MatrixXd& z, const SparseVector& a);

/// Orthonormal basis for the column span of a dense matrix (rank-truncated).
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m);

/// Extends Q (orthonormal columns) to `cols` orthonormal columns using
/// standard basis vectors, in index order.
Eigen::MatrixXd extend_basis(const Eigen::MatrixXd& q, std::size_t cols);

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
struct SymmetricEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};
SymmetricEigen eigh_descending(const Eigen::MatrixXd& sym);

}  // namespace ridgetap

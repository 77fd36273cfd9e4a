#pragma once

// Ridge leverage scores a_i^T (A A^T + lambda I)^+ a_i with the regularizer
// lambda = ||A - A_k||_F^2 / k, plus the generalized form evaluated through a
// reference matrix M and a Johnson-Lindenstrauss accelerated estimate.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ridgetap/linalg.hpp"
#include "ridgetap/report.hpp"
#include "ridgetap/sparse.hpp"

namespace ridgetap {

enum class ScoreProvenance { exact, generalized, jl_approx, fd_approx };

std::string_view provenance_name(ScoreProvenance p) noexcept;

struct RidgeScores {
    std::vector<double> scores;  ///< +inf only for generalized scores off the reference span
    double lambda = 0.0;
    std::size_t k = 0;
    ScoreProvenance provenance = ScoreProvenance::exact;
    std::string reference;        ///< reference matrix label (generalized / jl)
    std::size_t sketch_rows = 0;  ///< jl only

    std::size_t size() const noexcept { return scores.size(); }
    double sum() const noexcept;
    bool any_infinite() const noexcept;
};

/// Factored pseudoinverse of (M M^T + lambda I):
///   R diag(inv_sigma_bar)^2 R^T + (1/lambda)(I - R R^T)
/// where R holds the left singular vectors of M and the complement term is
/// present only when lambda > 0. Immutable; safe for concurrent scoring.
class RidgeSolver {
public:
    RidgeSolver() = default;

    /// lambda = ||M - M_k||_F^2 / k.
    static RidgeSolver build(const ColumnMatrix& m, std::size_t k);
    /// Same form from precomputed factors of M with a caller-chosen lambda.
    static RidgeSolver from_factors(const SvdFactors& f, std::size_t k, double lambda);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(basis_.rows()); }
    std::size_t reference_rank() const noexcept { return static_cast<std::size_t>(basis_.cols()); }
    double lambda() const noexcept { return lambda_; }
    std::size_t k() const noexcept { return k_; }
    const Eigen::MatrixXd& basis() const noexcept { return basis_; }
    const Eigen::VectorXd& inv_sigma_bar() const noexcept { return inv_sigma_bar_; }

    /// x^T (M M^T + lambda I)^+ x. When lambda == 0 and x leaves the span of
    /// M (relative residual > 1e-8) the result is +inf.
    double quadratic_form(const SparseVector& x) const;
    double quadratic_form(const Eigen::VectorXd& x) const;

    /// Relative distance of x from span(R): ||(I - R R^T) x|| / ||x||.
    double off_span_ratio(const SparseVector& x) const;

    /// Pi * M_sym for M_sym = R diag(inv_sigma_bar) R^T + lambda^{-1/2} (I - R R^T),
    /// computed in factored form (s x n).
    Eigen::MatrixXd sketch_symmetric_root(const Eigen::MatrixXd& pi) const;

private:
    Eigen::MatrixXd basis_;
    Eigen::VectorXd inv_sigma_bar_;
    double lambda_ = 0.0;
    std::size_t k_ = 0;
};

/// Exact ridge scores of A's own columns. Requires 1 <= k <= min(n, d).
/// Falls back to standard leverage scores when rank(A) <= k (lambda = 0).
RidgeScores exact_ridge_scores(const ColumnMatrix& a, std::size_t k);

/// Ridge scores of A's columns w.r.t. the reference M (same row count).
RidgeScores generalized_ridge_scores(const ColumnMatrix& a, const ColumnMatrix& m, std::size_t k);
RidgeScores generalized_ridge_scores(const ColumnMatrix& a, const RidgeSolver& solver);

/// ||Pi M_sym a_i||^2 with Pi a sketch_rows x n Rademacher matrix scaled by
/// 1/sqrt(sketch_rows), drawn from the named stream "jl-sketch" of `seed`.
RidgeScores jl_ridge_scores(const ColumnMatrix& a, const RidgeSolver& solver,
                            std::size_t sketch_rows, std::uint64_t seed);
/// Same with a caller-provided embedding Pi (s x n).
RidgeScores jl_ridge_scores(const ColumnMatrix& a, const RidgeSolver& solver,
                            const Eigen::MatrixXd& pi);

/// Rademacher embedding used by jl_ridge_scores.
Eigen::MatrixXd rademacher_embedding(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Certifies that appending x to A does not raise any existing column's exact
/// ridge score (tolerance 1e-8). Recomputes both SVDs; a verification op.
/// details: max_increase, max_decrease (the other direction, for the record).
VerificationReport check_monotonicity(const ColumnMatrix& a, const SparseVector& x, std::size_t k);

}  // namespace ridgetap

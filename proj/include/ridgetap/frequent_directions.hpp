#pragma once

// Frequent Directions over a column stream: a dense n x (ell+1)k sketch B with
//   B B^T <= A A^T <= B B^T + (1/ell) (||A - A_k||_F^2 / k) I.

#include <cstddef>
#include <cstdint>
#include <iosfwd>

#include <Eigen/Dense>

#include "ridgetap/report.hpp"
#include "ridgetap/ridge_scores.hpp"
#include "ridgetap/sparse.hpp"

namespace ridgetap {

class FDSketch {
public:
    FDSketch() = default;
    FDSketch(std::size_t n, std::size_t k, std::size_t ell = 2);

    std::size_t rows() const noexcept { return n_; }
    std::size_t k() const noexcept { return k_; }
    std::size_t ell() const noexcept { return ell_; }
    std::size_t width() const noexcept { return (ell_ + 1) * k_; }
    std::size_t fill() const noexcept { return fill_; }
    double frob_a() const noexcept { return frob_a_; }
    /// Total squared singular value subtracted so far (the additive error bound).
    double shrink_total() const noexcept { return shrink_total_; }
    std::size_t shrinks() const noexcept { return shrinks_; }
    const Eigen::MatrixXd& buffer() const noexcept { return buffer_; }

    /// Appends a column. A full buffer is first shrunk by its smallest squared
    /// singular value and compacted.
    void update(const SparseVector& column);

    /// ||B_k||_F^2.
    double top_k_mass() const;

    /// Frozen solver for a^T (B B^T + ((||A||_F^2 - ||B_k||_F^2)/k) I)^+ a.
    RidgeSolver scorer() const;

    void write(std::ostream& os) const;
    static FDSketch read(std::istream& is);

    friend bool operator==(const FDSketch& x, const FDSketch& y);

private:
    void shrink();

    std::size_t n_ = 0;
    std::size_t k_ = 0;
    std::size_t ell_ = 0;
    std::size_t fill_ = 0;
    double frob_a_ = 0.0;
    double shrink_total_ = 0.0;
    std::size_t shrinks_ = 0;
    Eigen::MatrixXd buffer_;
};

/// Raw FD ridge score (no inflation). A zero column scores 0; a column off the
/// span of a sketch with zero regularizer scores +inf.
double fd_ridge_score(const FDSketch& sketch, const SparseVector& column);

/// fd_ridge_score for every column of A against one frozen sketch.
RidgeScores fd_ridge_scores(const FDSketch& sketch, const ColumnMatrix& a);

/// Audits both orderings of the sandwich against the exact A A^T of the
/// ingested prefix: min-eig(AA^T - BB^T) and min-eig(BB^T + (tail_k/(ell k)) I - AA^T)
/// must be >= -1e-8 ||A||_2^2.
VerificationReport verify_fd_sandwich(const FDSketch& sketch, const Eigen::MatrixXd& gram_a,
                                      double tail_k);

}  // namespace ridgetap

#include "ridgetap/frequent_directions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "ridgetap/error.hpp"
#include "ridgetap/linalg.hpp"

namespace ridgetap {

FDSketch::FDSketch(std::size_t n, std::size_t k, std::size_t ell) : n_(n), k_(k), ell_(ell) {
    if (n < 1) throw ParameterError("FD sketch needs n >= 1");
    if (k < 1) throw ParameterError("FD sketch needs k >= 1");
    if (ell < 1) throw ParameterError("FD sketch needs ell >= 1");
    buffer_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width()));
}

void FDSketch::shrink() {
    const auto w = static_cast<Eigen::Index>(width());
    const SvdFactors f = svd(buffer_, SvdVectors::left_only);
    const Eigen::Index r = static_cast<Eigen::Index>(f.rank);
    const double floor = r == w ? f.sigma(w - 1) * f.sigma(w - 1) : 0.0;
    buffer_.setZero();
    std::size_t kept = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
        const double s2 = f.sigma(i) * f.sigma(i) - floor;
        if (s2 <= 0.0) continue;
        buffer_.col(static_cast<Eigen::Index>(kept++)) = std::sqrt(s2) * f.U.col(i);
    }
    fill_ = kept;
    shrink_total_ += floor;
    ++shrinks_;
}

void FDSketch::update(const SparseVector& column) {
    if (column.dim() != n_)
        throw DimensionError("fd_update: column has " + std::to_string(column.dim()) +
                             " entries, sketch has " + std::to_string(n_) + " rows");
    frob_a_ += column.squared_norm();
    if (column.empty()) return;
    if (fill_ == width()) shrink();
    auto dst = buffer_.col(static_cast<Eigen::Index>(fill_));
    column.add_to({dst.data(), n_});
    ++fill_;
}

double FDSketch::top_k_mass() const {
    if (fill_ == 0) return 0.0;
    const SvdFactors f = svd(Eigen::MatrixXd(buffer_.leftCols(static_cast<Eigen::Index>(fill_))),
                             SvdVectors::left_only);
    const auto take = std::min<Eigen::Index>(static_cast<Eigen::Index>(k_), f.sigma.size());
    return f.sigma.head(take).squaredNorm();
}

RidgeSolver FDSketch::scorer() const {
    if (fill_ == 0) return RidgeSolver::from_factors(
        SvdFactors{Eigen::MatrixXd(static_cast<Eigen::Index>(n_), 0), Eigen::VectorXd(0), {}, 0},
        k_, 0.0);
    SvdFactors f = svd(Eigen::MatrixXd(buffer_.leftCols(static_cast<Eigen::Index>(fill_))),
                       SvdVectors::left_only);
    const auto take = std::min<Eigen::Index>(static_cast<Eigen::Index>(k_), f.sigma.size());
    const double lambda =
        std::max(0.0, (frob_a_ - f.sigma.head(take).squaredNorm()) / static_cast<double>(k_));
    // A regularizer at rounding level of ||A||_F^2 means B holds A exactly.
    return RidgeSolver::from_factors(f, k_, lambda <= 1e-13 * frob_a_ ? 0.0 : lambda);
}

double fd_ridge_score(const FDSketch& sketch, const SparseVector& column) {
    if (column.empty()) return 0.0;
    return sketch.scorer().quadratic_form(column);
}

RidgeScores fd_ridge_scores(const FDSketch& sketch, const ColumnMatrix& a) {
    RidgeScores out = generalized_ridge_scores(a, sketch.scorer());
    out.provenance = ScoreProvenance::fd_approx;
    out.reference = "fd(" + std::to_string(sketch.rows()) + "x" + std::to_string(sketch.width()) + ")";
    return out;
}

VerificationReport verify_fd_sandwich(const FDSketch& sketch, const Eigen::MatrixXd& gram_a,
                                      double tail_k) {
    const auto n = static_cast<Eigen::Index>(sketch.rows());
    if (gram_a.rows() != n || gram_a.cols() != n)
        throw DimensionError("verify_fd_sandwich: Gram matrix has the wrong shape");
    const auto b = sketch.buffer().leftCols(static_cast<Eigen::Index>(sketch.fill()));
    const Eigen::MatrixXd bb = b * b.transpose();
    const double slack = tail_k / static_cast<double>(sketch.ell() * sketch.k());
    const SymmetricEigen lower = eigh_descending(gram_a - bb);
    const SymmetricEigen upper =
        eigh_descending(bb + slack * Eigen::MatrixXd::Identity(n, n) - gram_a);
    const double top = std::max(0.0, eigh_descending(gram_a).values(0));
    const double tol = 1e-8 * top;
    VerificationReport r;
    r.guarantee = Guarantee::fd_sandwich;
    r.tolerance_used = tol;
    r.bound = -tol;
    const double min_lower = lower.values(n - 1);
    const double min_upper = upper.values(n - 1);
    r.passed = min_lower >= -tol && min_upper >= -tol;
    const bool lower_worse = min_lower <= min_upper;
    r.achieved = lower_worse ? min_lower : min_upper;
    r.witness_kind = "eigenvector";
    const Eigen::VectorXd v = lower_worse ? lower.vectors.col(n - 1) : upper.vectors.col(n - 1);
    r.witness.assign(v.data(), v.data() + v.size());
    r.details = {{"min_eig_lower", min_lower},
                 {"min_eig_upper", min_upper},
                 {"additive_slack", slack},
                 {"shrink_total", sketch.shrink_total()}};
    return r;
}

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint format is little-endian");

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
        throw ParseError(0, "truncated FD checkpoint");
    return v;
}

}  // namespace

void FDSketch::write(std::ostream& os) const {
    put<std::uint64_t>(os, n_);
    put<std::uint64_t>(os, k_);
    put<std::uint64_t>(os, ell_);
    put<std::uint64_t>(os, fill_);
    put<double>(os, frob_a_);
    for (Eigen::Index i = 0; i < buffer_.rows(); ++i)
        for (Eigen::Index j = 0; j < buffer_.cols(); ++j) put<double>(os, buffer_(i, j));
    if (!os) throw Error("failed to write FD checkpoint");
}

FDSketch FDSketch::read(std::istream& is) {
    const auto n = get<std::uint64_t>(is);
    const auto k = get<std::uint64_t>(is);
    const auto ell = get<std::uint64_t>(is);
    const auto fill = get<std::uint64_t>(is);
    if (n == 0 || k == 0 || ell == 0 || n > (1u << 24) || k > (1u << 16) || ell > (1u << 16))
        throw ParseError(0, "FD checkpoint header out of range");
    FDSketch s(n, k, ell);
    if (fill > s.width()) throw ParseError(0, "FD checkpoint fill exceeds width");
    s.fill_ = fill;
    s.frob_a_ = get<double>(is);
    for (Eigen::Index i = 0; i < s.buffer_.rows(); ++i)
        for (Eigen::Index j = 0; j < s.buffer_.cols(); ++j) s.buffer_(i, j) = get<double>(is);
    return s;
}

bool operator==(const FDSketch& x, const FDSketch& y) {
    return x.n_ == y.n_ && x.k_ == y.k_ && x.ell_ == y.ell_ && x.fill_ == y.fill_ &&
           x.frob_a_ == y.frob_a_ && x.buffer_ == y.buffer_;
}

}  // namespace ridgetap

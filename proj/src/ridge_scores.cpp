#include "ridgetap/ridge_scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ridgetap/error.hpp"
#include "ridgetap/kernels.hpp"
#include "ridgetap/linalg.hpp"
#include "ridgetap/rng.hpp"

namespace ridgetap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSpanTolerance = 1e-8;

void check_k(std::size_t k, std::size_t n, std::size_t d) {
    if (k < 1 || k > std::min(n, d))
        throw ParameterError("k = " + std::to_string(k) + " outside [1, min(n, d)] = [1, " +
                             std::to_string(std::min(n, d)) + "]");
}

}  // namespace

std::string_view provenance_name(ScoreProvenance p) noexcept {
    switch (p) {
        case ScoreProvenance::exact: return "exact";
        case ScoreProvenance::generalized: return "generalized";
        case ScoreProvenance::jl_approx: return "jl_approx";
        case ScoreProvenance::fd_approx: return "fd_approx";
    }
    return "unknown";
}

double RidgeScores::sum() const noexcept {
    double s = 0.0;
    for (double v : scores) s += v;
    return s;
}

bool RidgeScores::any_infinite() const noexcept {
    return std::any_of(scores.begin(), scores.end(), [](double v) { return std::isinf(v); });
}

RidgeSolver RidgeSolver::build(const ColumnMatrix& m, std::size_t k) {
    if (k < 1) throw ParameterError("build_ridge_solver: k must be >= 1");
    RidgeSolver s;
    s.k_ = k;
    const double frob = m.frobenius_sq();
    if (m.cols() == 0 || frob == 0.0) {
        s.basis_ = Eigen::MatrixXd(static_cast<Eigen::Index>(m.rows()), 0);
        s.inv_sigma_bar_ = Eigen::VectorXd(0);
        return s;
    }
    const SvdFactors f = svd(m, SvdVectors::left_only);
    s.lambda_ = tail_norm(f, k, frob) / static_cast<double>(k);
    s.basis_ = f.U;
    s.inv_sigma_bar_ = (f.sigma.array().square() + s.lambda_).rsqrt().matrix();
    return s;
}

RidgeSolver RidgeSolver::from_factors(const SvdFactors& f, std::size_t k, double lambda) {
    if (k < 1) throw ParameterError("build_ridge_solver: k must be >= 1");
    if (!(lambda >= 0.0)) throw ParameterError("ridge regularizer must be >= 0");
    RidgeSolver s;
    s.k_ = k;
    s.lambda_ = lambda;
    s.basis_ = f.U;
    s.inv_sigma_bar_ = (f.sigma.array().square() + lambda).rsqrt().matrix();
    return s;
}

double RidgeSolver::quadratic_form(const SparseVector& x) const {
    if (x.dim() != rows()) throw DimensionError("quadratic_form: vector length mismatch");
    if (x.empty()) return 0.0;
    const Eigen::VectorXd y = project(basis_, x);
    const double head = (y.array() * inv_sigma_bar_.array()).square().sum();
    Eigen::VectorXd residual = -(basis_ * y);
    x.add_to({residual.data(), static_cast<std::size_t>(residual.size())});
    const double res_sq = residual.squaredNorm();
    if (lambda_ > 0.0) return head + res_sq / lambda_;
    if (res_sq > kSpanTolerance * kSpanTolerance * x.squared_norm()) return kInf;
    return head;
}

double RidgeSolver::quadratic_form(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != rows())
        throw DimensionError("quadratic_form: vector length mismatch");
    const double xx = x.squaredNorm();
    if (xx == 0.0) return 0.0;
    const Eigen::VectorXd y = basis_.transpose() * x;
    const double head = (y.array() * inv_sigma_bar_.array()).square().sum();
    const double res_sq = (x - basis_ * y).squaredNorm();
    if (lambda_ > 0.0) return head + res_sq / lambda_;
    if (res_sq > kSpanTolerance * kSpanTolerance * xx) return kInf;
    return head;
}

double RidgeSolver::off_span_ratio(const SparseVector& x) const {
    const double xx = x.squared_norm();
    if (xx == 0.0) return 0.0;
    const Eigen::VectorXd y = project(basis_, x);
    Eigen::VectorXd residual = -(basis_ * y);
    x.add_to({residual.data(), static_cast<std::size_t>(residual.size())});
    return std::sqrt(residual.squaredNorm() / xx);
}

Eigen::MatrixXd RidgeSolver::sketch_symmetric_root(const Eigen::MatrixXd& pi) const {
    if (static_cast<std::size_t>(pi.cols()) != rows())
        throw DimensionError("sketch_symmetric_root: embedding has wrong column count");
    const Eigen::MatrixXd pr = pi * basis_;
    Eigen::MatrixXd g = pr * inv_sigma_bar_.asDiagonal() * basis_.transpose();
    if (lambda_ > 0.0) g += (pi - pr * basis_.transpose()) / std::sqrt(lambda_);
    return g;
}

RidgeScores exact_ridge_scores(const ColumnMatrix& a, std::size_t k) {
    check_k(k, a.rows(), a.cols());
    RidgeScores out;
    out.k = k;
    out.provenance = ScoreProvenance::exact;
    out.scores.assign(a.cols(), 0.0);
    const double frob = a.frobenius_sq();
    if (frob == 0.0) return out;
    const SvdFactors f = svd(a, SvdVectors::both);
    out.lambda = tail_norm(f, k, frob) / static_cast<double>(k);
    // a_i = U Sigma V_i^T, so a_i^T U (Sigma^2 + lambda)^-1 U^T a_i
    //     = sum_j sigma_j^2 / (sigma_j^2 + lambda) * V_ij^2.
    const Eigen::VectorXd s2 = f.sigma.array().square();
    const Eigen::VectorXd shrink = (s2.array() / (s2.array() + out.lambda)).matrix();
    for (std::size_t i = 0; i < a.cols(); ++i) {
        const auto row = f.V.row(static_cast<Eigen::Index>(i));
        const double v = (row.array().square() * shrink.transpose().array()).sum();
        out.scores[i] = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

RidgeScores generalized_ridge_scores(const ColumnMatrix& a, const RidgeSolver& solver) {
    if (a.rows() != solver.rows())
        throw DimensionError("generalized_ridge_scores: reference has " +
                             std::to_string(solver.rows()) + " rows, A has " +
                             std::to_string(a.rows()));
    RidgeScores out;
    out.k = solver.k();
    out.lambda = solver.lambda();
    out.provenance = ScoreProvenance::generalized;
    out.scores.resize(a.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) out.scores[i] = solver.quadratic_form(a.col(i));
    return out;
}

RidgeScores generalized_ridge_scores(const ColumnMatrix& a, const ColumnMatrix& m, std::size_t k) {
    if (a.rows() != m.rows())
        throw DimensionError("generalized_ridge_scores: row-count mismatch (" +
                             std::to_string(a.rows()) + " vs " + std::to_string(m.rows()) + ")");
    RidgeScores out = generalized_ridge_scores(a, RidgeSolver::build(m, k));
    out.reference = "M(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
    return out;
}

Eigen::MatrixXd rademacher_embedding(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    if (rows < 1) throw ParameterError("sketch_rows must be >= 1");
    Philox rng = make_rng(seed, "jl-sketch", rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    Eigen::MatrixXd pi(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < pi.cols(); ++j)
        for (Eigen::Index i = 0; i < pi.rows(); ++i) pi(i, j) = scale * rng.sign();
    return pi;
}

RidgeScores jl_ridge_scores(const ColumnMatrix& a, const RidgeSolver& solver,
                            const Eigen::MatrixXd& pi) {
    if (a.rows() != solver.rows()) throw DimensionError("jl_ridge_scores: row-count mismatch");
    const Eigen::MatrixXd g = solver.sketch_symmetric_root(pi);
    const auto s = static_cast<std::size_t>(g.rows());
    RidgeScores out;
    out.k = solver.k();
    out.lambda = solver.lambda();
    out.provenance = ScoreProvenance::jl_approx;
    out.sketch_rows = s;
    out.scores.resize(a.cols());
    std::vector<double> acc(s);
    for (std::size_t i = 0; i < a.cols(); ++i) {
        const SparseVector& col = a.col(i);
        if (solver.lambda() == 0.0 && solver.off_span_ratio(col) > kSpanTolerance) {
            out.scores[i] = kInf;
            continue;
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        const auto idx = col.indices();
        const auto val = col.values();
        for (std::size_t e = 0; e < idx.size(); ++e)
            kernels::axpy(val[e], {g.col(idx[e]).data(), s}, acc);
        out.scores[i] = kernels::sum_sq(acc);
    }
    return out;
}

RidgeScores jl_ridge_scores(const ColumnMatrix& a, const RidgeSolver& solver,
                            std::size_t sketch_rows, std::uint64_t seed) {
    return jl_ridge_scores(a, solver, rademacher_embedding(sketch_rows, a.rows(), seed));
}

VerificationReport check_monotonicity(const ColumnMatrix& a, const SparseVector& x, std::size_t k) {
    if (x.dim() != a.rows()) throw DimensionError("check_monotonicity: x has the wrong length");
    const RidgeScores before = exact_ridge_scores(a, k);
    const RidgeScores after = exact_ridge_scores(append_column(a, x), k);
    constexpr double tol = 1e-8;
    VerificationReport r;
    r.guarantee = Guarantee::monotonicity;
    r.tolerance_used = tol;
    r.witness_kind = "column";
    double max_inc = -kInf;
    double max_dec = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < a.cols(); ++i) {
        const double delta = after.scores[i] - before.scores[i];
        if (delta > max_inc) {
            max_inc = delta;
            worst = i;
        }
        max_dec = std::max(max_dec, -delta);
    }
    if (a.cols() == 0) max_inc = 0.0;
    r.achieved = max_inc;
    r.bound = 0.0;
    r.passed = max_inc <= tol;
    r.witness = {static_cast<double>(worst), before.scores.empty() ? 0.0 : before.scores[worst],
                 after.scores.empty() ? 0.0 : after.scores[worst]};
    r.details = {{"max_increase", max_inc}, {"max_decrease", max_dec},
                 {"lambda_before", before.lambda}, {"lambda_after", after.lambda}};
    return r;
}

}  // namespace ridgetap

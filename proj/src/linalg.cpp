#include "ridgetap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "ridgetap/error.hpp"

namespace ridgetap {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::size_t count_above(const Eigen::VectorXd& s, double cutoff) {
    std::size_t r = 0;
    while (r < static_cast<std::size_t>(s.size()) && s(static_cast<Eigen::Index>(r)) > cutoff) ++r;
    return r;
}

SvdFactors dense_path(const Eigen::MatrixXd& a, SvdVectors vectors) {
    const unsigned opts = vectors == SvdVectors::both ? (Eigen::ComputeThinU | Eigen::ComputeThinV)
                                                      : Eigen::ComputeThinU;
    Eigen::BDCSVD<Eigen::MatrixXd> solver(a, opts);
    const Eigen::VectorXd& s = solver.singularValues();
    SvdFactors f;
    if (s.size() == 0 || s(0) == 0.0) return f;
    const double cutoff = static_cast<double>(std::max(a.rows(), a.cols())) * kEps * s(0);
    const auto r = static_cast<Eigen::Index>(count_above(s, cutoff));
    f.rank = static_cast<std::size_t>(r);
    f.sigma = s.head(r);
    f.U = solver.matrixU().leftCols(r);
    if (vectors == SvdVectors::both) f.V = solver.matrixV().leftCols(r);
    return f;
}

// Eigen-decomposition of the smaller Gram matrix. Eigenvalues carry absolute
// error ~ eps * sigma_1^2, so the cutoff is applied to squared values.
SvdFactors gram_path(const Eigen::MatrixXd& a, SvdVectors vectors) {
    const bool tall = a.rows() >= a.cols();
    const Eigen::MatrixXd g = tall ? Eigen::MatrixXd(a.transpose() * a)
                                   : Eigen::MatrixXd(a * a.transpose());
    const SymmetricEigen e = eigh_descending(g);
    SvdFactors f;
    if (e.values.size() == 0 || e.values(0) <= 0.0) return f;
    const double cutoff =
        static_cast<double>(std::max(a.rows(), a.cols())) * kEps * e.values(0);
    const auto r = static_cast<Eigen::Index>(count_above(e.values, cutoff));
    f.rank = static_cast<std::size_t>(r);
    f.sigma = e.values.head(r).cwiseSqrt();
    const Eigen::MatrixXd small = e.vectors.leftCols(r);
    const Eigen::MatrixXd other =
        (tall ? Eigen::MatrixXd(a * small) : Eigen::MatrixXd(a.transpose() * small)) *
        f.sigma.cwiseInverse().asDiagonal();
    if (tall) {
        f.U = other;
        if (vectors == SvdVectors::both) f.V = small;
    } else {
        f.U = small;
        if (vectors == SvdVectors::both) f.V = other;
    }
    return f;
}

}  // namespace

Eigen::MatrixXd SvdFactors::reconstruct() const { return U * sigma.asDiagonal() * V.transpose(); }

std::size_t dense_svd_limit() {
    if (const char* env = std::getenv("RIDGETAP_DENSE_LIMIT")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 4096;
}

SvdFactors svd(const Eigen::MatrixXd& a, SvdVectors vectors) {
    if (a.rows() == 0 || a.cols() == 0) throw DimensionError("svd of an empty matrix");
    const auto limit = static_cast<Eigen::Index>(dense_svd_limit());
    if (a.rows() <= limit && a.cols() <= limit) return dense_path(a, vectors);
    if (std::min(a.rows(), a.cols()) <= limit) return gram_path(a, vectors);
    throw DenseLimitError("matrix " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                          " exceeds the dense SVD limit " + std::to_string(limit) +
                          "; use a sketched path");
}

SvdFactors svd(const ColumnMatrix& a, SvdVectors vectors) {
    if (a.rows() == 0 || a.cols() == 0) throw DimensionError("svd of an empty matrix");
    const std::size_t limit = dense_svd_limit();
    if (std::min(a.rows(), a.cols()) > limit)
        throw DenseLimitError("matrix " + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " exceeds the dense SVD limit " +
                              std::to_string(limit) + "; use a sketched path");
    if (a.cols() <= limit || a.rows() > limit) return svd(a.to_dense(), vectors);
    // Wide and sparse: eigen-decompose A A^T without densifying A.
    const SymmetricEigen e = eigh_descending(a.gram_rows());
    SvdFactors f;
    if (e.values.size() == 0 || e.values(0) <= 0.0) return f;
    const double cutoff = static_cast<double>(std::max(a.rows(), a.cols())) * kEps * e.values(0);
    const auto r = static_cast<Eigen::Index>(count_above(e.values, cutoff));
    f.rank = static_cast<std::size_t>(r);
    f.sigma = e.values.head(r).cwiseSqrt();
    f.U = e.vectors.leftCols(r);
    if (vectors == SvdVectors::both) {
        f.V.resize(static_cast<Eigen::Index>(a.cols()), r);
        const Eigen::VectorXd inv = f.sigma.cwiseInverse();
        for (std::size_t i = 0; i < a.cols(); ++i)
            f.V.row(static_cast<Eigen::Index>(i)) = project(f.U, a.col(i)).cwiseProduct(inv).transpose();
    }
    return f;
}

double tail_norm(const SvdFactors& f, std::size_t k, double total_frob_sq) {
    if (k == 0) throw ParameterError("tail_norm: k must be >= 1");
    if (k >= f.rank) return 0.0;
    double head = 0.0;
    for (std::size_t i = 0; i < k; ++i) head += f.sigma(static_cast<Eigen::Index>(i)) *
                                              f.sigma(static_cast<Eigen::Index>(i));
    const double tail = total_frob_sq - head;
    if (tail < -1e-9 * total_frob_sq)
        throw NumericalError("tail norm is negative: total_frob_sq is inconsistent with the factors");
    return std::max(tail, 0.0);
}

SpectralSplit spectral_split(const SvdFactors& f, std::size_t k, double total_frob_sq) {
    SpectralSplit s;
    s.tail_norm_k = tail_norm(f, k, total_frob_sq);
    if (s.tail_norm_k == 0.0) {
        s.m = f.rank;
        s.tail_norm_m = 0.0;
        return s;
    }
    const double threshold = s.tail_norm_k / static_cast<double>(k);
    std::size_t m = 0;
    while (m < f.rank) {
        const double sg = f.sigma(static_cast<Eigen::Index>(m));
        if (sg * sg < threshold) break;
        ++m;
    }
    s.m = m;
    s.tail_norm_m = m == 0 ? std::max(0.0, total_frob_sq) : tail_norm(f, m, total_frob_sq);
    return s;
}

double orthonormality_defect(const Eigen::MatrixXd& z) {
    if (z.cols() == 0) return 0.0;
    const Eigen::MatrixXd g = z.transpose() * z;
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

Eigen::VectorXd project(const Eigen::MatrixXd& z, const SparseVector& a) {
    Eigen::VectorXd out(z.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j)
        out(j) = a.dot({z.col(j).data(), static_cast<std::size_t>(z.rows())});
    return out;
}

double project_residual(const ColumnMatrix& a, const Eigen::MatrixXd& z) {
    if (static_cast<std::size_t>(z.rows()) != a.rows())
        throw DimensionError("project_residual: basis has wrong row count");
    if (orthonormality_defect(z) > 1e-8)
        throw ParameterError("project_residual: basis columns are not orthonormal");
    double captured = 0.0;
    for (const auto& c : a.columns()) captured += project(z, c).squaredNorm();
    return std::max(0.0, a.frobenius_sq() - captured);
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m) {
    if (m.cols() == 0 || m.rows() == 0) return Eigen::MatrixXd(m.rows(), 0);
    if (m.isZero(0.0)) return Eigen::MatrixXd(m.rows(), 0);
    return svd(m, SvdVectors::left_only).U;
}

Eigen::MatrixXd extend_basis(const Eigen::MatrixXd& q, std::size_t cols) {
    const Eigen::Index n = q.rows();
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(cols));
    Eigen::Index filled = std::min<Eigen::Index>(q.cols(), static_cast<Eigen::Index>(cols));
    out.leftCols(filled) = q.leftCols(filled);
    for (Eigen::Index e = 0; e < n && filled < static_cast<Eigen::Index>(cols); ++e) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(n, e);
        // Two passes of Gram-Schmidt against everything accepted so far.
        for (int pass = 0; pass < 2; ++pass)
            v -= out.leftCols(filled) * (out.leftCols(filled).transpose() * v);
        const double norm = v.norm();
        if (norm > 1e-6) out.col(filled++) = v / norm;
    }
    if (filled < static_cast<Eigen::Index>(cols))
        throw DimensionError("extend_basis: cannot exceed the ambient dimension");
    return out;
}

SymmetricEigen eigh_descending(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    SymmetricEigen out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    return out;
}

}  // namespace ridgetap

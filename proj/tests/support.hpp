#pragma once

// Shared fixtures and dense oracles for the unit tests. Oracles go through
// explicit dense solves / eigendecompositions, not the library's factored paths.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ridgetap/rng.hpp"
#include "ridgetap/sparse.hpp"

namespace support {

using ridgetap::ColumnMatrix;

/// The fixed 5x8 integer matrix whose derived values were frozen from numpy.
inline Eigen::MatrixXd fixture_f() {
    Eigen::MatrixXd f(5, 8);
    f << 2, 0, 1, -1, 3, 0, 1, 2,
         1, 3, 0, 2, -1, 1, 0, 1,
         0, 1, 2, 0, 1, -2, 3, 0,
         -1, 2, 1, 1, 0, 1, -1, 2,
         3, 0, -2, 1, 2, 0, 1, -1;
    return f;
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    ridgetap::Philox rng = ridgetap::make_rng(seed, "test-gaussian");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

/// Gaussian entries kept with probability `density`.
inline Eigen::MatrixXd sparse_gaussian(Eigen::Index rows, Eigen::Index cols, double density,
                                       std::uint64_t seed) {
    ridgetap::Philox rng = ridgetap::make_rng(seed, "test-sparse");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            if (rng.uniform() < density) m(i, j) = rng.normal();
    return m;
}

/// Planted rank-r signal plus scaled Gaussian noise.
inline Eigen::MatrixXd low_rank_plus_noise(Eigen::Index rows, Eigen::Index cols, Eigen::Index rank,
                                           double noise, std::uint64_t seed) {
    const Eigen::MatrixXd l = gaussian(rows, rank, seed * 3 + 1);
    const Eigen::MatrixXd r = gaussian(rank, cols, seed * 3 + 2);
    return l * r + noise * gaussian(rows, cols, seed * 3 + 3);
}

inline double tail_oracle(const Eigen::MatrixXd& a, std::size_t k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a * a.transpose());
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    double t = 0.0;
    for (Eigen::Index i = static_cast<Eigen::Index>(k); i < ev.size(); ++i) t += std::max(0.0, ev(i));
    return t;
}

/// a_i^T (M M^T + lambda I)^+ a_i by a dense complete orthogonal decomposition.
inline std::vector<double> ridge_oracle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& m,
                                        double lambda) {
    const Eigen::MatrixXd g = m * m.transpose() + lambda * Eigen::MatrixXd::Identity(m.rows(), m.rows());
    const Eigen::MatrixXd pinv = g.completeOrthogonalDecomposition().pseudoInverse();
    std::vector<double> out(static_cast<std::size_t>(a.cols()));
    for (Eigen::Index i = 0; i < a.cols(); ++i) out[static_cast<std::size_t>(i)] = a.col(i).dot(pinv * a.col(i));
    return out;
}

inline std::vector<double> exact_oracle(const Eigen::MatrixXd& a, std::size_t k) {
    return ridge_oracle(a, a, tail_oracle(a, k) / static_cast<double>(k));
}

inline double min_eig(const Eigen::MatrixXd& sym) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

/// Wilson score interval for a binomial proportion, z standard deviations wide.
inline std::pair<double, double> wilson(double successes, double trials, double z = 3.0) {
    const double p = successes / trials;
    const double denom = 1.0 + z * z / trials;
    const double centre = (p + z * z / (2.0 * trials)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom;
    return {centre - half, centre + half};
}

}  // namespace support

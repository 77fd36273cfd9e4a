#include <cstdlib>

#include "doctest.h"
#include "ridgetap/error.hpp"
#include "ridgetap/linalg.hpp"
#include "support.hpp"

using namespace ridgetap;

namespace {

// numpy singular values of the fixture
const double kSigma[] = {5.69974125525248, 5.017911094539027, 4.402715160294789, 3.3310826513289307,
                         0.9238535911067751};
const double kTail[] = {56.51294962317288, 31.333517870475028, 11.949617087785462, 0.8535054578008844, 0.0};

}  // namespace

TEST_CASE("svd of diag(3,2,1)") {
    const Eigen::MatrixXd d = Eigen::Vector3d(3, 2, 1).asDiagonal();
    const SvdFactors f = svd(ColumnMatrix::from_dense(d));
    CHECK(f.rank == 3);
    CHECK(f.sigma(0) == doctest::Approx(3).epsilon(1e-14));
    CHECK(f.sigma(1) == doctest::Approx(2).epsilon(1e-14));
    CHECK(f.sigma(2) == doctest::Approx(1).epsilon(1e-14));
    CHECK((f.U.cwiseAbs() - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
    CHECK((f.V.cwiseAbs() - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("svd of a unit outer product has rank one") {
    const Eigen::Vector4d u = Eigen::Vector4d(1, 2, 0, -1).normalized();
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(6, -1, 1).normalized();
    const SvdFactors f = svd(ColumnMatrix::from_dense(u * v.transpose()));
    CHECK(f.rank == 1);
    CHECK(f.sigma(0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("svd of the fixture matches numpy") {
    const SvdFactors f = svd(ColumnMatrix::from_dense(support::fixture_f()));
    REQUIRE(f.rank == 5);
    for (int i = 0; i < 5; ++i) CHECK(f.sigma(i) == doctest::Approx(kSigma[i]).epsilon(1e-13));
    CHECK((f.reconstruct() - support::fixture_f()).norm() <= 1e-12 * std::sqrt(89.0));
}

TEST_CASE("random sparse 10x20 reconstruction and Gram-eigen agreement") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(10, 20);
    Philox rng = make_rng(11, "svd-test");
    for (int placed = 0; placed < 40;) {
        const auto i = static_cast<Eigen::Index>(rng.below(10));
        const auto j = static_cast<Eigen::Index>(rng.below(20));
        if (d(i, j) != 0.0) continue;
        d(i, j) = rng.normal();
        ++placed;
    }
    const SvdFactors f = svd(ColumnMatrix::from_dense(d));
    CHECK((f.reconstruct() - d).norm() <= 1e-10 * d.norm());
    CHECK(orthonormality_defect(f.U) < 1e-8);
    CHECK(orthonormality_defect(f.V) < 1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d * d.transpose());
    const Eigen::VectorXd ev = es.eigenvalues().reverse();
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(f.rank); ++i)
        CHECK(f.sigma(i) * f.sigma(i) == doctest::Approx(ev(i)).epsilon(1e-10));
}

TEST_CASE("wide sparse input takes the Gram route without losing accuracy") {
    const Eigen::MatrixXd d = support::sparse_gaussian(6, 40, 0.3, 12);
    setenv("RIDGETAP_DENSE_LIMIT", "10", 1);
    const SvdFactors wide = svd(ColumnMatrix::from_dense(d));
    unsetenv("RIDGETAP_DENSE_LIMIT");
    const SvdFactors ref = svd(ColumnMatrix::from_dense(d));
    REQUIRE(wide.rank == ref.rank);
    CHECK((wide.sigma - ref.sigma).norm() <= 1e-10 * ref.sigma(0));
    CHECK((wide.reconstruct() - d).norm() <= 1e-10 * d.norm());
}

TEST_CASE("dense limit guard") {
    setenv("RIDGETAP_DENSE_LIMIT", "5", 1);
    CHECK(dense_svd_limit() == 5);
    CHECK_THROWS_AS(svd(ColumnMatrix::from_dense(support::gaussian(8, 9, 1))), DenseLimitError);
    CHECK_NOTHROW(svd(ColumnMatrix::from_dense(support::gaussian(4, 9, 1))));
    unsetenv("RIDGETAP_DENSE_LIMIT");
    CHECK(dense_svd_limit() == 4096);
    CHECK_THROWS_AS(svd(ColumnMatrix(3)), DimensionError);
}

TEST_CASE("tail_norm examples and properties") {
    const Eigen::MatrixXd d = Eigen::Vector3d(3, 2, 1).asDiagonal();
    const SvdFactors f = svd(ColumnMatrix::from_dense(d));
    CHECK(tail_norm(f, 1, 14.0) == doctest::Approx(5.0));
    CHECK(tail_norm(f, 3, 14.0) == 0.0);
    CHECK(tail_norm(f, 7, 14.0) == 0.0);
    CHECK_THROWS_AS(tail_norm(f, 0, 14.0), ParameterError);
    CHECK_THROWS_AS(tail_norm(f, 1, 8.0), NumericalError);

    const SvdFactors g = svd(ColumnMatrix::from_dense(support::fixture_f()));
    for (std::size_t k = 1; k <= 5; ++k)
        CHECK(tail_norm(g, k, 89.0) == doctest::Approx(kTail[k - 1]).epsilon(1e-12).scale(89.0));

    const Eigen::MatrixXd r = support::gaussian(8, 12, 3);
    const SvdFactors h = svd(ColumnMatrix::from_dense(r));
    const double frob = r.squaredNorm();
    double prev = frob;
    for (std::size_t k = 1; k <= 8; ++k) {
        const double t = tail_norm(h, k, frob);
        CHECK(t <= prev + 1e-12);
        CHECK(t == doctest::Approx(support::tail_oracle(r, k)).epsilon(1e-9).scale(frob));
        CHECK(t + h.sigma.head(static_cast<Eigen::Index>(k)).squaredNorm() ==
              doctest::Approx(frob).epsilon(1e-9));
        prev = t;
    }
}

TEST_CASE("spectral_split examples") {
    const SvdFactors d = svd(ColumnMatrix::from_dense(Eigen::Vector3d(3, 2, 1).asDiagonal()));
    CHECK(spectral_split(d, 1, 14.0).m == 1);
    CHECK(spectral_split(d, 1, 14.0).tail_norm_k == doctest::Approx(5.0));
    const SvdFactors id = svd(ColumnMatrix::identity(4));
    CHECK(spectral_split(id, 2, 4.0).m == 4);
    const SpectralSplit zero = spectral_split(id, 4, 4.0);
    CHECK(zero.m == 4);
    CHECK(zero.tail_norm_m == 0.0);

    const SvdFactors f = svd(ColumnMatrix::from_dense(support::fixture_f()));
    CHECK(spectral_split(f, 1, 89.0).m == 0);
    CHECK(spectral_split(f, 2, 89.0).m == 3);
    CHECK(spectral_split(f, 3, 89.0).m == 4);
    CHECK(spectral_split(f, 2, 89.0).tail_norm_m == doctest::Approx(kTail[2]).epsilon(1e-12));
}

TEST_CASE("spectral_split m never exceeds 2k") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        Philox rng = make_rng(seed, "split-shape");
        const auto n = static_cast<Eigen::Index>(2 + rng.below(12));
        const auto dcols = static_cast<Eigen::Index>(2 + rng.below(20));
        const std::size_t k = 1 + rng.below(static_cast<std::uint64_t>(std::min(n, dcols)));
        Eigen::MatrixXd a = support::gaussian(n, dcols, seed);
        // skew the spectrum so both small and large m occur
        for (Eigen::Index i = 0; i < n; ++i) a.row(i) *= std::pow(0.5, static_cast<double>(i % 5));
        const SvdFactors f = svd(ColumnMatrix::from_dense(a));
        const SpectralSplit s = spectral_split(f, k, a.squaredNorm());
        CHECK(s.m <= 2 * k);
        CHECK(s.tail_norm_k >= 0.0);
        CHECK(s.tail_norm_m >= 0.0);
        if (s.m >= k) CHECK(s.tail_norm_m <= s.tail_norm_k + 1e-12 * a.squaredNorm());
    }
}

TEST_CASE("project_residual examples") {
    const Eigen::MatrixXd fd = support::fixture_f();
    const ColumnMatrix f = ColumnMatrix::from_dense(fd);
    Eigen::MatrixXd z(5, 2);
    z << 1, 0, 1, 0, 0, 1, 0, -1, 0, 0;
    z /= std::sqrt(2.0);
    CHECK(project_residual(f, z) == doctest::Approx(54.5).epsilon(1e-13));

    const SvdFactors s = svd(f);
    CHECK(project_residual(f, s.U.leftCols(2)) == doctest::Approx(kTail[1]).epsilon(1e-12));

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 3);
    a.topRows(2) = support::gaussian(2, 3, 4);
    Eigen::MatrixXd orth = Eigen::MatrixXd::Zero(4, 2);
    orth(2, 0) = 1;
    orth(3, 1) = 1;
    CHECK(project_residual(ColumnMatrix::from_dense(a), orth) == doctest::Approx(a.squaredNorm()));

    CHECK_THROWS_AS(project_residual(f, Eigen::MatrixXd::Ones(5, 1)), ParameterError);
}

TEST_CASE("project_residual matches the explicit residual and the SVD is optimal") {
    const Eigen::MatrixXd a = support::gaussian(6, 10, 21);
    const ColumnMatrix ca = ColumnMatrix::from_dense(a);
    const double best = project_residual(ca, svd(ca).U.leftCols(3));
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Eigen::MatrixXd z = orthonormal_basis(support::gaussian(6, 3, 1000 + seed));
        const double explicit_res = (a - z * z.transpose() * a).squaredNorm();
        CHECK(project_residual(ca, z) == doctest::Approx(explicit_res).epsilon(1e-10));
        CHECK(best <= project_residual(ca, z) + 1e-10);
    }
}

TEST_CASE("basis helpers") {
    Eigen::MatrixXd q(4, 1);
    q << 1, 1, 0, 0;
    q /= std::sqrt(2.0);
    const Eigen::MatrixXd e = extend_basis(q, 3);
    CHECK(e.cols() == 3);
    CHECK(orthonormality_defect(e) < 1e-12);
    CHECK((e.col(0) - q.col(0)).norm() < 1e-15);
    CHECK(orthonormal_basis(Eigen::MatrixXd::Ones(3, 4)).cols() == 1);
    const SymmetricEigen s = eigh_descending(Eigen::Vector3d(1, 3, 2).asDiagonal().toDenseMatrix());
    CHECK(s.values(0) == 3.0);
    CHECK(s.values(2) == 1.0);
}

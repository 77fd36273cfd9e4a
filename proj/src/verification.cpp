#include "ridgetap/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ridgetap/error.hpp"
#include "ridgetap/rng.hpp"

namespace ridgetap {
namespace {

// Absolute slack for quantities obtained as differences of Frobenius norms.
constexpr double kAbsSlack = 1e-10;

std::vector<double> flatten(const Eigen::MatrixXd& m) {
    return {m.data(), m.data() + m.size()};
}

void check_rows(const ReferenceSpectrum& ref, const ColumnMatrix& c) {
    if (static_cast<Eigen::Index>(c.rows()) != ref.gram.rows())
        throw DimensionError("sample C has " + std::to_string(c.rows()) + " rows, A has " +
                             std::to_string(ref.gram.rows()));
}

// ||M - Z Z^T M||_F^2 from the Gram matrix M M^T.
double projection_cost(const Eigen::MatrixXd& gram, double frob_sq, const Eigen::MatrixXd& z) {
    return frob_sq - (z.transpose() * gram * z).trace();
}

Eigen::MatrixXd random_projector_basis(std::size_t n, std::size_t k, Philox& rng) {
    Eigen::MatrixXd g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
}

// Visits every k-subset of {0..n-1} in lexicographic order.
template <typename F>
void for_each_subset(std::size_t n, std::size_t k, F&& f) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

ReferenceSpectrum prepare_reference(const ColumnMatrix& a, std::size_t k) {
    if (k < 1 || k > a.rows()) throw ParameterError("verification needs 1 <= k <= n");
    ReferenceSpectrum ref;
    ref.k = k;
    ref.frob_sq = a.frobenius_sq();
    ref.gram = a.gram_rows();
    if (ref.frob_sq > 0.0) {
        ref.factors = svd(a, SvdVectors::left_only);
        ref.top_sq = ref.factors.sigma(0) * ref.factors.sigma(0);
        ref.split = spectral_split(ref.factors, k, ref.frob_sq);
        ref.tail_k = ref.split.tail_norm_k;
    } else {
        ref.factors.U = Eigen::MatrixXd(static_cast<Eigen::Index>(a.rows()), 0);
    }
    return ref;
}

VerificationReport verify_spectral_am(const ReferenceSpectrum& ref, const ColumnMatrix& c,
                                      double eps) {
    check_rows(ref, c);
    const Eigen::MatrixXd cc = c.gram_rows();
    const auto n = ref.gram.rows();
    const double reg = eps / static_cast<double>(ref.k) * ref.tail_k;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const SymmetricEigen upper = eigh_descending((1.0 + eps) * cc + reg * id - ref.gram);
    const SymmetricEigen lower = eigh_descending(ref.gram + reg * id - (1.0 - eps) * cc);
    const double min_upper = upper.values(n - 1);
    const double min_lower = lower.values(n - 1);
    const double tol = 1e-8 * ref.top_sq;

    VerificationReport r;
    r.guarantee = Guarantee::spectral_am;
    r.tolerance_used = tol;
    r.bound = -tol;
    r.passed = min_upper >= -tol && min_lower >= -tol;
    r.witness_kind = "eigenvector";
    const bool upper_worse = min_upper <= min_lower;
    r.achieved = upper_worse ? min_upper : min_lower;
    r.witness = flatten(upper_worse ? Eigen::MatrixXd(upper.vectors.col(n - 1))
                                    : Eigen::MatrixXd(lower.vectors.col(n - 1)));
    r.details = {{"min_eig_upper", min_upper},
                 {"min_eig_lower", min_lower},
                 {"regularizer", reg},
                 {"top_sq", ref.top_sq}};
    return r;
}

VerificationReport verify_spectral_am(const ColumnMatrix& a, const ColumnMatrix& c, std::size_t k,
                                      double eps) {
    return verify_spectral_am(prepare_reference(a, k), c, eps);
}

VerificationReport verify_pcp(const ReferenceSpectrum& ref, const ColumnMatrix& c, double eps,
                              std::size_t n_probes, std::uint64_t seed) {
    if (n_probes < 1) throw ParameterError("verify_pcp needs at least one random probe");
    check_rows(ref, c);
    const auto n = static_cast<std::size_t>(ref.gram.rows());
    const std::size_t k = ref.k;
    const Eigen::MatrixXd cc = c.gram_rows();
    const double frob_c = c.frobenius_sq();
    const double slack = kAbsSlack * std::max(ref.frob_sq, frob_c);
    constexpr double rel = 1e-8;

    VerificationReport r;
    r.guarantee = Guarantee::pcp;
    r.tolerance_used = rel;
    r.passed = true;
    r.witness_kind = "projector_basis";
    double worst_excess = -std::numeric_limits<double>::infinity();
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    std::size_t probes = 0;

    auto probe = [&](const Eigen::MatrixXd& z) {
        ++probes;
        const double cost_a = std::max(0.0, projection_cost(ref.gram, ref.frob_sq, z));
        const double cost_c = std::max(0.0, projection_cost(cc, frob_c, z));
        const double lo = (1.0 - eps) * cost_a * (1.0 - rel) - slack;
        const double hi = (1.0 + eps) * cost_a * (1.0 + rel) + slack;
        const double excess = std::max(lo - cost_c, cost_c - hi) / std::max(cost_a, slack);
        if (cost_a > slack) {
            min_ratio = std::min(min_ratio, cost_c / cost_a);
            max_ratio = std::max(max_ratio, cost_c / cost_a);
        }
        if (excess > worst_excess) {
            worst_excess = excess;
            r.achieved = cost_a > 0.0 ? cost_c / cost_a : (cost_c > slack ? HUGE_VAL : 1.0);
            r.witness = flatten(z);
        }
        if (cost_c < lo || cost_c > hi) r.passed = false;
    };

    const SymmetricEigen ea = eigh_descending(ref.gram);
    const SymmetricEigen ec = eigh_descending(cc);
    probe(ea.vectors.leftCols(static_cast<Eigen::Index>(k)));
    probe(ec.vectors.leftCols(static_cast<Eigen::Index>(k)));
    Philox rng = make_rng(seed, "pcp-probes", n, k);
    for (std::size_t p = 0; p < n_probes; ++p) probe(random_projector_basis(n, k, rng));
    if (n <= 12) {
        for_each_subset(n, k, [&](const std::vector<std::size_t>& idx) {
            Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
            for (std::size_t j = 0; j < k; ++j)
                z.col(static_cast<Eigen::Index>(j)) = ea.vectors.col(static_cast<Eigen::Index>(idx[j]));
            probe(z);
        });
    }
    r.bound = 1.0 + eps;
    r.details = {{"eps", eps},
                 {"probes", static_cast<double>(probes)},
                 {"min_ratio", min_ratio},
                 {"max_ratio", max_ratio},
                 {"worst_excess", worst_excess}};
    return r;
}

VerificationReport verify_pcp(const ColumnMatrix& a, const ColumnMatrix& c, std::size_t k,
                              double eps, std::size_t n_probes, std::uint64_t seed) {
    return verify_pcp(prepare_reference(a, k), c, eps, n_probes, seed);
}

VerificationReport verify_css(const ReferenceSpectrum& ref, const ColumnMatrix& c, double eps) {
    check_rows(ref, c);
    double captured = 0.0;
    Eigen::MatrixXd q;
    if (c.cols() > 0 && c.frobenius_sq() > 0.0) {
        q = orthonormal_basis(c.to_dense());
        const SymmetricEigen e = eigh_descending(q.transpose() * ref.gram * q);
        const auto take = std::min<Eigen::Index>(static_cast<Eigen::Index>(ref.k), e.values.size());
        captured = e.values.head(take).sum();
    }
    const double error = std::max(0.0, ref.frob_sq - captured);
    const double slack = kAbsSlack * ref.frob_sq;
    VerificationReport r;
    r.guarantee = Guarantee::css;
    r.tolerance_used = 1e-9;
    r.achieved = error;
    r.bound = (1.0 + eps) * ref.tail_k * (1.0 + 1e-9) + slack;
    r.passed = error <= r.bound;
    r.witness_kind = "span_rank";
    r.witness = {static_cast<double>(q.cols())};
    r.details = {{"eps", eps},
                 {"tail_k", ref.tail_k},
                 {"error_ratio", ref.tail_k > 0.0 ? error / ref.tail_k : (error <= slack ? 1.0 : HUGE_VAL)},
                 {"span_rank", static_cast<double>(q.cols())}};
    return r;
}

VerificationReport verify_css(const ColumnMatrix& a, const ColumnMatrix& c, std::size_t k,
                              double eps) {
    return verify_css(prepare_reference(a, k), c, eps);
}

VerificationReport verify_trace_bound(const ReferenceSpectrum& ref, const ColumnMatrix& c,
                                      double eps) {
    check_rows(ref, c);
    const std::size_t m = ref.split.m;
    const Eigen::MatrixXd head = ref.factors.U.leftCols(static_cast<Eigen::Index>(m));
    double head_mass = 0.0;
    for (const auto& col : c.columns()) head_mass += project(head, col).squaredNorm();
    const double tail_c = std::max(0.0, c.frobenius_sq() - head_mass);
    const double tail_a = ref.split.tail_norm_m;
    const double gap = std::abs(tail_a - tail_c);
    VerificationReport r;
    r.guarantee = Guarantee::trace_bound;
    r.tolerance_used = kAbsSlack;
    r.achieved = gap;
    r.bound = eps * ref.tail_k + kAbsSlack * ref.frob_sq;
    r.passed = gap <= r.bound;
    r.witness_kind = "split_index";
    r.witness = {static_cast<double>(m)};
    r.details = {{"m", static_cast<double>(m)},
                 {"trace_a_tail", tail_a},
                 {"trace_c_tail", tail_c},
                 {"tail_k", ref.tail_k}};
    return r;
}

VerificationReport verify_trace_bound(const ColumnMatrix& a, const ColumnMatrix& c, std::size_t k,
                                      double eps) {
    return verify_trace_bound(prepare_reference(a, k), c, eps);
}

double error_ratio(const ReferenceSpectrum& ref, const ColumnMatrix& a, const Eigen::MatrixXd& z) {
    const double residual = project_residual(a, z);
    if (ref.tail_k <= 1e-12 * ref.frob_sq) return residual <= 1e-9 * ref.frob_sq ? 1.0 : HUGE_VAL;
    return residual / ref.tail_k;
}

Eigen::MatrixXd top_k_basis(const ColumnMatrix& c, std::size_t k) {
    Eigen::MatrixXd q(static_cast<Eigen::Index>(c.rows()), 0);
    if (c.cols() > 0 && c.frobenius_sq() > 0.0) {
        const SvdFactors f = svd(c, SvdVectors::left_only);
        q = f.U.leftCols(std::min<Eigen::Index>(static_cast<Eigen::Index>(k), f.U.cols()));
    }
    return static_cast<std::size_t>(q.cols()) == k ? q : extend_basis(q, k);
}

}  // namespace ridgetap

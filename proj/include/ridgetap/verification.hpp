#pragma once

// Oracles that certify sampling guarantees on a concrete sample C of A.

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "ridgetap/linalg.hpp"
#include "ridgetap/report.hpp"
#include "ridgetap/sparse.hpp"

namespace ridgetap {

/// Spectral data of A shared by all checks (A A^T, its SVD, tail norms).
struct ReferenceSpectrum {
    std::size_t k = 0;
    double frob_sq = 0.0;
    double top_sq = 0.0;  ///< ||A||_2^2
    double tail_k = 0.0;  ///< ||A - A_k||_F^2
    Eigen::MatrixXd gram;  ///< A A^T
    SvdFactors factors;
    SpectralSplit split;
};

ReferenceSpectrum prepare_reference(const ColumnMatrix& a, std::size_t k);

/// (1-eps) CC^T - (eps/k) tail I <= AA^T <= (1+eps) CC^T + (eps/k) tail I,
/// each side checked by min-eigenvalue >= -1e-8 ||A||_2^2. The witness is the
/// eigenvector of the more violated side.
VerificationReport verify_spectral_am(const ReferenceSpectrum& ref, const ColumnMatrix& c, double eps);
VerificationReport verify_spectral_am(const ColumnMatrix& a, const ColumnMatrix& c, std::size_t k,
                                      double eps);

/// Projection-cost sandwich over a fixed probe set: A's optimal rank-k
/// projector, C's optimal rank-k projector, n_probes random rank-k projectors
/// and, for n <= 12, every k-subset of A's left singular basis.
VerificationReport verify_pcp(const ReferenceSpectrum& ref, const ColumnMatrix& c, double eps,
                              std::size_t n_probes, std::uint64_t seed = 0);
VerificationReport verify_pcp(const ColumnMatrix& a, const ColumnMatrix& c, std::size_t k,
                              double eps, std::size_t n_probes, std::uint64_t seed = 0);

/// ||A - (C C^+ A)_k||_F^2 <= (1+eps) ||A - A_k||_F^2.
VerificationReport verify_css(const ReferenceSpectrum& ref, const ColumnMatrix& c, double eps);
VerificationReport verify_css(const ColumnMatrix& a, const ColumnMatrix& c, std::size_t k, double eps);

/// | ||A_{\m}||_F^2 - ||P_{\m} C||_F^2 | <= eps ||A_{\k}||_F^2 for the head/tail split m.
VerificationReport verify_trace_bound(const ReferenceSpectrum& ref, const ColumnMatrix& c, double eps);
VerificationReport verify_trace_bound(const ColumnMatrix& a, const ColumnMatrix& c, std::size_t k,
                                      double eps);

/// ||A - Z Z^T A||_F^2 / ||A - A_k||_F^2, with 0/0 read as 1.
double error_ratio(const ReferenceSpectrum& ref, const ColumnMatrix& a, const Eigen::MatrixXd& z);

/// Top-k left singular vectors of C, padded with standard basis directions when rank(C) < k.
Eigen::MatrixXd top_k_basis(const ColumnMatrix& c, std::size_t k);

}  // namespace ridgetap

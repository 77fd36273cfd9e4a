#include "ridgetap/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>
#define RIDGETAP_HAVE_NEON_TU 1
#endif

namespace ridgetap::kernels {

#if RIDGETAP_HAVE_NEON_TU
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_neon(const double* a, std::size_t n) { return dot_neon(a, a, n); }

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

// No gather instruction on NEON; two independent accumulators still help.
double gather_dot_neon(const double* dense, const std::uint32_t* idx, const double* val,
                       std::size_t nnz) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= nnz; i += 2) {
        const double g[2] = {dense[idx[i]], dense[idx[i + 1]]};
        acc = vfmaq_f64(acc, vld1q_f64(g), vld1q_f64(val + i));
    }
    double s = vaddvq_f64(acc);
    for (; i < nnz; ++i) s += dense[idx[i]] * val[i];
    return s;
}

constexpr KernelTable kNeon{Isa::neon, dot_neon, sum_sq_neon, axpy_neon, gather_dot_neon};

}  // namespace

const KernelTable* neon_table() noexcept { return &kNeon; }
#else
const KernelTable* neon_table() noexcept { return nullptr; }
#endif

}  // namespace ridgetap::kernels

#include "ridgetap/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define RIDGETAP_HAVE_AVX2_TU 1
#endif

namespace ridgetap::kernels {

#if RIDGETAP_HAVE_AVX2_TU
namespace {

#define RT_AVX2 __attribute__((target("avx2,fma")))

RT_AVX2 inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

RT_AVX2 double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

RT_AVX2 double sum_sq_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

RT_AVX2 void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

RT_AVX2 double gather_dot_avx2(const double* dense, const std::uint32_t* idx, const double* val,
                               std::size_t nnz) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= nnz; i += 4) {
        const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + i));
        // Indices are < 2^31 for any matrix we can hold, so the signed gather is safe.
        const __m256d g = _mm256_i32gather_pd(dense, vi, 8);
        acc = _mm256_fmadd_pd(g, _mm256_loadu_pd(val + i), acc);
    }
    double s = hsum(acc);
    for (; i < nnz; ++i) s += dense[idx[i]] * val[i];
    return s;
}

constexpr KernelTable kAvx2{Isa::avx2, dot_avx2, sum_sq_avx2, axpy_avx2, gather_dot_avx2};

}  // namespace

const KernelTable* avx2_table() noexcept {
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2;
    return nullptr;
}
#else
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

}  // namespace ridgetap::kernels

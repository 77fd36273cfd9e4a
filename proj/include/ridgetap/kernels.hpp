#pragma once

// Data-parallel inner loops shared by the scoring, sketching and verification
// code. Each kernel has a scalar reference implementation plus SIMD variants;
// the variant is selected once at startup from the CPU features (override with
// RIDGETAP_SIMD=scalar|avx2|neon).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace ridgetap::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

/// Function table for one instruction set.
struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum_sq)(const double* a, std::size_t n);
    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// sum_i dense[idx[i]] * val[i]
    double (*gather_dot)(const double* dense, const std::uint32_t* idx, const double* val,
                         std::size_t nnz);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

/// The table chosen for this process.
const KernelTable& active() noexcept;

/// Force a variant (tests and benchmarks). Returns false if unavailable.
bool select(Isa isa) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    return active().dot(a.data(), b.data(), a.size());
}

inline double sum_sq(std::span<const double> a) noexcept {
    return active().sum_sq(a.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double gather_dot(std::span<const double> dense, std::span<const std::uint32_t> idx,
                         std::span<const double> val) noexcept {
    return active().gather_dot(dense.data(), idx.data(), val.data(), idx.size());
}

}  // namespace ridgetap::kernels

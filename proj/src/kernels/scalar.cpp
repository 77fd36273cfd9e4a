#include "ridgetap/kernels.hpp"

namespace ridgetap::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double gather_dot_scalar(const double* dense, const std::uint32_t* idx, const double* val,
                         std::size_t nnz) {
    double s = 0.0;
    for (std::size_t i = 0; i < nnz; ++i) s += dense[idx[i]] * val[i];
    return s;
}

constexpr KernelTable kScalar{Isa::scalar, dot_scalar, sum_sq_scalar, axpy_scalar,
                              gather_dot_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace ridgetap::kernels

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "ridgetap/sparse.hpp"

namespace ridgetap {

/// A = M o (L diag(w) R^T + noise_scale G): L, R Gaussian with unit-norm
/// columns, w_i = sqrt(n d / r) so the planted part has unit RMS entries, G
/// standard Gaussian and M an i.i.d. Bernoulli(sparsity) mask. With
/// sparsity = 1 and noise_scale = 0 the rank is exactly signal_rank.
struct SyntheticSpec {
    std::size_t n = 20;
    std::size_t d = 200;
    std::size_t signal_rank = 3;
    double noise_scale = 0.1;
    double sparsity = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

ColumnMatrix generate(const SyntheticSpec& spec);

/// Parses `n=20,d=200,rank=3,noise=0.1,sparsity=0.5`; omitted keys keep their defaults.
SyntheticSpec parse_synthetic_spec(std::string_view s);

}  // namespace ridgetap

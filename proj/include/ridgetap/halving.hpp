#pragma once

// Repeated halving: estimate ridge scores of A from a recursively compressed
// uniform half, resample, and build a rank-k basis from the final sample.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "ridgetap/sampling.hpp"
#include "ridgetap/sparse.hpp"

namespace ridgetap {

enum class ScorePath { exact, jl_simple, jl_coarse };

std::string_view score_path_name(ScorePath p) noexcept;

struct RecursionConfig {
    std::size_t k = 1;
    double delta = 0.1;
    double theta = 1.0;     ///< coarse mode sketch_rows = ceil(1/theta), inflation d^theta
    bool coarse = false;    ///< enables the theta path above exact_limit
    double target_columns_constant = 10.0;
    double final_eps = 0.5;
    double oversample_c = 4.0;
    std::size_t exact_limit = 512;  ///< column counts up to this are scored exactly
    std::uint64_t seed = 0;
    bool audit = false;     ///< keep per-level matrices and scores in the trace

    void validate() const;
    /// Recursion bottoms out once a half has at most this many columns.
    double stop_size() const;
    /// Number of rh levels run on d columns.
    std::size_t expected_depth(std::size_t d) const;
};

/// Column subset of some original matrix, each column scaled.
struct SubMatrix {
    ColumnMatrix matrix;
    std::vector<std::size_t> sources;  ///< column of the original matrix
    std::vector<double> scales;
};

struct LevelTrace {
    std::size_t level = 0;  ///< 0 is the top call
    std::size_t columns_in = 0;
    std::size_t half_columns = 0;
    std::size_t reference_columns = 0;  ///< columns of the compressed half scores are taken against
    std::size_t columns_out = 0;
    std::size_t nnz_in = 0;
    std::size_t nnz_half = 0;
    std::size_t nnz_out = 0;
    ScorePath path = ScorePath::exact;
    std::size_t sketch_rows = 0;
    double score_inflation = 1.0;
    double delta_level = 0.0;
    double expected_out = 0.0;  ///< sum of inclusion probabilities
    double wall_ms = 0.0;

    // audit mode only
    std::vector<std::size_t> input_sources;  ///< unweighted columns of A fed to this level
    std::vector<double> scores;              ///< estimates for those columns
    SubMatrix output;
};

struct HalvingTrace {
    std::vector<LevelTrace> levels;  ///< ordered top level first
    std::size_t depth() const noexcept { return levels.size(); }
};

struct HalvingResult {
    ColumnSample sample;  ///< weighted columns of A
    HalvingTrace trace;
};

/// Keeps each column independently with probability 1/2, unweighted. The
/// stream is ("halve", level) of `seed`.
SubMatrix uniform_half(const ColumnMatrix& a, std::uint64_t seed, std::size_t level = 0);

HalvingResult repeated_halving(const ColumnMatrix& a, const RecursionConfig& cfg);

struct LowRankResult {
    Eigen::MatrixXd basis;  ///< n x k, orthonormal
    ColumnSample sample;    ///< final pcp sample the basis is taken from
    HalvingTrace trace;
    double tail_k = 0.0;    ///< ||A - A_k||_F^2 by full SVD
    double residual = 0.0;  ///< ||A - Z Z^T A||_F^2
    double error_ratio = 1.0;
    std::size_t rank_a = 0;
};

/// Halving for constant-factor scores, one with-replacement pcp resample at
/// final_eps, then the top-k left singular vectors of that sample.
LowRankResult low_rank_approx(const ColumnMatrix& a, const RecursionConfig& cfg);

nlohmann::ordered_json to_json(const HalvingTrace& t, bool with_timing = false);

}  // namespace ridgetap

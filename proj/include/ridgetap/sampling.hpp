#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ridgetap/ridge_scores.hpp"
#include "ridgetap/sparse.hpp"

namespace ridgetap {

enum class SamplingMode { with_replacement, independent_bernoulli };
enum class SamplingGoal { spectral, pcp, css };

std::string_view mode_name(SamplingMode m) noexcept;
std::string_view goal_name(SamplingGoal g) noexcept;

struct SamplingPlan {
    std::size_t k = 1;
    double eps = 0.5;
    double delta = 0.1;
    double oversample_c = 4.0;
    SamplingMode mode = SamplingMode::with_replacement;
    SamplingGoal goal = SamplingGoal::pcp;
    std::uint64_t seed = 0;

    /// Throws ParameterError for k < 1 or eps/delta outside (0,1) or c <= 0.
    void validate() const;
    /// c log(k/delta)/eps^2 for spectral/pcp; c (log k + log(1/delta)/eps) for css.
    double multiplier() const;
    /// ceil(multiplier() * score_sum).
    std::size_t draws(double score_sum) const;
};

struct SampleSlot {
    std::optional<std::size_t> source_index;  ///< column of A; nullopt for an empty slot
    double weight = 0.0;
    double probability = 0.0;  ///< probability in force when the slot was drawn
};

struct ColumnSample {
    std::vector<SampleSlot> slots;
    SamplingMode mode = SamplingMode::with_replacement;
    SamplingGoal goal = SamplingGoal::pcp;
    std::uint64_t seed = 0;

    std::size_t occupied() const noexcept;
    /// Sorted distinct source columns.
    std::vector<std::size_t> distinct_sources() const;
};

/// t i.i.d. draws with p_i = score_i / sum(score). +inf columns are included
/// once with weight 1 and probability 1; the draw count t is computed from the
/// finite scores. Throws ParameterError if no finite score is positive and no
/// column is forced.
ColumnSample sample_with_replacement(const ColumnMatrix& a, const RidgeScores& scores,
                                     const SamplingPlan& plan);

/// Each column kept independently with p_i = min{score_i * multiplier, 1} and
/// scaled by 1/sqrt(p_i) (weight 1 for the css goal).
ColumnSample sample_independent(const ColumnMatrix& a, const RidgeScores& scores,
                                const SamplingPlan& plan);

ColumnSample sample(const ColumnMatrix& a, const RidgeScores& scores, const SamplingPlan& plan);

/// The weighted matrix C (empty slots omitted).
ColumnMatrix materialize(const ColumnMatrix& a, const ColumnSample& s);

/// CSV `slot,source_index,weight,probability`; empty slots have an empty source_index.
void write_sample_csv(std::ostream& os, const ColumnSample& s);
ColumnSample read_sample_csv(std::istream& is);

}  // namespace ridgetap

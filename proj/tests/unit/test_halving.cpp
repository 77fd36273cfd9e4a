#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "ridgetap/error.hpp"
#include "ridgetap/halving.hpp"
#include "ridgetap/linalg.hpp"
#include "ridgetap/ridge_scores.hpp"
#include "ridgetap/verification.hpp"
#include "support.hpp"

using namespace ridgetap;

namespace {

RecursionConfig config(std::size_t k, std::uint64_t seed) {
    RecursionConfig c;
    c.k = k;
    c.seed = seed;
    return c;
}

ColumnMatrix columns_of(const ColumnMatrix& a, const std::vector<std::size_t>& which) {
    ColumnMatrix out(a.rows());
    for (std::size_t j : which) out.append(a.col(j));
    return out;
}

}  // namespace

TEST_CASE("uniform_half on one column keeps it half the time") {
    const ColumnMatrix a = ColumnMatrix::identity(1);
    const int trials = 10000;
    int kept = 0;
    for (int s = 0; s < trials; ++s) kept += static_cast<int>(uniform_half(a, static_cast<std::uint64_t>(s)).matrix.cols());
    CHECK(std::abs(kept / double(trials) - 0.5) <= 3.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("uniform_half is deterministic, unweighted and tracks sources") {
    const ColumnMatrix a = ColumnMatrix::from_dense(support::gaussian(4, 50, 1));
    const SubMatrix x = uniform_half(a, 5, 2);
    const SubMatrix y = uniform_half(a, 5, 2);
    CHECK(x.sources == y.sources);
    CHECK(x.sources != uniform_half(a, 5, 3).sources);
    CHECK(std::is_sorted(x.sources.begin(), x.sources.end()));
    for (std::size_t j = 0; j < x.sources.size(); ++j) {
        CHECK(x.scales[j] == 1.0);
        CHECK(x.matrix.col(j) == a.col(x.sources[j]));
    }
}

TEST_CASE("uniform_half on 1000 columns stays within [400, 600]") {
    const ColumnMatrix a = ColumnMatrix::from_dense(Eigen::MatrixXd::Ones(1, 1000));
    for (std::uint64_t s = 0; s < 200; ++s) {
        const std::size_t kept = uniform_half(a, s).matrix.cols();
        CHECK(kept >= 400);
        CHECK(kept <= 600);
    }
}

TEST_CASE("config arithmetic and validation") {
    RecursionConfig c = config(5, 0);
    CHECK(c.stop_size() == doctest::Approx(50.0 * std::log(5.0)));
    CHECK(c.expected_depth(4000) == 6);
    CHECK(c.expected_depth(10) == 1);
    CHECK(config(1, 0).stop_size() == doctest::Approx(10.0 * std::log(2.0)));
    c.theta = 0.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c.theta = 1.0;
    c.delta = 1.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c.delta = 0.1;
    c.final_eps = 0.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c.final_eps = 0.5;
    c.k = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    CHECK_THROWS_AS(repeated_halving(ColumnMatrix(3), config(1, 0)), DimensionError);
}

TEST_CASE("small inputs run a single exact level") {
    const ColumnMatrix a = ColumnMatrix::from_dense(support::gaussian(6, 40, 2));
    const HalvingResult r = repeated_halving(a, config(3, 1));
    REQUIRE(r.trace.depth() == 1);
    const LevelTrace& l = r.trace.levels[0];
    CHECK(l.path == ScorePath::exact);
    CHECK(l.reference_columns == l.half_columns);
    CHECK(l.columns_in == 40);
    CHECK(l.delta_level == doctest::Approx(0.1));
}

TEST_CASE("depth and score paths on a 50 x 4000 instance") {
    const ColumnMatrix a = ColumnMatrix::from_dense(support::low_rank_plus_noise(50, 4000, 5, 0.1, 3));
    RecursionConfig c = config(5, 7);
    const HalvingResult r = repeated_halving(a, c);
    CHECK(r.trace.depth() == c.expected_depth(4000));
    CHECK(r.trace.depth() <= static_cast<std::size_t>(std::ceil(std::log2(4000.0 / c.stop_size()))) + 1);
    for (std::size_t i = 0; i < r.trace.depth(); ++i) {
        const LevelTrace& l = r.trace.levels[i];
        CHECK(l.level == i);
        CHECK(l.delta_level == doctest::Approx(0.1 / 6.0));
        // 48 ln(2d/delta) rows would exceed n = 50, so every level is exact
        CHECK(l.path == ScorePath::exact);
        if (i + 1 < r.trace.depth()) {
            CHECK(r.trace.levels[i + 1].columns_in == l.half_columns);
            CHECK(l.reference_columns == r.trace.levels[i + 1].columns_out);
        }
    }
    const std::size_t out = r.sample.slots.size();
    CHECK(static_cast<double>(out) <= 2.0 * r.trace.levels[0].expected_out + 10.0);
    CHECK(verify_spectral_am(a, materialize(a, r.sample), 5, 0.5).passed);
}

TEST_CASE("simple JL path engages when the sketch is shorter than n") {
    const ColumnMatrix a = ColumnMatrix::from_dense(support::low_rank_plus_noise(700, 800, 3, 0.1, 4));
    RecursionConfig c = config(3, 2);
    const HalvingResult r = repeated_halving(a, c);
    const LevelTrace& top = r.trace.levels[0];
    CHECK(top.path == ScorePath::jl_simple);
    CHECK(top.score_inflation == 2.0);
    CHECK(top.sketch_rows ==
          static_cast<std::size_t>(std::ceil(48.0 * std::log(2.0 * 800 / top.delta_level))));
    CHECK(top.sketch_rows < 700);
    for (std::size_t i = 1; i < r.trace.depth(); ++i) CHECK(r.trace.levels[i].path == ScorePath::exact);
}

TEST_CASE("every level is built from rescaled columns of A") {
    const Eigen::MatrixXd d = support::sparse_gaussian(30, 1200, 0.05, 8);
    const ColumnMatrix a = ColumnMatrix::from_dense(d);
    RecursionConfig c = config(3, 3);
    c.audit = true;
    const HalvingResult r = repeated_halving(a, c);
    for (const LevelTrace& l : r.trace.levels) {
        CHECK(l.input_sources.size() == l.columns_in);
        const std::set<std::size_t> in(l.input_sources.begin(), l.input_sources.end());
        CHECK(in.size() == l.input_sources.size());
        CHECK(l.output.matrix.cols() == l.columns_out);
        CHECK(l.output.matrix.nnz() <= a.nnz());
        CHECK(l.nnz_in <= a.nnz());
        for (std::size_t j = 0; j < l.output.sources.size(); ++j) {
            const std::size_t src = l.output.sources[j];
            CHECK(in.count(src) == 1);
            CHECK(l.output.scales[j] >= 1.0);
            CHECK(l.output.matrix.col(j) == a.col(src).scaled(l.output.scales[j]));
        }
    }
    for (const auto& slot : r.sample.slots) CHECK(*slot.source_index < a.cols());
}

TEST_CASE("nnz is roughly halved at each level") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ColumnMatrix a = ColumnMatrix::from_dense(support::sparse_gaussian(40, 2000, 0.1, 20 + seed));
        const HalvingResult r = repeated_halving(a, config(2, seed));
        for (const LevelTrace& l : r.trace.levels) {
            if (l.columns_in < 200) continue;
            const double frac = static_cast<double>(l.nnz_half) / static_cast<double>(l.nnz_in);
            CHECK(frac >= 0.35);
            CHECK(frac <= 0.65);
        }
    }
}

TEST_CASE("level scores overestimate the parent's exact scores up to the constant-factor slack") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ColumnMatrix a = ColumnMatrix::from_dense(support::low_rank_plus_noise(10, 300, 2, 0.2, 40 + seed));
        RecursionConfig c = config(2, seed);
        c.audit = true;
        const HalvingResult r = repeated_halving(a, c);
        REQUIRE(r.trace.depth() >= 2);
        for (const LevelTrace& l : r.trace.levels) {
            const RidgeScores ex = exact_ridge_scores(columns_of(a, l.input_sources), 2);
            for (std::size_t i = 0; i < ex.size(); ++i) CHECK(l.scores[i] >= ex.scores[i] / 3.0 - 1e-8);
            double expected = 0.0;
            const double mult = c.oversample_c * std::log(2.0 / l.delta_level);
            for (double s : l.scores) expected += std::min(1.0, s * mult);
            CHECK(l.expected_out == doctest::Approx(expected));
            // sum of scores is at most (1 + 4 * 1/2) * 2k
            CHECK(l.expected_out <= 3.0 * 2.0 * 2.0 * mult);
        }
    }
}

TEST_CASE("halving output is a constant-factor spectral approximation") {
    int passed = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ColumnMatrix a = ColumnMatrix::from_dense(support::low_rank_plus_noise(20, 600, 3, 0.1, 60 + seed));
        const HalvingResult r = repeated_halving(a, config(3, seed));
        passed += verify_spectral_am(a, materialize(a, r.sample), 3, 0.5).passed;
    }
    CHECK(passed >= 18);
}

TEST_CASE("low_rank_approx edge cases") {
    const Eigen::MatrixXd exact = support::gaussian(12, 3, 1) * support::gaussian(3, 200, 2);
    const LowRankResult r = low_rank_approx(ColumnMatrix::from_dense(exact), config(3, 4));
    CHECK(r.rank_a == 3);
    CHECK(r.error_ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(orthonormality_defect(r.basis) < 1e-10);

    const LowRankResult id = low_rank_approx(ColumnMatrix::identity(30), config(1, 5));
    CHECK(id.error_ratio <= 1.5);
    CHECK(id.error_ratio >= 1.0 - 1e-12);

    const Eigen::MatrixXd thin = support::gaussian(8, 1, 3) * support::gaussian(1, 100, 4);
    const LowRankResult d = low_rank_approx(ColumnMatrix::from_dense(thin), config(3, 6));
    CHECK(d.rank_a == 1);
    CHECK(d.basis.cols() == 3);
    CHECK(orthonormality_defect(d.basis) < 1e-10);
    CHECK(d.error_ratio == 1.0);

    CHECK_THROWS_AS(low_rank_approx(ColumnMatrix::identity(2), config(3, 0)), ParameterError);
}

TEST_CASE("low_rank_approx meets the error target on most seeds") {
    int passed = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ColumnMatrix a = ColumnMatrix::from_dense(support::low_rank_plus_noise(30, 800, 4, 0.1, 80 + seed));
        const LowRankResult r = low_rank_approx(a, config(4, seed));
        CHECK(orthonormality_defect(r.basis) < 1e-10);
        CHECK(r.residual == doctest::Approx(project_residual(a, r.basis)));
        passed += r.error_ratio <= 1.5;
    }
    CHECK(passed >= 9);
}

TEST_CASE("coarse mode sketches, inflates and reduces") {
    int passed = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ColumnMatrix a = ColumnMatrix::from_dense(support::low_rank_plus_noise(20, 1000, 3, 0.1, 90 + seed));
        RecursionConfig c = config(3, seed);
        c.coarse = true;
        c.theta = 0.25;
        c.exact_limit = 200;
        const LowRankResult r = low_rank_approx(a, c);
        const LevelTrace& top = r.trace.levels[0];
        CHECK(top.path == ScorePath::jl_coarse);
        CHECK(top.sketch_rows == 4);
        CHECK(top.score_inflation == doctest::Approx(std::pow(1000.0, 0.25)));
        for (const LevelTrace& l : r.trace.levels)
            if (l.columns_in <= 200) CHECK(l.path == ScorePath::exact);
        passed += r.error_ratio <= 1.5;
    }
    CHECK(passed >= 9);
}

TEST_CASE("trace JSON is deterministic and omits timing by default") {
    const ColumnMatrix a = ColumnMatrix::from_dense(support::gaussian(8, 400, 9));
    const HalvingResult x = repeated_halving(a, config(2, 3));
    const HalvingResult y = repeated_halving(a, config(2, 3));
    CHECK(to_json(x.trace).dump() == to_json(y.trace).dump());
    CHECK(!to_json(x.trace)["levels"][0].contains("wall_ms"));
    CHECK(to_json(x.trace, true)["levels"][0].contains("wall_ms"));
    CHECK(to_json(x.trace)["depth"] == x.trace.depth());
}

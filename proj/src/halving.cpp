#include "ridgetap/halving.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "ridgetap/error.hpp"
#include "ridgetap/linalg.hpp"
#include "ridgetap/ridge_scores.hpp"
#include "ridgetap/rng.hpp"
#include "ridgetap/verification.hpp"

namespace ridgetap {
namespace {

struct Context {
    const ColumnMatrix& a;
    const RecursionConfig& cfg;
    double delta_level;
    HalvingTrace& trace;
};

SubMatrix identity_view(const ColumnMatrix& a) {
    SubMatrix s{a, {}, std::vector<double>(a.cols(), 1.0)};
    s.sources.resize(a.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) s.sources[i] = i;
    return s;
}

// Independent resample of `in` with p_i = min(1, score_i * mult), kept
// columns scaled by 1/sqrt(p_i). Sources and scales compose with `in`.
SubMatrix resample(const SubMatrix& in, const std::vector<double>& scores, double mult, Philox& rng,
                   double& expected) {
    SubMatrix out{ColumnMatrix(in.matrix.rows()), {}, {}};
    expected = 0.0;
    for (std::size_t i = 0; i < in.matrix.cols(); ++i) {
        const double p = std::min(1.0, scores[i] * mult);
        expected += p;
        const double u = rng.uniform();
        if (!(u < p)) continue;
        const double w = 1.0 / std::sqrt(p);
        out.matrix.append(in.matrix.col(i).scaled(w));
        out.sources.push_back(in.sources[i]);
        out.scales.push_back(in.scales[i] * w);
    }
    return out;
}

std::size_t jl_rows_simple(std::size_t d, double delta) {
    return static_cast<std::size_t>(std::ceil(48.0 * std::log(2.0 * static_cast<double>(d) / delta)));
}

// One call of the recursion on `in` (unweighted columns of A).
SubMatrix rh(const Context& ctx, const SubMatrix& in, std::size_t level) {
    const auto t0 = std::chrono::steady_clock::now();
    const RecursionConfig& cfg = ctx.cfg;
    const std::size_t slot = ctx.trace.levels.size();
    ctx.trace.levels.emplace_back();

    SubMatrix half = uniform_half(in.matrix, cfg.seed, level);
    for (auto& s : half.sources) s = in.sources[s];
    const std::size_t half_cols = half.matrix.cols();
    const std::size_t half_nnz = half.matrix.nnz();
    SubMatrix reference = static_cast<double>(half_cols) > cfg.stop_size()
                              ? rh(ctx, half, level + 1)
                              : std::move(half);

    const RidgeSolver solver = RidgeSolver::build(reference.matrix, cfg.k);
    const std::size_t d = in.matrix.cols();
    const std::size_t n = in.matrix.rows();
    ScorePath path = ScorePath::exact;
    std::size_t rows = 0;
    double inflation = 1.0;
    if (d > cfg.exact_limit) {
        if (cfg.coarse) {
            path = ScorePath::jl_coarse;
            rows = static_cast<std::size_t>(std::ceil(1.0 / cfg.theta));
            inflation = std::pow(static_cast<double>(d), cfg.theta);
        } else {
            rows = jl_rows_simple(d, ctx.delta_level);
            if (rows < n) {
                path = ScorePath::jl_simple;
                inflation = 2.0;
            }
        }
    }
    RidgeScores scores;
    if (path == ScorePath::exact) {
        scores = generalized_ridge_scores(in.matrix, solver);
        rows = 0;
    } else {
        Philox seeder = make_rng(cfg.seed, "halving-jl", level);
        scores = jl_ridge_scores(in.matrix, solver, rows, seeder());
        for (double& s : scores.scores) s *= inflation;
    }

    const double mult = cfg.oversample_c * std::log(static_cast<double>(cfg.k) / ctx.delta_level);
    Philox rng = make_rng(cfg.seed, "halving-resample", level);
    double expected = 0.0;
    SubMatrix out = resample(in, scores.scores, mult, rng, expected);
    if (path == ScorePath::jl_coarse && out.matrix.cols() > 0) {
        // The d^theta inflation leaves C' too large; reduce it by its own scores.
        const RidgeScores own = generalized_ridge_scores(out.matrix, out.matrix, cfg.k);
        Philox reduce = make_rng(cfg.seed, "halving-reduce", level);
        double reduced_expected = 0.0;
        out = resample(out, own.scores, mult, reduce, reduced_expected);
        expected = reduced_expected;
    }

    LevelTrace& lt = ctx.trace.levels[slot];
    lt.level = level;
    lt.columns_in = d;
    lt.half_columns = half_cols;
    lt.reference_columns = reference.matrix.cols();
    lt.columns_out = out.matrix.cols();
    lt.nnz_in = in.matrix.nnz();
    lt.nnz_half = half_nnz;
    lt.nnz_out = out.matrix.nnz();
    lt.path = path;
    lt.sketch_rows = rows;
    lt.score_inflation = inflation;
    lt.delta_level = ctx.delta_level;
    lt.expected_out = expected;
    if (cfg.audit) {
        lt.input_sources = in.sources;
        lt.scores = scores.scores;
        lt.output = out;
    }
    lt.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace

std::string_view score_path_name(ScorePath p) noexcept {
    switch (p) {
        case ScorePath::exact: return "exact";
        case ScorePath::jl_simple: return "jl_simple";
        case ScorePath::jl_coarse: return "jl_coarse";
    }
    return "unknown";
}

void RecursionConfig::validate() const {
    if (k < 1) throw ParameterError("k must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
    if (!(theta > 0.0 && theta <= 1.0)) throw ParameterError("theta must lie in (0, 1]");
    if (!(final_eps > 0.0 && final_eps < 1.0)) throw ParameterError("eps must lie in (0, 1)");
    if (!(oversample_c > 0.0) || !std::isfinite(oversample_c))
        throw ParameterError("c must be positive");
    if (!(target_columns_constant > 0.0)) throw ParameterError("stop constant must be positive");
}

double RecursionConfig::stop_size() const {
    return target_columns_constant * static_cast<double>(k) *
           std::log(static_cast<double>(std::max<std::size_t>(k, 2)));
}

std::size_t RecursionConfig::expected_depth(std::size_t d) const {
    const double ratio = static_cast<double>(d) / stop_size();
    if (ratio <= 1.0) return 1;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log2(ratio))));
}

SubMatrix uniform_half(const ColumnMatrix& a, std::uint64_t seed, std::size_t level) {
    Philox rng = make_rng(seed, "halve", level);
    SubMatrix out{ColumnMatrix(a.rows()), {}, {}};
    for (std::size_t i = 0; i < a.cols(); ++i) {
        if (!rng.bernoulli(0.5)) continue;
        out.matrix.append(a.col(i));
        out.sources.push_back(i);
        out.scales.push_back(1.0);
    }
    return out;
}

HalvingResult repeated_halving(const ColumnMatrix& a, const RecursionConfig& cfg) {
    cfg.validate();
    if (a.cols() == 0) throw DimensionError("repeated_halving: empty matrix");
    HalvingResult r;
    const Context ctx{a, cfg, cfg.delta / static_cast<double>(cfg.expected_depth(a.cols())), r.trace};
    const SubMatrix out = rh(ctx, identity_view(a), 0);
    r.sample.mode = SamplingMode::independent_bernoulli;
    r.sample.goal = SamplingGoal::spectral;
    r.sample.seed = cfg.seed;
    for (std::size_t j = 0; j < out.sources.size(); ++j) {
        const double w = out.scales[j];
        r.sample.slots.push_back({out.sources[j], w, 1.0 / (w * w)});
    }
    return r;
}

LowRankResult low_rank_approx(const ColumnMatrix& a, const RecursionConfig& cfg) {
    cfg.validate();
    if (cfg.k > a.rows()) throw ParameterError("k exceeds the row count");
    LowRankResult out;
    HalvingResult h = repeated_halving(a, cfg);
    out.trace = std::move(h.trace);
    const ColumnMatrix c = materialize(a, h.sample);

    // Scores w.r.t. a constant-factor sample are within a factor 2 of the
    // truth; doubling keeps them overestimates and exact scores never exceed 1.
    RidgeScores scores = generalized_ridge_scores(a, RidgeSolver::build(c, cfg.k));
    for (double& s : scores.scores) s = std::min(1.0, 2.0 * s);
    SamplingPlan plan;
    plan.k = cfg.k;
    plan.eps = cfg.final_eps;
    plan.delta = cfg.delta;
    plan.oversample_c = cfg.oversample_c;
    plan.mode = SamplingMode::with_replacement;
    plan.goal = SamplingGoal::pcp;
    plan.seed = cfg.seed;
    out.sample = sample_with_replacement(a, scores, plan);
    out.basis = top_k_basis(materialize(a, out.sample), cfg.k);

    const double frob = a.frobenius_sq();
    if (frob > 0.0) {
        const SvdFactors f = svd(a, SvdVectors::left_only);
        out.rank_a = f.rank;
        out.tail_k = tail_norm(f, cfg.k, frob);
        if (f.rank < cfg.k) out.basis = extend_basis(f.U, cfg.k);
    }
    out.residual = project_residual(a, out.basis);
    if (out.tail_k <= 1e-12 * frob)
        out.error_ratio = out.residual <= 1e-9 * frob ? 1.0 : HUGE_VAL;
    else
        out.error_ratio = out.residual / out.tail_k;
    return out;
}

nlohmann::ordered_json to_json(const HalvingTrace& t, bool with_timing) {
    nlohmann::ordered_json levels = nlohmann::ordered_json::array();
    for (const LevelTrace& l : t.levels) {
        nlohmann::ordered_json j;
        j["level"] = l.level;
        j["columns_in"] = l.columns_in;
        j["half_columns"] = l.half_columns;
        j["reference_columns"] = l.reference_columns;
        j["columns_out"] = l.columns_out;
        j["nnz_in"] = l.nnz_in;
        j["nnz_half"] = l.nnz_half;
        j["nnz_out"] = l.nnz_out;
        j["score_path"] = score_path_name(l.path);
        j["sketch_rows"] = l.sketch_rows;
        j["score_inflation"] = l.score_inflation;
        j["delta_level"] = l.delta_level;
        j["expected_out"] = l.expected_out;
        if (with_timing) j["wall_ms"] = l.wall_ms;
        levels.push_back(std::move(j));
    }
    nlohmann::ordered_json j;
    j["depth"] = t.depth();
    j["levels"] = std::move(levels);
    return j;
}

}  // namespace ridgetap

#include "ridgetap/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "ridgetap/error.hpp"
#include "ridgetap/rng.hpp"
#include "text.hpp"

namespace ridgetap {

std::string_view mode_name(SamplingMode m) noexcept {
    return m == SamplingMode::with_replacement ? "with_replacement" : "independent_bernoulli";
}

std::string_view goal_name(SamplingGoal g) noexcept {
    switch (g) {
        case SamplingGoal::spectral: return "spectral";
        case SamplingGoal::pcp: return "pcp";
        case SamplingGoal::css: return "css";
    }
    return "unknown";
}

void SamplingPlan::validate() const {
    if (k < 1) throw ParameterError("k must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("eps must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
    if (!(oversample_c > 0.0)) throw ParameterError("oversample constant c must be positive");
}

double SamplingPlan::multiplier() const {
    const double kk = static_cast<double>(k);
    if (goal == SamplingGoal::css)
        return oversample_c * (std::log(kk) + std::log(1.0 / delta) / eps);
    return oversample_c * std::log(kk / delta) / (eps * eps);
}

std::size_t SamplingPlan::draws(double score_sum) const {
    return static_cast<std::size_t>(std::ceil(multiplier() * score_sum));
}

std::size_t ColumnSample::occupied() const noexcept {
    return static_cast<std::size_t>(std::count_if(
        slots.begin(), slots.end(), [](const SampleSlot& s) { return s.source_index.has_value(); }));
}

std::vector<std::size_t> ColumnSample::distinct_sources() const {
    std::set<std::size_t> seen;
    for (const auto& s : slots)
        if (s.source_index) seen.insert(*s.source_index);
    return {seen.begin(), seen.end()};
}

ColumnSample sample_with_replacement(const ColumnMatrix& a, const RidgeScores& scores,
                                     const SamplingPlan& plan) {
    plan.validate();
    if (scores.size() != a.cols()) throw DimensionError("score vector length differs from column count");
    ColumnSample out;
    out.mode = SamplingMode::with_replacement;
    out.goal = plan.goal;
    out.seed = plan.seed;

    // Prefix sums over finite scores in column order.
    std::vector<double> prefix(a.cols());
    double total = 0.0;
    std::vector<std::size_t> forced;
    for (std::size_t i = 0; i < a.cols(); ++i) {
        const double s = scores.scores[i];
        if (s < 0.0 || std::isnan(s)) throw ParameterError("scores must be nonnegative");
        if (std::isinf(s)) {
            forced.push_back(i);
        } else {
            total += s;
        }
        prefix[i] = total;
    }
    if (total <= 0.0 && forced.empty())
        throw ParameterError("cannot sample from an all-zero score vector");

    for (std::size_t i : forced) out.slots.push_back({i, 1.0, 1.0});
    if (total <= 0.0) return out;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < a.cols(); ++i)
        if (scores.scores[i] > 0.0 && !std::isinf(scores.scores[i])) last_positive = i;

    const std::size_t t = std::max<std::size_t>(1, plan.draws(total));
    Philox rng = make_rng(plan.seed, "with-replacement");
    out.slots.reserve(out.slots.size() + t);
    for (std::size_t draw = 0; draw < t; ++draw) {
        const double u = rng.uniform() * total;
        // First column whose prefix exceeds u; its score is positive and finite.
        const auto it = std::upper_bound(prefix.begin(), prefix.end(), u);
        const std::size_t i =
            it == prefix.end() ? last_positive : static_cast<std::size_t>(it - prefix.begin());
        const double p = scores.scores[i] / total;
        const double w = plan.goal == SamplingGoal::css
                             ? 1.0
                             : 1.0 / std::sqrt(static_cast<double>(t) * p);
        out.slots.push_back({i, w, p});
    }
    return out;
}

ColumnSample sample_independent(const ColumnMatrix& a, const RidgeScores& scores,
                                const SamplingPlan& plan) {
    plan.validate();
    if (scores.size() != a.cols()) throw DimensionError("score vector length differs from column count");
    ColumnSample out;
    out.mode = SamplingMode::independent_bernoulli;
    out.goal = plan.goal;
    out.seed = plan.seed;
    const double mult = plan.multiplier();
    Philox rng = make_rng(plan.seed, "independent");
    for (std::size_t i = 0; i < a.cols(); ++i) {
        const double s = scores.scores[i];
        if (s < 0.0 || std::isnan(s)) throw ParameterError("scores must be nonnegative");
        const double p = std::isinf(s) ? 1.0 : std::min(s * mult, 1.0);
        // One draw per column regardless of p keeps streams aligned across inputs.
        const double u = rng.uniform();
        if (p > 0.0 && u < p) {
            const double w = plan.goal == SamplingGoal::css ? 1.0 : 1.0 / std::sqrt(p);
            out.slots.push_back({i, w, p});
        }
    }
    return out;
}

ColumnSample sample(const ColumnMatrix& a, const RidgeScores& scores, const SamplingPlan& plan) {
    return plan.mode == SamplingMode::with_replacement ? sample_with_replacement(a, scores, plan)
                                                       : sample_independent(a, scores, plan);
}

ColumnMatrix materialize(const ColumnMatrix& a, const ColumnSample& s) {
    ColumnMatrix c(a.rows());
    for (const auto& slot : s.slots) {
        if (!slot.source_index) continue;
        if (*slot.source_index >= a.cols())
            throw DimensionError("sample references column " + std::to_string(*slot.source_index) +
                                 " but A has " + std::to_string(a.cols()));
        c.append(a.col(*slot.source_index).scaled(slot.weight));
    }
    return c;
}

using text::format_double;

void write_sample_csv(std::ostream& os, const ColumnSample& s) {
    os << "slot,source_index,weight,probability\n";
    for (std::size_t i = 0; i < s.slots.size(); ++i) {
        const auto& slot = s.slots[i];
        os << i << ',';
        if (slot.source_index) os << *slot.source_index;
        os << ',' << format_double(slot.weight) << ',' << format_double(slot.probability) << '\n';
    }
}

ColumnSample read_sample_csv(std::istream& is) {
    ColumnSample s;
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line != "slot,source_index,weight,probability")
                throw ParseError(lineno, "expected header 'slot,source_index,weight,probability'");
            continue;
        }
        const auto fields = text::split(line, ',');
        if (fields.size() != 4) throw ParseError(lineno, "expected 4 comma-separated fields");
        SampleSlot slot;
        if (!fields[1].empty()) {
            const auto src = text::parse_u64(fields[1]);
            if (!src) throw ParseError(lineno, "malformed source_index");
            slot.source_index = *src;
        }
        const auto w = text::parse_double(fields[2]);
        const auto p = text::parse_double(fields[3]);
        if (!w || !p) throw ParseError(lineno, "malformed number");
        slot.weight = *w;
        slot.probability = *p;
        s.slots.push_back(slot);
    }
    if (header) throw ParseError(lineno, "empty sample file");
    return s;
}

}  // namespace ridgetap

#include "ridgetap/synthetic.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ridgetap/error.hpp"
#include "ridgetap/rng.hpp"
#include "text.hpp"

namespace ridgetap {
namespace {

Eigen::MatrixXd unit_gaussian_columns(std::size_t rows, std::size_t cols, Philox& rng) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
        m.col(j).normalize();
    }
    return m;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (n < 1 || d < 1) throw ParameterError("synthetic matrix needs n, d >= 1");
    if (n > 0xffffffffu) throw ParameterError("n exceeds 2^32 - 1");
    if (signal_rank > std::min(n, d)) throw ParameterError("signal rank exceeds min(n, d)");
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
        throw ParameterError("noise scale must be finite and >= 0");
    if (!(sparsity > 0.0 && sparsity <= 1.0)) throw ParameterError("sparsity must lie in (0, 1]");
    if (signal_rank == 0 && noise_scale == 0.0) throw ParameterError("rank 0 without noise is the zero matrix");
    if (sparsity < 1.0 && sparsity * static_cast<double>(n) * static_cast<double>(d) <
                              static_cast<double>(signal_rank))
        throw ParameterError("sparsity too low to carry the planted rank");
}

ColumnMatrix generate(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t r = spec.signal_rank;
    Philox left_rng = make_rng(spec.seed, "gen-left");
    Philox right_rng = make_rng(spec.seed, "gen-right");
    const Eigen::MatrixXd left = unit_gaussian_columns(spec.n, r, left_rng);
    const Eigen::MatrixXd right = unit_gaussian_columns(spec.d, r, right_rng);
    const double w = r > 0 ? std::sqrt(static_cast<double>(spec.n) * static_cast<double>(spec.d) /
                                       static_cast<double>(r))
                           : 0.0;
    const Eigen::MatrixXd lw = left * w;
    ColumnMatrix a(spec.n);
    Eigen::VectorXd col(static_cast<Eigen::Index>(spec.n));
    for (std::size_t j = 0; j < spec.d; ++j) {
        Philox noise = make_rng(spec.seed, "gen-noise", j);
        Philox mask = make_rng(spec.seed, "gen-mask", j);
        col = r > 0 ? Eigen::VectorXd(lw * right.row(static_cast<Eigen::Index>(j)).transpose())
                    : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.n));
        SparseVector v(spec.n);
        for (std::size_t i = 0; i < spec.n; ++i) {
            const double g = spec.noise_scale > 0.0 ? spec.noise_scale * noise.normal() : 0.0;
            const bool keep = spec.sparsity >= 1.0 || mask.bernoulli(spec.sparsity);
            if (keep) v.push_back(static_cast<Index>(i), col(static_cast<Eigen::Index>(i)) + g);
        }
        a.append(std::move(v));
    }
    return a;
}

SyntheticSpec parse_synthetic_spec(std::string_view s) {
    SyntheticSpec spec;
    if (s.empty()) return spec;
    for (auto item : text::split(s, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw ParameterError("synthetic spec item '" + std::string(item) + "' is not key=value");
        const auto key = item.substr(0, eq);
        const auto val = item.substr(eq + 1);
        auto count = [&] {
            const auto v = text::parse_u64(val);
            if (!v) throw ParameterError("synthetic spec: '" + std::string(key) + "' needs an integer");
            return static_cast<std::size_t>(*v);
        };
        auto real = [&] {
            const auto v = text::parse_double(val);
            if (!v) throw ParameterError("synthetic spec: '" + std::string(key) + "' needs a number");
            return *v;
        };
        if (key == "n") spec.n = count();
        else if (key == "d") spec.d = count();
        else if (key == "rank") spec.signal_rank = count();
        else if (key == "noise") spec.noise_scale = real();
        else if (key == "sparsity") spec.sparsity = real();
        else throw ParameterError("synthetic spec: unknown key '" + std::string(key) + "'");
    }
    return spec;
}

}  // namespace ridgetap

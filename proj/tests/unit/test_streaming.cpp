#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "doctest.h"
#include "ridgetap/error.hpp"
#include "ridgetap/streaming.hpp"
#include "ridgetap/verification.hpp"
#include "support.hpp"

using namespace ridgetap;

namespace {

StreamParams params(StreamMode mode, std::size_t k, std::size_t t, std::uint64_t seed) {
    StreamParams p;
    p.mode = mode;
    p.k = k;
    p.t_override = t;
    p.seed = seed;
    return p;
}

SparseVector column(const Eigen::MatrixXd& d, Eigen::Index j) {
    return SparseVector::from_dense({d.col(j).data(), static_cast<std::size_t>(d.rows())});
}

StreamState run(const Eigen::MatrixXd& d, const StreamParams& p) {
    StreamState s = stream_init(static_cast<std::size_t>(d.rows()), p);
    for (Eigen::Index j = 0; j < d.cols(); ++j) stream_ingest(s, column(d, j));
    return s;
}

std::string csv(const ColumnSample& s) {
    std::ostringstream os;
    write_sample_csv(os, s);
    return os.str();
}

}  // namespace

TEST_CASE("rate and slot arithmetic") {
    StreamParams p;
    p.k = 3;
    CHECK(p.rate() == doctest::Approx(4.0 * (std::log(3.0) + std::log(10.0) / 0.5)));
    CHECK(p.slots() == static_cast<std::size_t>(std::ceil(32.0 * 3 * p.rate())));
    p.mode = StreamMode::pcp;
    CHECK(p.rate() == doctest::Approx(4.0 * std::log(30.0) / 0.25));
    CHECK(p.slots() == static_cast<std::size_t>(std::ceil(16.0 * 3 * p.rate() / 0.5)));
    p.t_override = 40;
    CHECK(p.slots() == 40);
    CHECK(p.rate() == doctest::Approx(0.5 * 40 / 48.0));
    p.mode = StreamMode::css;
    CHECK(p.rate() == doctest::Approx(40 / 96.0));
    p.eps = 0.0;
    CHECK_THROWS_AS(stream_init(4, p), ParameterError);
}

TEST_CASE("epoch arithmetic") {
    const std::size_t t = 10;
    const Eigen::MatrixXd d = support::gaussian(5, 4 * t, 1);
    StreamState s = stream_init(5, params(StreamMode::css, 2, t, 3));
    for (std::size_t j = 0; j < t; ++j) stream_ingest(s, column(d, static_cast<Eigen::Index>(j)));
    CHECK(s.epoch == 0);
    CHECK(s.occupied() == 0);
    stream_ingest(s, column(d, static_cast<Eigen::Index>(t)));
    CHECK(s.epoch == 1);
    CHECK(s.log.size() == 1);
    CHECK(s.log[0].stream_position == t);
    CHECK(s.log[0].buffered == t);
    for (std::size_t j = t + 1; j < 4 * t; ++j) stream_ingest(s, column(d, static_cast<Eigen::Index>(j)));
    CHECK(s.epoch == 3);
    CHECK(s.pending.size() == t);
    const StreamResult r = stream_finalize(s);
    CHECK(s.epoch == 4);
    CHECK(s.pending.empty());
    CHECK(r.sample.slots.size() == t);
    CHECK_THROWS(stream_ingest(s, column(d, 0)));
    StreamState fresh = stream_init(5, params(StreamMode::css, 2, t, 3));
    CHECK_THROWS_AS(stream_ingest(fresh, SparseVector(6)), DimensionError);
}

TEST_CASE("empty stream gives an empty sample") {
    StreamState s = stream_init(4, params(StreamMode::pcp, 1, 6, 0));
    const StreamResult r = stream_finalize(s);
    CHECK(r.sample.slots.size() == 6);
    CHECK(r.sample.occupied() == 0);
    CHECK(reservoir_matrix(s).cols() == 0);
    CHECK(s.log.empty());
}

TEST_CASE("rejection step evicts at the score ratio") {
    const Eigen::MatrixXd d = support::gaussian(4, 6, 2);
    StreamState base = stream_init(4, params(StreamMode::pcp, 1, 4, 0));
    for (Eigen::Index j = 0; j < 6; ++j) base.sketch.update(column(d, j));
    const double fresh = stream_scores(base, ColumnMatrix::from_dense(d.leftCols(1))).scores[0];

    auto setup = [&](double tau_old, std::uint64_t seed) {
        StreamState s = base;
        s.params.seed = seed;
        s.reservoir[0].source = 0;
        s.reservoir[0].column = column(d, 0);
        s.reservoir[0].tau_old = tau_old;
        s.reservoir[0].entry_score = tau_old;
        s.reservoir[0].weight = 1.0;
        s.pending.emplace_back(99, SparseVector(4));  // contributes nothing
        return s;
    };

    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        StreamState s = setup(fresh, seed);
        prune_epoch(s);
        CHECK(s.reservoir[0].source.has_value());
        CHECK(s.log[0].evicted == 0);
    }

    const int trials = 10000;
    int evicted = 0;
    for (int seed = 0; seed < trials; ++seed) {
        StreamState s = setup(2.0 * fresh, static_cast<std::uint64_t>(seed));
        prune_epoch(s);
        if (!s.reservoir[0].source) {
            ++evicted;
        } else {
            CHECK(s.reservoir[0].tau_old == doctest::Approx(fresh));
            REQUIRE(s.reservoir[0].rescales.size() == 1);
            CHECK(s.reservoir[0].rescales[0] == doctest::Approx(std::sqrt(2.0)));
            CHECK(s.reservoir[0].weight == doctest::Approx(std::sqrt(2.0)));
        }
    }
    CHECK(std::abs(evicted / double(trials) - 0.5) <= 3.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("a repeated column persists in the reservoir") {
    const Eigen::MatrixXd one = support::gaussian(6, 1, 3);
    const std::size_t d = 2000;
    int persisted = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        StreamState s = stream_init(6, params(StreamMode::css, 1, 0, seed));
        for (std::size_t j = 0; j < d; ++j) stream_ingest(s, column(one, 0));
        const StreamResult r = stream_finalize(s);
        persisted += r.sample.occupied() >= 1;
        // d copies share the mass, so the inflated score is 4/d
        if (seed == 0)
            CHECK(stream_scores(s, ColumnMatrix::from_dense(one)).scores[0] ==
                  doctest::Approx(4.0 / static_cast<double>(d)).epsilon(1e-9));
    }
    CHECK(persisted == 50);
}

TEST_CASE("per-slot presence follows the entry window across epochs") {
    // 12 columns, t = 8: one prune at column 9, one at finalize.
    const std::size_t t = 8;
    const Eigen::MatrixXd d = support::gaussian(4, 12, 5);
    const ColumnMatrix a = ColumnMatrix::from_dense(d);
    const StreamParams p = params(StreamMode::css, 1, t, 0);

    // Scores in force at each prune; the stored score is their running min.
    StreamState probe = stream_init(4, p);
    std::vector<double> tau(12, std::numeric_limits<double>::infinity());
    for (Eigen::Index j = 0; j < 12; ++j) {
        if (j == static_cast<Eigen::Index>(t)) {
            const RidgeScores s = stream_scores(probe, ColumnMatrix::from_dense(d.leftCols(j)));
            for (Eigen::Index i = 0; i < j; ++i) tau[static_cast<std::size_t>(i)] = s.scores[static_cast<std::size_t>(i)];
        }
        probe.sketch.update(column(d, j));
    }
    const RidgeScores fin = stream_scores(probe, a);
    for (std::size_t i = 0; i < 12; ++i) tau[i] = std::min(tau[i], fin.scores[i]);

    std::map<std::size_t, double> hits;
    const int replays = 100000;
    for (int r = 0; r < replays; ++r) {
        StreamParams pr = p;
        pr.seed = static_cast<std::uint64_t>(r);
        StreamState s = run(d, pr);
        const StreamResult out = stream_finalize(s);
        for (const auto& slot : out.sample.slots)
            if (slot.source_index) hits[*slot.source_index] += 1.0;
        if (r == 0) {
            for (const auto& e : s.log) CHECK(e.entry_mass <= 0.5 + 1e-12);
        }
    }
    const StreamState ref = run(d, p);
    for (std::size_t j = 0; j < 12; ++j) {
        CAPTURE(j);
        const double q = std::min(1.0, tau[j] * ref.rate / static_cast<double>(t));
        const auto [lo, hi] = support::wilson(hits[j], static_cast<double>(replays) * t);
        CHECK(hi >= 0.5 * q);
        CHECK(lo <= q);
    }
}

TEST_CASE("pcp weights compose entry weight and rescales") {
    const Eigen::MatrixXd d = support::low_rank_plus_noise(10, 400, 3, 0.3, 6);
    StreamParams p = params(StreamMode::pcp, 3, 60, 11);
    StreamState s = run(d, p);
    stream_finalize(s);
    std::size_t rescaled = 0;
    for (const ReservoirSlot& slot : s.reservoir) {
        if (!slot.source) continue;
        double w = 1.0 / std::sqrt(slot.entry_score * s.rate);
        for (double f : slot.rescales) {
            CHECK(f >= 1.0);
            w *= f;
        }
        rescaled += !slot.rescales.empty();
        CHECK(slot.weight == doctest::Approx(w).epsilon(1e-12));
        CHECK(slot.tau_old <= slot.entry_score);
        double prod = 1.0;
        for (double f : slot.rescales) prod *= f * f;
        CHECK(slot.entry_score / prod == doctest::Approx(slot.tau_old).epsilon(1e-10));
    }
    CHECK(rescaled > 0);
}

TEST_CASE("slot scores never increase across epochs and occupancy stays bounded") {
    for (StreamMode mode : {StreamMode::css, StreamMode::pcp}) {
        CAPTURE(stream_mode_name(mode));
        const Eigen::MatrixXd d = support::low_rank_plus_noise(20, 500, 3, 0.2, 7);
        StreamParams p;
        p.mode = mode;
        p.k = 3;
        p.t_override = 50;
        p.seed = 1;
        StreamState s = stream_init(20, p);
        std::vector<std::pair<std::optional<std::size_t>, double>> last(s.t);
        std::size_t epoch_seen = 0;
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            stream_ingest(s, column(d, j));
            if (s.epoch == epoch_seen) continue;
            epoch_seen = s.epoch;
            for (std::size_t i = 0; i < s.t; ++i) {
                const ReservoirSlot& slot = s.reservoir[i];
                if (slot.source && last[i].first == slot.source) CHECK(slot.tau_old <= last[i].second);
                last[i] = {slot.source, slot.tau_old};
            }
            const double bound = mode == StreamMode::css ? 0.5 : p.eps;
            const double frac = static_cast<double>(s.occupied()) / static_cast<double>(s.t);
            CHECK(frac <= bound + 3.0 * std::sqrt(bound * (1 - bound) / static_cast<double>(s.t)));
        }
        stream_finalize(s);
        CHECK(s.peak_columns <= 2 * s.t);
        CHECK(s.storage_bound() == 20 * 9 + 2 * 50 * 20);
    }
}

TEST_CASE("final inflated scores overestimate twice the exact scores within the mass cap") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Eigen::MatrixXd d = support::low_rank_plus_noise(12, 300, 3, 0.3, 20 + seed);
        const ColumnMatrix a = ColumnMatrix::from_dense(d);
        StreamState s = run(d, params(StreamMode::css, 3, 40, seed));
        const StreamResult r = stream_finalize(s);
        const RidgeScores tau = stream_scores(s, a);
        const RidgeScores ex = exact_ridge_scores(a, 3);
        for (std::size_t i = 0; i < 300; ++i) CHECK(tau.scores[i] >= 2.0 * ex.scores[i] * (1.0 - 1e-9));
        CHECK(tau.sum() <= r.spec.score_mass_cap);
        CHECK(r.spec.score_mass_cap == 48.0);
        const auto w = r.spec.window(0.1);
        CHECK(w.second == doctest::Approx(0.1 * s.rate / 40.0));
        CHECK(w.first == doctest::Approx(0.5 * w.second));
    }
}

TEST_CASE("checkpoint resume reproduces the uninterrupted run") {
    const std::filesystem::path dir = RIDGETAP_TEST_TMP;
    std::filesystem::create_directories(dir);
    for (StreamMode mode : {StreamMode::css, StreamMode::pcp}) {
        const Eigen::MatrixXd d = support::low_rank_plus_noise(8, 300, 2, 0.3, 30);
        const StreamParams p = params(mode, 2, 30, 5);
        StreamState whole = run(d, p);
        const StreamResult expect = stream_finalize(whole);

        for (Eigen::Index cut : {0, 29, 30, 31, 157}) {
            StreamState first = stream_init(8, p);
            for (Eigen::Index j = 0; j < cut; ++j) stream_ingest(first, column(d, j));
            const auto prefix = dir / ("ckpt_" + std::string(stream_mode_name(mode)) + std::to_string(cut));
            write_stream_checkpoint(first, prefix);
            StreamState resumed = read_stream_checkpoint(prefix);
            CHECK(resumed.sketch == first.sketch);
            CHECK(resumed.pending.size() == first.pending.size());
            CHECK(resumed.occupied() == first.occupied());
            for (Eigen::Index j = cut; j < d.cols(); ++j) stream_ingest(resumed, column(d, j));
            const StreamResult got = stream_finalize(resumed);
            CHECK(csv(got.sample) == csv(expect.sample));
            CHECK(epoch_log_json(resumed).dump() == epoch_log_json(whole).dump());
        }
    }
    const auto bad = dir / "bad";
    StreamState s = stream_init(3, params(StreamMode::css, 1, 4, 0));
    write_stream_checkpoint(s, bad);
    {
        std::ofstream os(bad.string() + ".reservoir.csv");
        os << "slot,source_index,weight,tau_old,entry_score,rescales\n0,,1,1,1,\n1,,x,1,1,\n";
    }
    try {
        read_stream_checkpoint(bad);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("streams are deterministic under a seed") {
    const Eigen::MatrixXd d = support::gaussian(6, 200, 40);
    StreamState x = run(d, params(StreamMode::pcp, 2, 25, 9));
    StreamState y = run(d, params(StreamMode::pcp, 2, 25, 9));
    StreamState z = run(d, params(StreamMode::pcp, 2, 25, 10));
    CHECK(csv(stream_finalize(x).sample) == csv(stream_finalize(y).sample));
    CHECK(csv(stream_finalize(x).sample) != csv(stream_finalize(z).sample));
}

TEST_CASE("finalized samples pass the quality checks on most replays") {
    int css_ok = 0, pcp_ok = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXd d = support::low_rank_plus_noise(20, 500, 3, 0.1, 100 + seed);
        const ColumnMatrix a = ColumnMatrix::from_dense(d);
        StreamParams p;
        p.k = 3;
        p.seed = seed;
        StreamState cs = run(d, p);
        stream_finalize(cs);
        css_ok += verify_css(a, reservoir_matrix(cs), 3, 0.5).passed;
        p.mode = StreamMode::pcp;
        StreamState ps = run(d, p);
        stream_finalize(ps);
        pcp_ok += verify_pcp(a, reservoir_matrix(ps), 3, 0.5, 20, seed).passed;
    }
    CHECK(css_ok >= 9);
    CHECK(pcp_ok >= 9);
}

#include "ridgetap/streaming.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "ridgetap/error.hpp"
#include "ridgetap/rng.hpp"
#include "text.hpp"

namespace ridgetap {
namespace {

constexpr double kInflation = 4.0;

double inflated(const RidgeSolver& scorer, const SparseVector& column) {
    if (column.empty()) return 0.0;
    return kInflation * scorer.quadratic_form(column);
}

// Per-slot entry probability for a buffered column.
double entry_probability(const StreamState& s, double tau) {
    return std::min(1.0, tau * s.rate / static_cast<double>(s.t));
}

}  // namespace

std::string_view stream_mode_name(StreamMode m) noexcept {
    return m == StreamMode::css ? "css" : "pcp";
}

void StreamParams::validate() const {
    if (k < 1) throw ParameterError("k must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("eps must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
    if (!(oversample_c > 0.0) || !std::isfinite(oversample_c))
        throw ParameterError("c must be positive");
    if (ell < 1) throw ParameterError("ell must be >= 1");
}

double StreamParams::rate() const {
    const double kk = static_cast<double>(k);
    if (t_override > 0) {
        const double t = static_cast<double>(t_override);
        return mode == StreamMode::css ? t / (32.0 * kk) : eps * t / (16.0 * kk);
    }
    if (mode == StreamMode::css) return oversample_c * (std::log(kk) + std::log(1.0 / delta) / eps);
    return oversample_c * std::log(kk / delta) / (eps * eps);
}

std::size_t StreamParams::slots() const {
    if (t_override > 0) return t_override;
    const double kk = static_cast<double>(k);
    const double t = mode == StreamMode::css ? 32.0 * kk * rate() : 16.0 * kk * rate() / eps;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t)));
}

std::size_t StreamState::occupied() const noexcept {
    return static_cast<std::size_t>(std::count_if(reservoir.begin(), reservoir.end(),
                                                  [](const ReservoirSlot& s) { return s.source.has_value(); }));
}

std::size_t StreamState::storage_bound() const noexcept {
    return sketch.rows() * sketch.width() + 2 * t * sketch.rows();
}

StreamState stream_init(std::size_t n_rows, const StreamParams& params) {
    params.validate();
    StreamState s;
    s.params = params;
    s.t = params.slots();
    s.rate = params.rate();
    s.sketch = FDSketch(n_rows, params.k, params.ell);
    s.reservoir.resize(s.t);
    return s;
}

void stream_ingest(StreamState& state, SparseVector column) {
    if (state.finalized) throw Error("stream already finalized");
    if (column.dim() != state.sketch.rows())
        throw DimensionError("stream column has " + std::to_string(column.dim()) +
                             " entries, expected " + std::to_string(state.sketch.rows()));
    if (state.pending.size() == state.t) prune_epoch(state);
    state.sketch.update(column);
    state.pending.emplace_back(state.ingested++, std::move(column));
    state.peak_columns = std::max(state.peak_columns, state.occupied() + state.pending.size());
    if (state.peak_columns > 2 * state.t) throw Error("stream storage exceeded 2t columns");
}

void prune_epoch(StreamState& state) {
    if (state.pending.empty()) return;
    const RidgeSolver scorer = state.sketch.scorer();
    const bool pcp = state.params.mode == StreamMode::pcp;

    EpochRecord rec;
    rec.epoch = state.epoch;
    rec.stream_position = state.ingested;
    rec.buffered = state.pending.size();
    rec.occupied_before = state.occupied();

    std::vector<double> tau_d(state.pending.size());
    std::vector<double> q(state.pending.size());
    for (std::size_t l = 0; l < state.pending.size(); ++l) {
        tau_d[l] = inflated(scorer, state.pending[l].second);
        q[l] = entry_probability(state, tau_d[l]);
        rec.score_mass += tau_d[l];
        rec.entry_mass += q[l];
    }
    // Each empty slot takes at most one buffered column, chosen with
    // probability q_l. That is a single categorical draw while sum q <= 1.
    rec.fallback_scan = rec.entry_mass > 1.0;

    Philox rng = make_rng(state.params.seed, "stream-epoch", state.epoch);
    for (ReservoirSlot& slot : state.reservoir) {
        if (slot.source) {
            const double tau = std::min(slot.tau_old, inflated(scorer, slot.column));
            const double keep = slot.tau_old > 0.0 ? tau / slot.tau_old : 0.0;
            if (rng.uniform() < keep) {
                if (pcp) {
                    const double factor = std::sqrt(slot.tau_old / tau);
                    slot.weight *= factor;
                    slot.rescales.push_back(factor);
                }
                slot.tau_old = tau;
            } else {
                slot = ReservoirSlot{};
                ++rec.evicted;
            }
        }
        if (slot.source) continue;

        std::optional<std::size_t> chosen;
        if (!rec.fallback_scan) {
            const double u = rng.uniform();
            double cum = 0.0;
            for (std::size_t l = 0; l < q.size(); ++l) {
                cum += q[l];
                if (u < cum) {
                    chosen = l;
                    break;
                }
            }
        } else {
            for (std::size_t l = 0; l < q.size() && !chosen; ++l)
                if (rng.uniform() < q[l]) chosen = l;
        }
        if (!chosen) continue;
        const auto& [pos, column] = state.pending[*chosen];
        slot.source = pos;
        slot.column = column;
        slot.tau_old = tau_d[*chosen];
        slot.entry_score = tau_d[*chosen];
        slot.weight = pcp ? 1.0 / std::sqrt(tau_d[*chosen] * state.rate) : 1.0;
        slot.rescales.clear();
        ++rec.entered;
    }

    state.pending.clear();
    rec.occupied_after = state.occupied();
    state.log.push_back(rec);
    ++state.epoch;
}

RidgeScores stream_scores(const StreamState& state, const ColumnMatrix& a) {
    RidgeScores out = fd_ridge_scores(state.sketch, a);
    for (double& s : out.scores) s *= kInflation;
    return out;
}

std::pair<double, double> StreamOutputSpec::window(double tau) const {
    const double hi = std::min(1.0, tau * rate / static_cast<double>(t));
    return {lower_factor * hi, hi};
}

StreamResult stream_finalize(StreamState& state) {
    if (!state.finalized) {
        prune_epoch(state);
        state.finalized = true;
    }
    StreamResult r;
    r.spec.mode = state.params.mode;
    r.spec.t = state.t;
    r.spec.rate = state.rate;
    r.spec.lower_factor = state.params.mode == StreamMode::css ? 0.5 : 1.0 - state.params.eps;
    r.spec.score_mass_cap = 16.0 * static_cast<double>(state.params.k);
    r.sample.mode = SamplingMode::with_replacement;
    r.sample.goal = state.params.mode == StreamMode::css ? SamplingGoal::css : SamplingGoal::pcp;
    r.sample.seed = state.params.seed;
    for (const ReservoirSlot& slot : state.reservoir) {
        if (slot.source)
            r.sample.slots.push_back({slot.source, slot.weight, entry_probability(state, slot.tau_old)});
        else
            r.sample.slots.push_back({std::nullopt, 0.0, 0.0});
    }
    return r;
}

ColumnMatrix reservoir_matrix(const StreamState& state) {
    ColumnMatrix c(state.sketch.rows());
    for (const ReservoirSlot& slot : state.reservoir)
        if (slot.source) c.append(slot.column.scaled(slot.weight));
    return c;
}

nlohmann::ordered_json epoch_log_json(const StreamState& state) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const EpochRecord& e : state.log) {
        nlohmann::ordered_json j;
        j["epoch"] = e.epoch;
        j["stream_position"] = e.stream_position;
        j["buffered"] = e.buffered;
        j["occupied_before"] = e.occupied_before;
        j["evicted"] = e.evicted;
        j["entered"] = e.entered;
        j["occupied_after"] = e.occupied_after;
        j["occupied_fraction"] = static_cast<double>(e.occupied_after) / static_cast<double>(state.t);
        j["entry_mass"] = e.entry_mass;
        j["score_mass"] = e.score_mass;
        j["fallback_scan"] = e.fallback_scan;
        arr.push_back(std::move(j));
    }
    return arr;
}

namespace {

nlohmann::ordered_json column_json(const SparseVector& v) {
    nlohmann::ordered_json j;
    j["idx"] = std::vector<Index>(v.indices().begin(), v.indices().end());
    j["val"] = std::vector<double>(v.values().begin(), v.values().end());
    return j;
}

SparseVector column_from_json(const nlohmann::ordered_json& j, std::size_t n) {
    const auto idx = j.at("idx").get<std::vector<Index>>();
    const auto val = j.at("val").get<std::vector<double>>();
    if (idx.size() != val.size()) throw ParseError(0, "checkpoint column idx/val length mismatch");
    SparseVector v(n);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= n) throw ParseError(0, "checkpoint column index out of range");
        v.push_back(idx[i], val[i]);
    }
    return v;
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
    return std::filesystem::path(prefix.string() + suffix);
}

}  // namespace

void write_stream_checkpoint(const StreamState& state, const std::filesystem::path& prefix) {
    {
        std::ofstream os(with_suffix(prefix, ".fd"), std::ios::binary);
        if (!os) throw Error("cannot write " + with_suffix(prefix, ".fd").string());
        state.sketch.write(os);
    }
    {
        std::ofstream os(with_suffix(prefix, ".reservoir.csv"));
        if (!os) throw Error("cannot write " + with_suffix(prefix, ".reservoir.csv").string());
        os << "slot,source_index,weight,tau_old,entry_score,rescales\n";
        for (std::size_t i = 0; i < state.reservoir.size(); ++i) {
            const ReservoirSlot& s = state.reservoir[i];
            os << i << ',';
            if (s.source) os << *s.source;
            os << ',' << text::format_double(s.weight) << ',' << text::format_double(s.tau_old) << ','
               << text::format_double(s.entry_score) << ',';
            for (std::size_t r = 0; r < s.rescales.size(); ++r)
                os << (r ? ";" : "") << text::format_double(s.rescales[r]);
            os << '\n';
        }
    }
    nlohmann::ordered_json j;
    const StreamParams& p = state.params;
    j["mode"] = stream_mode_name(p.mode);
    j["k"] = p.k;
    j["eps"] = p.eps;
    j["delta"] = p.delta;
    j["c"] = p.oversample_c;
    j["ell"] = p.ell;
    j["t_override"] = p.t_override;
    j["seed"] = p.seed;
    j["rows"] = state.sketch.rows();
    j["ingested"] = state.ingested;
    j["epoch"] = state.epoch;
    j["peak_columns"] = state.peak_columns;
    j["finalized"] = state.finalized;
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (const ReservoirSlot& s : state.reservoir)
        cols.push_back(s.source ? column_json(s.column) : nlohmann::ordered_json());
    j["reservoir_columns"] = std::move(cols);
    nlohmann::ordered_json pend = nlohmann::ordered_json::array();
    for (const auto& [pos, col] : state.pending) {
        auto c = column_json(col);
        c["source"] = pos;
        pend.push_back(std::move(c));
    }
    j["pending"] = std::move(pend);
    j["epochs"] = epoch_log_json(state);
    std::ofstream os(with_suffix(prefix, ".json"));
    if (!os) throw Error("cannot write " + with_suffix(prefix, ".json").string());
    os << j.dump(2) << '\n';
}

StreamState read_stream_checkpoint(const std::filesystem::path& prefix) {
    nlohmann::ordered_json j;
    {
        std::ifstream is(with_suffix(prefix, ".json"));
        if (!is) throw Error("cannot read " + with_suffix(prefix, ".json").string());
        try {
            j = nlohmann::ordered_json::parse(is);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(0, std::string("checkpoint metadata: ") + e.what());
        }
    }
    StreamParams p;
    StreamState s;
    try {
        const std::string mode = j.at("mode").get<std::string>();
        if (mode != "css" && mode != "pcp") throw ParseError(0, "unknown stream mode " + mode);
        p.mode = mode == "css" ? StreamMode::css : StreamMode::pcp;
        p.k = j.at("k").get<std::size_t>();
        p.eps = j.at("eps").get<double>();
        p.delta = j.at("delta").get<double>();
        p.oversample_c = j.at("c").get<double>();
        p.ell = j.at("ell").get<std::size_t>();
        p.t_override = j.at("t_override").get<std::size_t>();
        p.seed = j.at("seed").get<std::uint64_t>();
        const auto rows = j.at("rows").get<std::size_t>();
        s = stream_init(rows, p);
        s.ingested = j.at("ingested").get<std::size_t>();
        s.epoch = j.at("epoch").get<std::size_t>();
        s.peak_columns = j.at("peak_columns").get<std::size_t>();
        s.finalized = j.at("finalized").get<bool>();
        const auto& cols = j.at("reservoir_columns");
        if (cols.size() != s.t) throw ParseError(0, "checkpoint reservoir size does not match t");
        for (std::size_t i = 0; i < s.t; ++i)
            if (!cols[i].is_null()) s.reservoir[i].column = column_from_json(cols[i], rows);
        for (const auto& c : j.at("pending"))
            s.pending.emplace_back(c.at("source").get<std::size_t>(), column_from_json(c, rows));
        for (const auto& e : j.at("epochs")) {
            EpochRecord r;
            r.epoch = e.at("epoch").get<std::size_t>();
            r.stream_position = e.at("stream_position").get<std::size_t>();
            r.buffered = e.at("buffered").get<std::size_t>();
            r.occupied_before = e.at("occupied_before").get<std::size_t>();
            r.evicted = e.at("evicted").get<std::size_t>();
            r.entered = e.at("entered").get<std::size_t>();
            r.occupied_after = e.at("occupied_after").get<std::size_t>();
            r.entry_mass = e.at("entry_mass").get<double>();
            r.score_mass = e.at("score_mass").get<double>();
            r.fallback_scan = e.at("fallback_scan").get<bool>();
            s.log.push_back(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("checkpoint metadata: ") + e.what());
    }
    {
        std::ifstream is(with_suffix(prefix, ".fd"), std::ios::binary);
        if (!is) throw Error("cannot read " + with_suffix(prefix, ".fd").string());
        FDSketch sketch = FDSketch::read(is);
        if (sketch.rows() != s.sketch.rows() || sketch.k() != p.k || sketch.ell() != p.ell)
            throw ParseError(0, "checkpoint sketch does not match its metadata");
        s.sketch = std::move(sketch);
    }
    std::ifstream is(with_suffix(prefix, ".reservoir.csv"));
    if (!is) throw Error("cannot read " + with_suffix(prefix, ".reservoir.csv").string());
    std::string line;
    std::size_t lineno = 0;
    std::size_t slot = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (lineno == 1) {
            if (line != "slot,source_index,weight,tau_old,entry_score,rescales")
                throw ParseError(lineno, "unexpected reservoir header");
            continue;
        }
        if (line.empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 6) throw ParseError(lineno, "expected 6 comma-separated fields");
        if (slot >= s.t) throw ParseError(lineno, "more reservoir rows than slots");
        ReservoirSlot& r = s.reservoir[slot++];
        if (!f[1].empty()) {
            const auto src = text::parse_u64(f[1]);
            if (!src) throw ParseError(lineno, "malformed source_index");
            r.source = *src;
        }
        const auto w = text::parse_double(f[2]);
        const auto tau = text::parse_double(f[3]);
        const auto entry = text::parse_double(f[4]);
        if (!w || !tau || !entry) throw ParseError(lineno, "malformed number");
        r.weight = *w;
        r.tau_old = *tau;
        r.entry_score = *entry;
        if (!f[5].empty())
            for (auto part : text::split(f[5], ';')) {
                const auto v = text::parse_double(part);
                if (!v) throw ParseError(lineno, "malformed rescale factor");
                r.rescales.push_back(*v);
            }
        if (r.source.has_value() == (r.column.dim() == 0))
            throw ParseError(lineno, "reservoir row disagrees with checkpoint columns");
    }
    if (slot != s.t) throw ParseError(lineno, "reservoir has fewer rows than slots");
    return s;
}

}  // namespace ridgetap

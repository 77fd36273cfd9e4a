#pragma once

// Single-pass column samplers driven by Frequent Directions score estimates:
// a column subset (css) and a projection-cost preserving sample (pcp). Columns
// queue in a buffer D of t columns; each full buffer triggers a prune epoch
// that rejection-resamples the reservoir and fills empty slots from D.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "ridgetap/frequent_directions.hpp"
#include "ridgetap/sampling.hpp"
#include "ridgetap/sparse.hpp"

namespace ridgetap {

enum class StreamMode { css, pcp };

std::string_view stream_mode_name(StreamMode m) noexcept;

struct StreamParams {
    StreamMode mode = StreamMode::css;
    std::size_t k = 1;
    double eps = 0.5;
    double delta = 0.1;
    double oversample_c = 4.0;
    std::size_t ell = 2;
    std::size_t t_override = 0;  ///< 0: derive t from the other parameters
    std::uint64_t seed = 0;

    void validate() const;
    /// Per-column expected copies per unit score: c (log k + log(1/delta)/eps)
    /// for css, c log(k/delta)/eps^2 for pcp (rescaled to match t_override).
    double rate() const;
    /// Reservoir slots: ceil(32 k rate) for css, ceil(16 k rate / eps) for pcp.
    std::size_t slots() const;
};

struct ReservoirSlot {
    std::optional<std::size_t> source;  ///< stream position of the held column
    SparseVector column;                ///< unweighted
    double tau_old = 1.0;
    double entry_score = 1.0;
    double weight = 1.0;               ///< pcp: 1/sqrt(entry_score*rate) times the rescales
    std::vector<double> rescales;      ///< pcp: sqrt(tau_old/tau) per surviving epoch
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t stream_position = 0;  ///< columns ingested when the prune ran
    std::size_t buffered = 0;
    std::size_t occupied_before = 0;
    std::size_t evicted = 0;
    std::size_t entered = 0;
    std::size_t occupied_after = 0;
    double entry_mass = 0.0;   ///< sum of per-slot entry probabilities over D
    double score_mass = 0.0;   ///< sum of inflated scores over D
    bool fallback_scan = false;
};

struct StreamState {
    StreamParams params;
    std::size_t t = 0;
    double rate = 0.0;
    FDSketch sketch;
    std::vector<ReservoirSlot> reservoir;  ///< exactly t slots
    std::vector<std::pair<std::size_t, SparseVector>> pending;  ///< buffer D
    std::size_t ingested = 0;
    std::size_t epoch = 0;
    std::size_t peak_columns = 0;  ///< max stored columns (occupied + buffered)
    std::vector<EpochRecord> log;
    bool finalized = false;

    std::size_t occupied() const noexcept;
    /// Storage bound in doubles: n (ell+1) k for the sketch plus 2t columns of n.
    std::size_t storage_bound() const noexcept;
};

StreamState stream_init(std::size_t n_rows, const StreamParams& params);

/// Prunes first if D is full, then updates the sketch and queues the column.
void stream_ingest(StreamState& state, SparseVector column);

/// Runs one prune epoch over the current buffer contents (no-op if empty).
void prune_epoch(StreamState& state);

/// 4 x raw FD score of each column of A against the current sketch.
RidgeScores stream_scores(const StreamState& state, const ColumnMatrix& a);

struct StreamOutputSpec {
    StreamMode mode = StreamMode::css;
    std::size_t t = 0;
    double rate = 0.0;
    double lower_factor = 0.5;  ///< 1/2 for css, 1 - eps for pcp
    double score_mass_cap = 0.0;  ///< 16 k
    /// Per-slot target window [lower_factor * tau * rate / t, tau * rate / t].
    std::pair<double, double> window(double tau) const;
};

struct StreamResult {
    ColumnSample sample;  ///< t slots, source indices are stream positions
    StreamOutputSpec spec;
};

/// Flushes the trailing buffer through a final prune and exports the reservoir.
StreamResult stream_finalize(StreamState& state);

/// The weighted (pcp) or unweighted (css) reservoir matrix, empty slots omitted.
ColumnMatrix reservoir_matrix(const StreamState& state);

nlohmann::ordered_json epoch_log_json(const StreamState& state);

/// Writes <prefix>.fd (binary sketch), <prefix>.reservoir.csv and <prefix>.json.
void write_stream_checkpoint(const StreamState& state, const std::filesystem::path& prefix);
StreamState read_stream_checkpoint(const std::filesystem::path& prefix);

}  // namespace ridgetap

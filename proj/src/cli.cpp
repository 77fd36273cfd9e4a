#include "ridgetap/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <thread>

#include "ridgetap/error.hpp"
#include "ridgetap/halving.hpp"
#include "ridgetap/kernels.hpp"
#include "ridgetap/linalg.hpp"
#include "ridgetap/ridge_scores.hpp"
#include "ridgetap/rng.hpp"
#include "ridgetap/sampling.hpp"
#include "ridgetap/streaming.hpp"
#include "ridgetap/synthetic.hpp"
#include "ridgetap/verification.hpp"
#include "text.hpp"

namespace ridgetap {
namespace {

using Json = nlohmann::ordered_json;

Json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

std::string_view format_name(MatrixFormat f) { return f == MatrixFormat::matrix_market ? "mm" : "lines"; }

Json matrix_summary(const ColumnMatrix& a) {
    Json j;
    j["rows"] = a.rows();
    j["cols"] = a.cols();
    j["nnz"] = a.nnz();
    j["frobenius_sq"] = num(a.frobenius_sq());
    return j;
}

Json base_report(const RunConfig& cfg) {
    Json j;
    j["command"] = cfg.command;
    j["build_id"] = build_id();
    j["seed"] = cfg.seed;
    j["config"] = cfg.to_json();
    return j;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path);
    return os;
}

const std::string& require_output(const RunConfig& cfg) {
    if (cfg.output.empty()) throw ParameterError(cfg.command + " needs --out");
    return cfg.output;
}

ColumnMatrix load_input(const RunConfig& cfg) {
    if (cfg.inputs.empty()) throw ParameterError(cfg.command + " needs --in");
    return read_matrix(cfg.inputs.front(), cfg.format);
}

void check_k_fits(const RunConfig& cfg, const ColumnMatrix& a) {
    if (cfg.k > std::min(a.rows(), a.cols()))
        throw ParameterError("--k " + std::to_string(cfg.k) + " exceeds min(rows, cols) = " +
                             std::to_string(std::min(a.rows(), a.cols())));
}

Json verification_json(const std::vector<VerificationReport>& reports, bool& all_passed) {
    Json arr = Json::array();
    all_passed = true;
    for (const auto& r : reports) {
        Json j = to_json(r);
        // witnesses can be n*k numbers; the report keeps them short
        if (r.witness.size() > 64) j["witness"] = "omitted (" + std::to_string(r.witness.size()) + " values)";
        arr.push_back(std::move(j));
        all_passed = all_passed && r.passed;
    }
    return arr;
}

Json sample_summary(const ColumnSample& s) {
    Json j;
    j["mode"] = mode_name(s.mode);
    j["goal"] = goal_name(s.goal);
    j["slots"] = s.slots.size();
    j["occupied"] = s.occupied();
    j["distinct_columns"] = s.distinct_sources().size();
    return j;
}

SamplingPlan plan_from(const RunConfig& cfg, SamplingGoal goal) {
    SamplingPlan p;
    p.k = cfg.k;
    p.eps = cfg.eps;
    p.delta = cfg.delta;
    p.oversample_c = cfg.oversample_c;
    p.mode = SamplingMode::with_replacement;
    p.goal = goal;
    p.seed = cfg.seed;
    return p;
}

RecursionConfig recursion_from(const RunConfig& cfg) {
    RecursionConfig r;
    r.k = cfg.k;
    r.delta = cfg.delta;
    r.theta = cfg.theta;
    r.coarse = cfg.theta < 1.0;
    r.final_eps = cfg.eps;
    r.oversample_c = cfg.oversample_c;
    r.seed = cfg.seed;
    return r;
}

StreamParams stream_params_from(const RunConfig& cfg, StreamMode mode) {
    StreamParams p;
    p.mode = mode;
    p.k = cfg.k;
    p.eps = cfg.eps;
    p.delta = cfg.delta;
    p.oversample_c = cfg.oversample_c;
    p.seed = cfg.seed;
    return p;
}

Json cmd_gen(const RunConfig& cfg) {
    SyntheticSpec spec = parse_synthetic_spec(cfg.inputs.empty() ? "" : cfg.inputs.front());
    spec.seed = cfg.seed;
    const ColumnMatrix a = generate(spec);
    write_matrix(require_output(cfg), a, cfg.format);
    Json j = base_report(cfg);
    j["spec"] = {{"n", spec.n},           {"d", spec.d},
                 {"signal_rank", spec.signal_rank}, {"noise_scale", spec.noise_scale},
                 {"sparsity", spec.sparsity}};
    j["matrix"] = matrix_summary(a);
    if (cfg.k > 0 && a.frobenius_sq() > 0.0) {
        const SvdFactors f = svd(a, SvdVectors::left_only);
        j["rank"] = f.rank;
        j["tail_norm_k"] = num(tail_norm(f, cfg.k, a.frobenius_sq()));
    }
    return j;
}

Json cmd_scores(const RunConfig& cfg) {
    const ColumnMatrix a = load_input(cfg);
    check_k_fits(cfg, a);
    const RidgeScores s = exact_ridge_scores(a, cfg.k);
    auto os = open_out(require_output(cfg));
    os << "index,score,provenance\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        os << i << ',' << text::format_double(s.scores[i]) << ',' << provenance_name(s.provenance) << '\n';
    Json j = base_report(cfg);
    j["matrix"] = matrix_summary(a);
    j["lambda"] = num(s.lambda);
    j["score_sum"] = num(s.sum());
    j["score_sum_bound"] = 2.0 * static_cast<double>(cfg.k);
    return j;
}

Json cmd_approx(const RunConfig& cfg) {
    const ColumnMatrix a = load_input(cfg);
    check_k_fits(cfg, a);
    const LowRankResult r = low_rank_approx(a, recursion_from(cfg));
    auto os = open_out(require_output(cfg));
    write_dense_text(os, r.basis);
    Json j = base_report(cfg);
    j["matrix"] = matrix_summary(a);
    j["rank"] = r.rank_a;
    j["tail_norm_k"] = num(r.tail_k);
    j["residual"] = num(r.residual);
    j["error_ratio"] = num(r.error_ratio);
    j["error_ratio_bound"] = 1.0 + cfg.eps;
    j["final_sample"] = sample_summary(r.sample);
    j["halving"] = to_json(r.trace);
    return j;
}

Json cmd_sample(const RunConfig& cfg, SamplingGoal goal, bool& all_passed) {
    const ColumnMatrix a = load_input(cfg);
    check_k_fits(cfg, a);
    const RidgeScores scores = exact_ridge_scores(a, cfg.k);
    const ColumnSample s = sample(a, scores, plan_from(cfg, goal));
    {
        auto os = open_out(require_output(cfg));
        write_sample_csv(os, s);
    }
    const ColumnMatrix c = materialize(a, s);
    const ReferenceSpectrum ref = prepare_reference(a, cfg.k);
    std::vector<VerificationReport> reports;
    if (goal == SamplingGoal::css) {
        reports.push_back(verify_css(ref, c, cfg.eps));
    } else {
        reports.push_back(verify_spectral_am(ref, c, cfg.eps));
        reports.push_back(verify_pcp(ref, c, cfg.eps, 50, cfg.seed));
        reports.push_back(verify_trace_bound(ref, c, cfg.eps));
    }
    Json j = base_report(cfg);
    j["matrix"] = matrix_summary(a);
    j["score_sum"] = num(scores.sum());
    j["sample"] = sample_summary(s);
    j["error_ratio"] = num(error_ratio(ref, a, top_k_basis(c, cfg.k)));
    j["verification"] = verification_json(reports, all_passed);
    j["all_passed"] = all_passed;
    return j;
}

Json cmd_stream(const RunConfig& cfg, StreamMode mode, bool& all_passed) {
    if (cfg.inputs.empty()) throw ParameterError(cfg.command + " needs --in");
    std::optional<StreamState> state;
    const StreamParams params = stream_params_from(cfg, mode);
    for_each_column(cfg.inputs.front(), cfg.format, [&](std::size_t rows, SparseVector col) {
        if (!state) state = stream_init(rows, params);
        stream_ingest(*state, std::move(col));
    });
    if (!state) throw ParseError(0, "stream has no columns");
    const StreamResult res = stream_finalize(*state);
    {
        auto os = open_out(require_output(cfg));
        write_sample_csv(os, res.sample);
    }
    {
        auto os = open_out(cfg.output + ".epochs.csv");
        os << "epoch,stream_position,buffered,occupied_before,evicted,entered,occupied_after,entry_mass\n";
        for (const EpochRecord& e : state->log)
            os << e.epoch << ',' << e.stream_position << ',' << e.buffered << ',' << e.occupied_before
               << ',' << e.evicted << ',' << e.entered << ',' << e.occupied_after << ','
               << text::format_double(e.entry_mass) << '\n';
    }
    Json j = base_report(cfg);
    j["columns_streamed"] = state->ingested;
    j["t"] = state->t;
    j["rate"] = state->rate;
    j["epochs"] = state->epoch;
    j["peak_columns"] = state->peak_columns;
    j["peak_column_bound"] = 2 * state->t;
    j["sketch_width"] = state->sketch.width();
    j["sample"] = sample_summary(res.sample);
    j["epoch_log"] = epoch_log_json(*state);

    const ColumnMatrix a = read_matrix(cfg.inputs.front(), cfg.format);
    if (cfg.k <= std::min(a.rows(), a.cols()) && a.rows() <= dense_svd_limit()) {
        const ColumnMatrix c = reservoir_matrix(*state);
        const ReferenceSpectrum ref = prepare_reference(a, cfg.k);
        std::vector<VerificationReport> reports;
        if (mode == StreamMode::css)
            reports.push_back(verify_css(ref, c, cfg.eps));
        else
            reports.push_back(verify_pcp(ref, c, cfg.eps, 50, cfg.seed));
        j["error_ratio"] = num(error_ratio(ref, a, top_k_basis(c, cfg.k)));
        j["verification"] = verification_json(reports, all_passed);
        j["all_passed"] = all_passed;
    } else {
        j["verification"] = "skipped";
    }
    return j;
}

Json cmd_verify(const RunConfig& cfg, bool& all_passed) {
    if (cfg.inputs.size() != 2) throw ParameterError("verify needs --in MATRIX --in SAMPLE_CSV");
    const ColumnMatrix a = read_matrix(cfg.inputs[0], cfg.format);
    check_k_fits(cfg, a);
    ColumnSample s;
    {
        std::ifstream is(cfg.inputs[1]);
        if (!is) throw Error("cannot open " + cfg.inputs[1]);
        s = read_sample_csv(is);
    }
    const ColumnMatrix c = materialize(a, s);
    ColumnSample unweighted = s;
    for (auto& slot : unweighted.slots) slot.weight = 1.0;
    const ColumnMatrix c_plain = materialize(a, unweighted);
    const ReferenceSpectrum ref = prepare_reference(a, cfg.k);
    std::vector<VerificationReport> reports{
        verify_spectral_am(ref, c, cfg.eps), verify_pcp(ref, c, cfg.eps, 50, cfg.seed),
        verify_css(ref, c_plain, cfg.eps), verify_trace_bound(ref, c, cfg.eps)};
    Json j = base_report(cfg);
    j["matrix"] = matrix_summary(a);
    j["sample"] = sample_summary(s);
    j["verification"] = verification_json(reports, all_passed);
    j["all_passed"] = all_passed;
    return j;
}

struct BenchRow {
    std::string instance;
    std::string algorithm;
    std::size_t columns = 0;
    double error_ratio = 0.0;
    double wall_ms = 0.0;
};

Json cmd_bench(const RunConfig& cfg) {
    struct Instance {
        std::string name;
        SyntheticSpec spec;
    };
    std::vector<Instance> instances{
        {"dense-20x200-r3", {20, 200, 3, 0.1, 1.0, 0}},
        {"dense-50x2000-r5", {50, 2000, 5, 0.1, 1.0, 0}},
        {"sparse-100x1000-r5", {100, 1000, 5, 0.1, 0.2, 0}},
    };
    const std::vector<std::string> algorithms{"pcp", "css", "approx", "stream-css", "stream-pcp"};
    std::vector<BenchRow> rows(instances.size() * algorithms.size());
    std::vector<ColumnMatrix> mats(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        instances[i].spec.seed = make_rng(cfg.seed, "bench-instance", i)();
        mats[i] = generate(instances[i].spec);
    }

    auto task = [&](std::size_t id) {
        const std::size_t i = id / algorithms.size();
        const std::string& alg = algorithms[id % algorithms.size()];
        const ColumnMatrix& a = mats[i];
        RunConfig local = cfg;
        local.k = cfg.k > 0 ? std::min(cfg.k, std::min(a.rows(), a.cols())) : instances[i].spec.signal_rank;
        local.seed = make_rng(cfg.seed, "bench-task", id)();
        const auto t0 = std::chrono::steady_clock::now();
        ColumnMatrix c;
        Eigen::MatrixXd z;
        if (alg == "pcp" || alg == "css") {
            const ColumnSample s = sample(a, exact_ridge_scores(a, local.k),
                                          plan_from(local, alg == "pcp" ? SamplingGoal::pcp : SamplingGoal::css));
            c = materialize(a, s);
        } else if (alg == "approx") {
            const LowRankResult r = low_rank_approx(a, recursion_from(local));
            c = materialize(a, r.sample);
            z = r.basis;
        } else {
            StreamState st = stream_init(a.rows(), stream_params_from(
                                                       local, alg == "stream-css" ? StreamMode::css : StreamMode::pcp));
            for (const auto& col : a.columns()) stream_ingest(st, col);
            stream_finalize(st);
            c = reservoir_matrix(st);
        }
        if (z.size() == 0) z = top_k_basis(c, local.k);
        const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        const ReferenceSpectrum ref = prepare_reference(a, local.k);
        rows[id] = {instances[i].name, alg, c.cols(), error_ratio(ref, a, z), wall};
    };

    const std::size_t n_tasks = rows.size();
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n_tasks));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t id; (id = next.fetch_add(1)) < n_tasks;) task(id);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    auto os = open_out(require_output(cfg));
    os << "instance,algorithm,columns_sampled,error_ratio,wall_ms\n";
    Json table = Json::array();
    for (const BenchRow& r : rows) {
        os << r.instance << ',' << r.algorithm << ',' << r.columns << ',' << text::format_double(r.error_ratio)
           << ',' << text::format_double(r.wall_ms) << '\n';
        table.push_back({{"instance", r.instance},
                         {"algorithm", r.algorithm},
                         {"columns_sampled", r.columns},
                         {"error_ratio", num(r.error_ratio)}});
    }
    Json j = base_report(cfg);
    j["workers"] = workers;
    j["kernels"] = kernels::isa_name(kernels::active().isa);
    j["results"] = std::move(table);
    return j;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"scores", "approx",     "css",    "pcp",   "stream-css",
                                                "stream-pcp", "verify", "bench", "gen"};
    return names;
}

void RunConfig::validate() const {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end())
        throw ParameterError("unknown command '" + command + "'");
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("--eps must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("--delta must lie in (0, 1)");
    if (!(theta > 0.0 && theta <= 1.0)) throw ParameterError("--theta must lie in (0, 1]");
    if (!(oversample_c > 0.0) || !std::isfinite(oversample_c)) throw ParameterError("--c must be positive");
    const bool needs_k = command != "gen" && command != "bench";
    if (needs_k && k == 0) throw ParameterError(command + " needs --k >= 1");
    if (command == "verify" ? inputs.size() > 2 : inputs.size() > 1)
        throw ParameterError("--in given too many times");
}

Json RunConfig::to_json() const {
    Json j;
    j["k"] = k;
    j["eps"] = eps;
    j["delta"] = delta;
    j["theta"] = theta;
    j["c"] = oversample_c;
    j["seed"] = seed;
    j["format"] = format_name(format);
    j["in"] = inputs;
    j["out"] = output;
    return j;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        bool all_passed = true;
        Json report;
        if (cfg.command == "gen") report = cmd_gen(cfg);
        else if (cfg.command == "scores") report = cmd_scores(cfg);
        else if (cfg.command == "approx") report = cmd_approx(cfg);
        else if (cfg.command == "css") report = cmd_sample(cfg, SamplingGoal::css, all_passed);
        else if (cfg.command == "pcp") report = cmd_sample(cfg, SamplingGoal::pcp, all_passed);
        else if (cfg.command == "stream-css") report = cmd_stream(cfg, StreamMode::css, all_passed);
        else if (cfg.command == "stream-pcp") report = cmd_stream(cfg, StreamMode::pcp, all_passed);
        else if (cfg.command == "verify") report = cmd_verify(cfg, all_passed);
        else report = cmd_bench(cfg);
        out << report.dump(2) << '\n';
        if (cfg.command == "verify" && !all_passed) return static_cast<int>(ExitCode::unverified);
        return static_cast<int>(ExitCode::ok);
    } catch (const ParseError& e) {
        err << "ridgetap: " << cfg.command << ": " << e.what() << '\n';
        return static_cast<int>(ExitCode::input);
    } catch (const ParameterError& e) {
        err << "ridgetap: " << cfg.command << ": " << e.what() << '\n';
        return static_cast<int>(ExitCode::usage);
    } catch (const std::exception& e) {
        err << "ridgetap: " << cfg.command << ": " << e.what() << '\n';
        return static_cast<int>(ExitCode::failure);
    }
}

}  // namespace ridgetap

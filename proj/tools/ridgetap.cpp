// ridgetap <command> [--k N] [--eps F] [--delta F] [--theta F] [--c F]
//          [--seed U64] [--format mm|lines] [--in PATH] [--out PATH]

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "ridgetap/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Ridge leverage score sampling for low-rank approximation", "ridgetap"};
    app.require_subcommand(0, 0);
    ridgetap::RunConfig cfg;
    std::string format = "mm";

    app.add_option("command", cfg.command, "scores | approx | css | pcp | stream-css | stream-pcp | verify | bench | gen")
        ->required()
        ->check(CLI::IsMember(ridgetap::command_names()));
    app.add_option("--k", cfg.k, "target rank");
    app.add_option("--eps", cfg.eps, "accuracy, in (0, 1)");
    app.add_option("--delta", cfg.delta, "failure probability, in (0, 1)");
    app.add_option("--theta", cfg.theta, "score coarseness for approx, in (0, 1]; below 1 enables the coarse path");
    app.add_option("--c", cfg.oversample_c, "oversampling constant");
    app.add_option("--seed", cfg.seed, "64-bit seed");
    app.add_option("--format", format, "matrix file format")->check(CLI::IsMember({"mm", "lines"}));
    app.add_option("--in", cfg.inputs,
                   "input matrix; verify takes a second --in with the sample CSV; gen takes key=value spec")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("--out", cfg.output, "output artifact path");
    app.footer(
        "gen spec: --in n=20,d=200,rank=3,noise=0.1,sparsity=1\n"
        "environment: RIDGETAP_DENSE_LIMIT (dense SVD size guard, default 4096), "
        "RIDGETAP_SIMD=scalar|avx2|neon\n"
        "exit codes: 0 ok, 1 failure, 2 usage, 3 malformed input, 4 verification failed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ridgetap::ExitCode::usage);
    }
    cfg.format = format == "mm" ? ridgetap::MatrixFormat::matrix_market : ridgetap::MatrixFormat::sparse_lines;
    return ridgetap::run(cfg, std::cout, std::cerr);
}

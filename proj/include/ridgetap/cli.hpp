#pragma once

// Command dispatch behind the ridgetap executable. Every command prints one
// JSON report on stdout; artifacts go to --out.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "ridgetap/matrix_io.hpp"

namespace ridgetap {

enum class ExitCode : int { ok = 0, failure = 1, usage = 2, input = 3, unverified = 4 };

struct RunConfig {
    std::string command;
    std::vector<std::string> inputs;  ///< --in, repeatable for verify (matrix, then sample)
    std::string output;
    std::size_t k = 0;  ///< 0 means not given
    double eps = 0.5;
    double delta = 0.1;
    double theta = 1.0;
    double oversample_c = 4.0;
    std::uint64_t seed = 0;
    MatrixFormat format = MatrixFormat::matrix_market;

    /// Throws ParameterError on out-of-range values or missing required options.
    void validate() const;
    nlohmann::ordered_json to_json() const;
};

const std::vector<std::string>& command_names();

/// Runs one command. Errors are reported on `err` and mapped to exit codes.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace ridgetap

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ridgetap {

enum class Guarantee { spectral_am, pcp, css, trace_bound, monotonicity, fd_sandwich };

std::string_view guarantee_name(Guarantee g) noexcept;

/// Outcome of one guarantee check on a concrete sample. `witness` re-evaluates
/// to `achieved` (an eigenvector, a flattened projector basis, or a column).
struct VerificationReport {
    Guarantee guarantee = Guarantee::spectral_am;
    bool passed = false;
    double achieved = 0.0;        ///< the checked quantity at the witness
    double bound = 0.0;           ///< what it is compared against
    double tolerance_used = 0.0;
    std::string witness_kind;
    std::vector<double> witness;
    std::vector<std::pair<std::string, double>> details;  ///< ordered, for stable JSON

    double detail(std::string_view key) const;
};

nlohmann::ordered_json to_json(const VerificationReport& r);

/// Short git revision the binary was built from ("unknown" outside a checkout).
std::string_view build_id() noexcept;

}  // namespace ridgetap

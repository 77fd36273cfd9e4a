#include "ridgetap/report.hpp"

#include <cmath>
#include <limits>

#ifndef RIDGETAP_BUILD_ID
#define RIDGETAP_BUILD_ID "unknown"
#endif

namespace ridgetap {

std::string_view guarantee_name(Guarantee g) noexcept {
    switch (g) {
        case Guarantee::spectral_am: return "spectral_am";
        case Guarantee::pcp: return "pcp";
        case Guarantee::css: return "css";
        case Guarantee::trace_bound: return "trace_bound";
        case Guarantee::monotonicity: return "monotonicity";
        case Guarantee::fd_sandwich: return "fd_sandwich";
    }
    return "unknown";
}

double VerificationReport::detail(std::string_view key) const {
    for (const auto& [k, v] : details)
        if (k == key) return v;
    return std::numeric_limits<double>::quiet_NaN();
}

namespace {
// JSON has no infinities; keep them distinguishable from missing values.
nlohmann::ordered_json number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return nullptr;
    return v;
}
}  // namespace

nlohmann::ordered_json to_json(const VerificationReport& r) {
    nlohmann::ordered_json j;
    j["guarantee"] = guarantee_name(r.guarantee);
    j["passed"] = r.passed;
    j["achieved"] = number(r.achieved);
    j["bound"] = number(r.bound);
    j["tolerance_used"] = r.tolerance_used;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.details) details[k] = number(v);
    j["details"] = details;
    j["witness_kind"] = r.witness_kind;
    j["witness"] = r.witness;
    return j;
}

std::string_view build_id() noexcept { return RIDGETAP_BUILD_ID; }

}  // namespace ridgetap

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "ridgetap/kernels.hpp"

namespace ridgetap::kernels {
namespace {

const KernelTable* detect() noexcept {
    const char* env = std::getenv("RIDGETAP_SIMD");
    const std::string_view want = env ? env : "auto";
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && avx2_table()) return avx2_table();
    if (want == "neon" && neon_table()) return neon_table();
    if (const auto* t = avx2_table()) return t;
    if (const auto* t = neon_table()) return t;
    return &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
    static std::atomic<const KernelTable*> current{detect()};
    return current;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

bool select(Isa isa) noexcept {
    const KernelTable* t = nullptr;
    switch (isa) {
        case Isa::scalar: t = &scalar_table(); break;
        case Isa::avx2: t = avx2_table(); break;
        case Isa::neon: t = neon_table(); break;
    }
    if (!t) return false;
    slot().store(t, std::memory_order_relaxed);
    return true;
}

}  // namespace ridgetap::kernels

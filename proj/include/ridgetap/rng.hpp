#pragma once

// Counter-based random numbers (Philox4x32-10). A generator is fully
// determined by (seed, stream id, counter), so any sub-computation can be
// replayed without replaying the ones before it.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace ridgetap {

/// Mixes a purpose tag and up to two indices into a 64-bit stream id.
/// Different (purpose, a, b) triples give unrelated streams.
constexpr std::uint64_t stream_id(std::string_view purpose, std::uint64_t a = 0,
                                  std::uint64_t b = 0) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : purpose) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    h = mix(h ^ mix(a));
    h = mix(h ^ mix(b + 0x632be59bd9b4e019ULL));
    return h;
}

/// One Philox4x32 block, 10 rounds.
constexpr std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                                     std::array<std::uint32_t, 2> key) noexcept {
    std::uint32_t k0 = key[0];
    std::uint32_t k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return c;
}

class Philox {
public:
    using result_type = std::uint64_t;

    Philox(std::uint64_t seed, std::uint64_t stream) noexcept : key_(seed), stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const auto block = generate(counter_++);
        spare_ = (std::uint64_t{block[3]} << 32) | block[2];
        have_spare_ = true;
        return (std::uint64_t{block[1]} << 32) | block[0];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (only the cosine branch, so the draw
    /// count per call is fixed).
    double normal() noexcept {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// +1 or -1 with equal probability.
    double sign() noexcept { return ((*this)() >> 63) ? 1.0 : -1.0; }

    /// Uniform integer in [0, n) by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t n) noexcept {
        if (n <= 1) return 0;
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    std::uint64_t seed() const noexcept { return key_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::array<std::uint32_t, 4> generate(std::uint64_t ctr) const noexcept {
        return philox4x32_10({static_cast<std::uint32_t>(ctr), static_cast<std::uint32_t>(ctr >> 32),
                              static_cast<std::uint32_t>(stream_),
                              static_cast<std::uint32_t>(stream_ >> 32)},
                             {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
    }

    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::uint64_t spare_ = 0;
    bool have_spare_ = false;
};

/// Generator for the named sub-stream (purpose, a, b) of a run seed.
inline Philox make_rng(std::uint64_t seed, std::string_view purpose, std::uint64_t a = 0,
                       std::uint64_t b = 0) noexcept {
    return Philox(seed, stream_id(purpose, a, b));
}

}  // namespace ridgetap

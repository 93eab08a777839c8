#pragma once

#include <cstdint>
#include <random>

namespace rankshrink {

/// SplitMix64 finalizer; used only to derive well-separated child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

using Engine = std::mt19937_64;

/// Counter-based seeding contract. Replicate `b` of any Monte Carlo loop
/// draws from `spec.child(b).engine()`, so the stream a replicate sees
/// depends only on (master_seed, b) and never on scheduling.
struct RngSpec {
    std::uint64_t master_seed = 0;

    constexpr RngSpec child(std::uint64_t index) const noexcept {
        return RngSpec{mix64(master_seed ^ mix64(index + 0x632BE59BD9B4E019ULL))};
    }

    Engine engine() const { return Engine(mix64(master_seed)); }

    friend constexpr bool operator==(const RngSpec&, const RngSpec&) = default;
};

/// Fixed stream tags so independent consumers inside one trial never share
/// a child stream.
namespace stream {
inline constexpr std::uint64_t scenario = 1;
inline constexpr std::uint64_t boot1 = 2;
inline constexpr std::uint64_t boot2 = 3;
inline constexpr std::uint64_t oracle = 4;
inline constexpr std::uint64_t outer = 5;
inline constexpr std::uint64_t inner = 6;
}  // namespace stream

}  // namespace rankshrink

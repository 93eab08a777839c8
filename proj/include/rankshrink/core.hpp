#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rankshrink {

/// A vector of means (true or estimated). Non-empty, all entries finite.
class EffectVector {
public:
    EffectVector() = default;
    explicit EffectVector(std::vector<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& vec() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

/// A sample together with its ascending order statistics.
///
/// Ranks are ascending: rank 0 is the smallest value, rank p-1 the largest.
/// `inv_rank[k]` is the original (0-based) index of the k-th smallest
/// value, so `z[inv_rank[k]] == order[k]`. Ties keep original index order.
struct RankedSample {
    std::vector<double> z;
    std::vector<double> order;
    std::vector<std::uint32_t> inv_rank;

    std::size_t size() const noexcept { return z.size(); }
};

RankedSample rank_sample(std::span<const double> z);

/// Writes the ascending permutation of `values` into `inv_rank` (resized to
/// values.size()). No validation; this is the hot-path variant used inside
/// Monte Carlo loops.
void sort_permutation(std::span<const double> values, std::vector<std::uint32_t>& inv_rank);

enum class BiasSource { oracle, boot1, boot2, smoothed };

std::string_view to_string(BiasSource s) noexcept;

/// Per-rank bias estimates, indexed by ascending rank.
struct BiasCurve {
    std::vector<double> beta;
    BiasSource source = BiasSource::boot1;
    std::uint64_t replicates = 0;  // Monte Carlo datasets simulated

    std::size_t size() const noexcept { return beta.size(); }
};

}  // namespace rankshrink

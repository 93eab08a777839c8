#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rankshrink {

/// Simulates replicate `b` and writes its per-feature statistic (length p).
using ReplicateFn = std::function<void(std::uint64_t b, std::span<double> statistic)>;

/// Monte Carlo estimate of the per-rank bias
///
///     beta_k = E[ stat_(k) - truth_{i(k)} ]
///
/// averaged over B replicates. Replicates are grouped into fixed-size
/// blocks; each block is summed in replicate order and block partials are
/// combined in block order, so the result does not depend on thread count.
std::vector<double> rank_bias_monte_carlo(std::span<const double> truth, std::uint64_t replicates,
                                          const ReplicateFn& simulate);

inline constexpr std::uint64_t kReplicateBlock = 16;

}  // namespace rankshrink

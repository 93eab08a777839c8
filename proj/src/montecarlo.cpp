#include "rankshrink/montecarlo.hpp"

#include <algorithm>

#include "rankshrink/core.hpp"
#include "rankshrink/errors.hpp"
#include "rankshrink/parallel.hpp"
#include "rankshrink/simd/kernels.hpp"

namespace rankshrink {

std::vector<double> rank_bias_monte_carlo(std::span<const double> truth, std::uint64_t replicates,
                                          const ReplicateFn& simulate) {
    if (replicates == 0) throw InvalidInput("Monte Carlo budget must be >= 1");
    const std::size_t p = truth.size();
    const auto& kern = simd::kernels();

    const std::uint64_t blocks = (replicates + kReplicateBlock - 1) / kReplicateBlock;
    std::vector<std::vector<double>> partial(blocks);

    parallel_for(blocks, [&](std::size_t blk) {
        std::vector<double> acc(p, 0.0);
        std::vector<double> stat(p);
        std::vector<std::uint32_t> inv;
        const std::uint64_t lo = blk * kReplicateBlock;
        const std::uint64_t hi = std::min(replicates, lo + kReplicateBlock);
        for (std::uint64_t b = lo; b < hi; ++b) {
            simulate(b, stat);
            sort_permutation(stat, inv);
            kern.accumulate_gathered_diff(acc.data(), stat.data(), truth.data(), inv.data(), p);
        }
        partial[blk] = std::move(acc);
    });

    std::vector<double> beta(p, 0.0);
    for (const auto& acc : partial) kern.add_inplace(beta.data(), acc.data(), p);
    kern.scale_inplace(beta.data(), 1.0 / static_cast<double>(replicates), p);
    return beta;
}

}  // namespace rankshrink

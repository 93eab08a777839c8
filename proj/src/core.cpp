#include "rankshrink/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rankshrink/errors.hpp"

namespace rankshrink {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    if (v.empty()) throw InvalidInput(std::string(what) + ": empty input");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw InvalidInput(std::string(what) + ": non-finite entry at index " + std::to_string(i));
        }
    }
}

}  // namespace

EffectVector::EffectVector(std::vector<double> values) : values_(std::move(values)) {
    require_finite(values_, "EffectVector");
}

void sort_permutation(std::span<const double> values, std::vector<std::uint32_t>& inv_rank) {
    inv_rank.resize(values.size());
    std::iota(inv_rank.begin(), inv_rank.end(), 0u);
    // (value, index) lexicographic order == stable sort by value.
    std::sort(inv_rank.begin(), inv_rank.end(), [&](std::uint32_t a, std::uint32_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
}

RankedSample rank_sample(std::span<const double> z) {
    require_finite(z, "rank_sample");
    RankedSample out;
    out.z.assign(z.begin(), z.end());
    sort_permutation(z, out.inv_rank);
    out.order.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) out.order[k] = z[out.inv_rank[k]];
    return out;
}

std::string_view to_string(BiasSource s) noexcept {
    switch (s) {
        case BiasSource::oracle: return "oracle";
        case BiasSource::boot1: return "boot1";
        case BiasSource::boot2: return "boot2";
        case BiasSource::smoothed: return "smoothed";
    }
    return "unknown";
}

}  // namespace rankshrink

#pragma once

// Selection-bias correction for the many-normal-means model
// z_i ~ N(mu_i, sigma^2).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankshrink/core.hpp"
#include "rankshrink/rng.hpp"

namespace rankshrink {

struct GaussianModel {
    EffectVector mu;
    double sigma = 1.0;

    GaussianModel(EffectVector means, double sd = 1.0);
};

enum class EstimatorTag { naive, oracle, boot1, boot2, james_stein, tweedie };

std::string_view to_string(EstimatorTag t) noexcept;

/// Output of every estimator. Per-index vectors are in the caller's original
/// order; per-rank vectors are in ascending rank order.
struct EffectEstimates {
    EstimatorTag tag = EstimatorTag::naive;
    std::vector<double> naive;
    std::vector<double> corrected;
    std::vector<double> order;
    std::vector<std::uint32_t> inv_rank;
    std::vector<double> beta;       // bias subtracted at each rank (empty when not rank based)
    std::vector<double> beta_first; // boot2 only: the first-order estimate before correction
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return naive.size(); }
};

/// Builds estimates with corrected[i(k)] = order[k] - beta[k].
EffectEstimates subtract_rank_bias(const RankedSample& z, std::vector<double> beta, EstimatorTag tag);

/// Draws one dataset z ~ N(mu, sigma^2 I) from rng.engine().
void simulate_gaussian(std::span<const double> mu, double sigma, const RngSpec& rng, std::span<double> out);

BiasCurve mc_bias(const EffectVector& mu, std::uint64_t replicates, const RngSpec& rng, double sigma = 1.0);
BiasCurve mc_bias(const GaussianModel& model, std::uint64_t replicates, const RngSpec& rng);

/// Bias-curve smoothing applied before subtraction. window == 1 disables it.
struct Smoothing {
    std::size_t window = 1;
};

/// Nearest odd integer to p/100, at least 1 (ties round up).
std::size_t default_window(std::size_t p);

/// Centered moving average over rank. Near the ends the window is clipped
/// to the available ranks, so rank 0 averages ranks [0, h].
BiasCurve smooth_bias(const BiasCurve& beta, std::size_t window);

EffectEstimates oracle_estimates(const RankedSample& z, const EffectVector& mu_true, std::uint64_t replicates,
                                 const RngSpec& rng, Smoothing smoothing = {});

/// First-order parametric bootstrap: beta-hat = beta(mu-hat = z).
EffectEstimates boot1(const RankedSample& z, std::uint64_t replicates, const RngSpec& rng,
                      Smoothing smoothing = {}, double sigma = 1.0);

/// Second-order parametric bootstrap.
///
///   beta1   = beta(z)                                   (B_inner replicates)
///   bb      = beta1 - mean_b beta(z*_b),  z*_b ~ N(z, I) (B_outer datasets)
///   beta2   = beta1 + bb
EffectEstimates boot2(const RankedSample& z, std::uint64_t outer, std::uint64_t inner, const RngSpec& rng,
                      Smoothing smoothing = {}, double sigma = 1.0);

/// Positive-part James-Stein toward the grand mean. Requires p >= 4.
EffectEstimates james_stein(std::span<const double> z);

inline constexpr std::uint64_t kDefaultBootSamples = 100;
inline constexpr std::uint64_t kDefaultOracleSamples = 10000;

}  // namespace rankshrink

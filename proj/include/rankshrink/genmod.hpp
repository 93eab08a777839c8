#pragma once

// Parametric-bootstrap bias correction for a general model with
// parameters of interest mu and nuisance parameters Theta.
//
// A model plugs in by satisfying the ParametricModel concept:
//
//   Params  - a full parameter point (mu and Theta)
//   Dataset - whatever simulate() produces and fit() consumes
//   simulate(params, rng) -> Dataset     draws from rng.engine() only
//   fit(dataset)          -> Params      maximum likelihood
//   estimates(params)     -> mu-hat used for ranking (the naive estimate)
//   means(params)         -> mu, the target when params are the truth
//
// Optionally `bounds()` returning {lo, hi} clamps corrected estimates to the
// parameter space.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankshrink/core.hpp"
#include "rankshrink/errors.hpp"
#include "rankshrink/gauss_bias.hpp"
#include "rankshrink/montecarlo.hpp"
#include "rankshrink/parallel.hpp"
#include "rankshrink/rng.hpp"
#include "rankshrink/simd/kernels.hpp"

namespace rankshrink {

template <class M>
concept ParametricModel = requires(const M& m, const typename M::Params& params, const typename M::Dataset& data,
                                   const RngSpec& rng) {
    { m.simulate(params, rng) } -> std::same_as<typename M::Dataset>;
    { m.fit(data) } -> std::same_as<typename M::Params>;
    { m.estimates(params) } -> std::convertible_to<std::span<const double>>;
    { m.means(params) } -> std::convertible_to<std::span<const double>>;
};

template <class M>
concept BoundedModel = ParametricModel<M> && requires(const M& m) {
    { m.bounds() } -> std::convertible_to<std::pair<double, double>>;
};

inline constexpr int kFitRetries = 3;

/// simulate + fit with up to kFitRetries fresh child seeds on NumericalFailure.
/// Attempt 0 uses `rng` itself.
template <ParametricModel M>
typename M::Params simulate_and_fit(const M& model, const typename M::Params& params, const RngSpec& rng) {
    std::string last;
    for (int attempt = 0; attempt <= kFitRetries; ++attempt) {
        RngSpec r = attempt == 0 ? rng : rng.child(0xF17ULL + static_cast<std::uint64_t>(attempt));
        try {
            return model.fit(model.simulate(params, r));
        } catch (const NumericalFailure& e) {
            last = e.what();
        }
    }
    throw NumericalFailure("replicate fit failed after " + std::to_string(kFitRetries) + " retries: " + last,
                           kFitRetries + 1);
}

/// beta_k = E[mu-hat_(k) - mu_{i(k)}] under `params`, by Monte Carlo over B
/// datasets. Replicate b simulates from rng.child(b).
template <ParametricModel M>
BiasCurve generic_bias(const M& model, const typename M::Params& params, std::uint64_t replicates,
                       const RngSpec& rng) {
    if (replicates == 0) throw InvalidInput("generic_bias: B must be >= 1");
    std::span<const double> truth = model.means(params);
    BiasCurve curve;
    curve.beta = rank_bias_monte_carlo(truth, replicates, [&](std::uint64_t b, std::span<double> stat) {
        typename M::Params fitted = simulate_and_fit(model, params, rng.child(b));
        std::span<const double> est = model.estimates(fitted);
        std::copy(est.begin(), est.end(), stat.begin());
    });
    curve.source = BiasSource::boot1;
    curve.replicates = replicates;
    return curve;
}

struct BootBudget {
    std::uint64_t replicates = kDefaultBootSamples;  // first-order B, and B_inner for order 2
    std::uint64_t outer = kDefaultBootSamples;       // B_outer, order 2 only
};

/// Parametric bootstrap on a general model: fit, compute the bias at the
/// fitted parameters, subtract per rank. order == 2 nests the scheme the
/// same way as boot2 (same stream layout, so the Gaussian wrapper matches
/// boot1/boot2 exactly).
template <ParametricModel M>
EffectEstimates generic_boot(const M& model, const typename M::Dataset& data, BootBudget budget, int order,
                             const RngSpec& rng, Smoothing smoothing = {}) {
    if (order != 1 && order != 2) throw InvalidInput("generic_boot: order must be 1 or 2");
    if (budget.replicates == 0 || (order == 2 && budget.outer == 0)) {
        throw InvalidInput("generic_boot: budgets must be >= 1");
    }
    const typename M::Params fitted = model.fit(data);
    std::span<const double> stat = model.estimates(fitted);
    const RankedSample ranked = rank_sample(stat);
    const std::size_t p = ranked.size();
    const auto& kern = simd::kernels();

    std::vector<double> beta;
    std::vector<double> first;
    if (order == 1) {
        beta = generic_bias(model, fitted, budget.replicates, rng).beta;
    } else {
        first = generic_bias(model, fitted, budget.replicates, rng.child(stream::inner)).beta;
        const RngSpec outer_rng = rng.child(stream::outer);
        std::vector<std::vector<double>> resampled(budget.outer);
        parallel_for(budget.outer, [&](std::size_t b) {
            const RngSpec rb = outer_rng.child(b);
            typename M::Params refit = simulate_and_fit(model, fitted, rb);
            resampled[b] = generic_bias(model, refit, budget.replicates, rb.child(stream::inner)).beta;
        });
        std::vector<double> mean_star(p, 0.0);
        for (const auto& r : resampled) kern.add_inplace(mean_star.data(), r.data(), p);
        kern.scale_inplace(mean_star.data(), 1.0 / static_cast<double>(budget.outer), p);
        beta.resize(p);
        for (std::size_t k = 0; k < p; ++k) beta[k] = first[k] + (first[k] - mean_star[k]);
    }

    if (smoothing.window > 1) {
        std::size_t w = std::min(smoothing.window, p % 2 ? p : p - 1);
        beta = smooth_bias(BiasCurve{std::move(beta), BiasSource::boot1, budget.replicates}, w).beta;
    }

    EffectEstimates out = subtract_rank_bias(ranked, std::move(beta), order == 1 ? EstimatorTag::boot1 : EstimatorTag::boot2);
    out.beta_first = std::move(first);
    if constexpr (BoundedModel<M>) {
        auto [lo, hi] = model.bounds();
        for (double& v : out.corrected) v = std::clamp(v, lo, hi);
    }
    return out;
}

/// Oracle on a general model: bias from the true parameters, applied to the
/// observed estimates.
template <ParametricModel M>
EffectEstimates generic_oracle(const M& model, const typename M::Params& truth, std::span<const double> observed,
                               std::uint64_t replicates, const RngSpec& rng) {
    if (observed.size() != model.means(truth).size()) throw InvalidInput("generic_oracle: length mismatch");
    const RankedSample ranked = rank_sample(observed);
    EffectEstimates out =
        subtract_rank_bias(ranked, generic_bias(model, truth, replicates, rng).beta, EstimatorTag::oracle);
    if constexpr (BoundedModel<M>) {
        auto [lo, hi] = model.bounds();
        for (double& v : out.corrected) v = std::clamp(v, lo, hi);
    }
    return out;
}

/// The many-normal-means model in ParametricModel form; mu-hat = z.
class GaussianMeansModel {
public:
    using Dataset = std::vector<double>;
    struct Params {
        std::vector<double> mu;
    };

    explicit GaussianMeansModel(double sigma = 1.0) : sigma_(sigma) {}

    Dataset simulate(const Params& params, const RngSpec& rng) const {
        Dataset z(params.mu.size());
        simulate_gaussian(params.mu, sigma_, rng, z);
        return z;
    }
    Params fit(const Dataset& z) const { return Params{z}; }
    std::span<const double> estimates(const Params& params) const { return params.mu; }
    std::span<const double> means(const Params& params) const { return params.mu; }

private:
    double sigma_;
};

static_assert(ParametricModel<GaussianMeansModel>);

}  // namespace rankshrink

#include "rankshrink/gauss_bias.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankshrink/errors.hpp"
#include "rankshrink/montecarlo.hpp"
#include "rankshrink/parallel.hpp"
#include "rankshrink/simd/kernels.hpp"

namespace rankshrink {

GaussianModel::GaussianModel(EffectVector means, double sd) : mu(std::move(means)), sigma(sd) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("GaussianModel: sigma must be positive");
}

std::string_view to_string(EstimatorTag t) noexcept {
    switch (t) {
        case EstimatorTag::naive: return "naive";
        case EstimatorTag::oracle: return "oracle";
        case EstimatorTag::boot1: return "boot1";
        case EstimatorTag::boot2: return "boot2";
        case EstimatorTag::james_stein: return "james_stein";
        case EstimatorTag::tweedie: return "tweedie";
    }
    return "unknown";
}

EffectEstimates subtract_rank_bias(const RankedSample& z, std::vector<double> beta, EstimatorTag tag) {
    if (beta.size() != z.size()) throw InvalidInput("bias curve length does not match sample");
    EffectEstimates out;
    out.tag = tag;
    out.naive = z.z;
    out.order = z.order;
    out.inv_rank = z.inv_rank;
    out.corrected.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) out.corrected[z.inv_rank[k]] = z.order[k] - beta[k];
    out.beta = std::move(beta);
    return out;
}

void simulate_gaussian(std::span<const double> mu, double sigma, const RngSpec& rng, std::span<double> out) {
    Engine eng = rng.engine();
    std::normal_distribution<double> normal;
    for (double& v : out) v = normal(eng);
    simd::kernels().shift_scale(mu.data(), out.data(), sigma, out.data(), mu.size());
}

BiasCurve mc_bias(const EffectVector& mu, std::uint64_t replicates, const RngSpec& rng, double sigma) {
    if (replicates == 0) throw InvalidInput("mc_bias: B must be >= 1");
    if (mu.size() == 0) throw InvalidInput("mc_bias: empty mean vector");
    auto truth = mu.values();
    BiasCurve curve;
    curve.beta = rank_bias_monte_carlo(truth, replicates, [&](std::uint64_t b, std::span<double> stat) {
        simulate_gaussian(truth, sigma, rng.child(b), stat);
    });
    curve.source = BiasSource::boot1;
    curve.replicates = replicates;
    return curve;
}

BiasCurve mc_bias(const GaussianModel& model, std::uint64_t replicates, const RngSpec& rng) {
    return mc_bias(model.mu, replicates, rng, model.sigma);
}

std::size_t default_window(std::size_t p) {
    double x = static_cast<double>(p) / 100.0;
    auto half = static_cast<long>(std::floor((x - 1.0) / 2.0 + 0.5));
    long w = 2 * std::max(0L, half) + 1;
    while (w > 1 && static_cast<std::size_t>(w) > p) w -= 2;
    return static_cast<std::size_t>(w);
}

BiasCurve smooth_bias(const BiasCurve& beta, std::size_t window) {
    const std::size_t p = beta.size();
    if (window == 0 || window % 2 == 0) throw InvalidInput("smooth_bias: window must be a positive odd integer");
    if (window > p) throw InvalidInput("smooth_bias: window exceeds curve length");

    std::vector<double> prefix(p + 1, 0.0);
    for (std::size_t k = 0; k < p; ++k) prefix[k + 1] = prefix[k] + beta.beta[k];

    const std::size_t h = window / 2;
    BiasCurve out;
    out.source = BiasSource::smoothed;
    out.replicates = beta.replicates;
    out.beta.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
        std::size_t lo = k >= h ? k - h : 0;
        std::size_t hi = std::min(p - 1, k + h);
        if (window == 1) {
            out.beta[k] = beta.beta[k];
        } else {
            out.beta[k] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
        }
    }
    return out;
}

namespace {

std::vector<double> maybe_smooth(std::vector<double> beta, std::uint64_t replicates, Smoothing s) {
    if (s.window <= 1) return beta;
    BiasCurve c{std::move(beta), BiasSource::boot1, replicates};
    return smooth_bias(c, std::min(s.window, c.size() % 2 ? c.size() : c.size() - 1)).beta;
}

void require_sample(const RankedSample& z, const char* who) {
    if (z.size() == 0) throw InvalidInput(std::string(who) + ": empty sample");
    if (z.order.size() != z.size() || z.inv_rank.size() != z.size()) {
        throw InvalidInput(std::string(who) + ": malformed ranked sample");
    }
}

}  // namespace

EffectEstimates oracle_estimates(const RankedSample& z, const EffectVector& mu_true, std::uint64_t replicates,
                                 const RngSpec& rng, Smoothing smoothing) {
    require_sample(z, "oracle_estimates");
    if (mu_true.size() != z.size()) throw InvalidInput("oracle_estimates: mu_true length does not match z");
    BiasCurve beta = mc_bias(mu_true, replicates, rng);
    return subtract_rank_bias(z, maybe_smooth(std::move(beta.beta), replicates, smoothing), EstimatorTag::oracle);
}

EffectEstimates boot1(const RankedSample& z, std::uint64_t replicates, const RngSpec& rng, Smoothing smoothing,
                      double sigma) {
    require_sample(z, "boot1");
    BiasCurve beta = mc_bias(EffectVector(z.z), replicates, rng, sigma);
    return subtract_rank_bias(z, maybe_smooth(std::move(beta.beta), replicates, smoothing), EstimatorTag::boot1);
}

EffectEstimates boot2(const RankedSample& z, std::uint64_t outer, std::uint64_t inner, const RngSpec& rng,
                      Smoothing smoothing, double sigma) {
    require_sample(z, "boot2");
    if (outer == 0 || inner == 0) throw InvalidInput("boot2: outer and inner budgets must be >= 1");
    const std::size_t p = z.size();
    const auto& kern = simd::kernels();

    const EffectVector mu_hat(z.z);
    std::vector<double> first = mc_bias(mu_hat, inner, rng.child(stream::inner), sigma).beta;

    const RngSpec outer_rng = rng.child(stream::outer);
    std::vector<std::vector<double>> resampled(outer);
    parallel_for(outer, [&](std::size_t b) {
        const RngSpec rb = outer_rng.child(b);
        std::vector<double> z_star(p);
        simulate_gaussian(mu_hat.values(), sigma, rb, z_star);
        resampled[b] = mc_bias(EffectVector(std::move(z_star)), inner, rb.child(stream::inner), sigma).beta;
    });

    std::vector<double> mean_star(p, 0.0);
    for (const auto& r : resampled) kern.add_inplace(mean_star.data(), r.data(), p);
    kern.scale_inplace(mean_star.data(), 1.0 / static_cast<double>(outer), p);

    std::vector<double> second(p);
    for (std::size_t k = 0; k < p; ++k) second[k] = first[k] + (first[k] - mean_star[k]);

    EffectEstimates out =
        subtract_rank_bias(z, maybe_smooth(std::move(second), inner, smoothing), EstimatorTag::boot2);
    out.beta_first = std::move(first);
    return out;
}

EffectEstimates james_stein(std::span<const double> z) {
    const std::size_t p = z.size();
    if (p < 4) throw InvalidInput("james_stein: needs at least 4 values");
    RankedSample ranked = rank_sample(z);

    double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(p);
    double s = 0.0;
    for (double v : z) s += (v - mean) * (v - mean);
    double factor = s > 0.0 ? std::max(0.0, 1.0 - static_cast<double>(p - 3) / s) : 0.0;

    EffectEstimates out;
    out.tag = EstimatorTag::james_stein;
    out.naive.assign(z.begin(), z.end());
    out.corrected.resize(p);
    for (std::size_t i = 0; i < p; ++i) out.corrected[i] = mean + factor * (z[i] - mean);
    out.order = std::move(ranked.order);
    out.inv_rank = std::move(ranked.inv_rank);
    return out;
}

}  // namespace rankshrink

#pragma once

// Empirical-Bayes comparator: Lindsey's method for the marginal density of
// z (Poisson regression on binned counts with a polynomial log-density) and
// Tweedie's posterior-mean correction E[mu | z] = z + d/dz log f(z).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rankshrink/gauss_bias.hpp"

namespace rankshrink {

struct BinnedCounts {
    std::vector<double> edges;            // J + 1, strictly increasing
    std::vector<std::uint64_t> counts;    // J
    double width = 0.0;

    std::size_t bins() const noexcept { return counts.size(); }
    std::uint64_t total() const noexcept;
    double center(std::size_t j) const noexcept { return edges[j] + 0.5 * width; }
};

inline constexpr std::size_t kDefaultBins = 90;

/// Equal-width bins over [min(z) - d, max(z) + d] with d = 1% of the range
/// (d = 0.5 when all values coincide). Requires J >= 10.
BinnedCounts bin_z(std::span<const double> z, std::size_t bins);

/// Fitted log-density log f(z) = sum_m coeffs[m] * u^m, u = (z - center) / scale.
struct DensityModel {
    std::vector<double> coeffs;
    int degree = 0;
    double center = 0.0;
    double scale = 1.0;
    double log_offset = 0.0;  // log(n * bin width); expected count = exp(offset + log f)
    double lo = 0.0;          // binned range
    double hi = 0.0;
    int iterations = 0;
    double deviance = 0.0;

    double log_density(double z) const noexcept;
    double log_density_derivative(double z) const noexcept;
    double density(double z) const noexcept;

    /// Fitted Poisson means at the bin centers of `bins`.
    std::vector<double> expected_counts(const BinnedCounts& bins) const;
};

struct LindseyOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;  // relative deviance change
};

/// Poisson regression of bin counts on a degree-d polynomial basis by IRLS
/// with canonical log link and offset log(n * width). Throws
/// NumericalFailure when the design is unidentifiable or IRLS diverges.
DensityModel fit_lindsey(const BinnedCounts& bins, int degree, LindseyOptions options = {});

/// mu_i = z_i + l'(z_i), using the analytic derivative of the fitted
/// log-density. Values outside the binned range still get an estimate, with
/// a warning attached.
EffectEstimates tweedie_correct(std::span<const double> z, const DensityModel& model);

/// bin_z + fit_lindsey + tweedie_correct.
EffectEstimates lindsey_tweedie(std::span<const double> z, int degree, std::size_t bins = kDefaultBins);

}  // namespace rankshrink

#pragma once

// One-way ANOVA with a 3-level categorical predictor per feature:
//
//   Y_ij = theta_{j, X_ij} + eps_ij,  eps_ij ~ N(0, sigma_j^2)
//
// The parameter of interest for feature j is its coefficient of
// determination rho^2_j; (theta_j, sigma^2_j) are nuisance parameters.
// Resimulation holds the design X fixed.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "rankshrink/rng.hpp"

namespace rankshrink {

inline constexpr double kRho2Cap = 0.99;

/// Class labels (column-major n x p, values 0/1/2) and per-feature counts.
struct Anova3Design {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<std::uint8_t> labels;
    std::vector<std::array<std::uint32_t, 3>> counts;

    std::span<const std::uint8_t> column(std::size_t j) const { return {labels.data() + j * n, n}; }
};

/// Per-feature sufficient statistics: class means and within-class sum of
/// squares. This is the dataset the model simulates and fits.
struct Anova3Data {
    std::vector<std::array<double, 3>> class_means;
    std::vector<double> within_ss;
};

struct Anova3Params {
    std::vector<double> rho2;                 // mu: plug-in (clamped) or true rho^2
    std::vector<double> r2;                   // raw sample R^2, the naive estimate
    std::vector<std::array<double, 3>> theta; // group means
    std::vector<double> sigma2;               // noise variance
};

/// Fit of a single feature.
struct Anova3Fit {
    double r2 = 0.0;           // 1 - RSS/TSS, 0 when TSS == 0
    double plug_in_rho2 = 0.0; // r2 clamped to [0, 0.99]
    std::array<double, 3> theta{};
    double sigma2 = 0.0;       // MLE RSS/n, rescaled when the plug-in is capped
};

/// Fit one raw column. Throws InvalidInput if a class has < 2 observations.
Anova3Fit anova3_fit(std::span<const double> y, std::span<const std::uint8_t> labels);

/// Fit from sufficient statistics (class counts, means, within SS).
Anova3Fit anova3_fit(const std::array<std::uint32_t, 3>& counts, const std::array<double, 3>& means,
                     double within_ss);

/// delta such that theta = (-delta, 0, delta) with unit noise and equal
/// class probabilities has the given rho^2.
double anova3_delta(double rho2);

class Anova3Model {
public:
    using Dataset = Anova3Data;
    using Params = Anova3Params;

    explicit Anova3Model(std::shared_ptr<const Anova3Design> design);

    /// Draws sufficient statistics: class means ~ N(theta_k, sigma^2/n_k),
    /// within SS ~ sigma^2 chi^2_{n-3}, independently. Same law as
    /// redrawing every eps_ij with X fixed.
    Dataset simulate(const Params& params, const RngSpec& rng) const;
    Params fit(const Dataset& data) const;
    std::span<const double> estimates(const Params& params) const { return params.r2; }
    std::span<const double> means(const Params& params) const { return params.rho2; }
    std::pair<double, double> bounds() const { return {0.0, 1.0}; }

    /// True parameters for target rho^2 values: theta = (-delta, 0, delta), sigma^2 = 1.
    Params truth(std::span<const double> rho2) const;

    const Anova3Design& design() const { return *design_; }
    std::size_t size() const { return design_->p; }

private:
    std::shared_ptr<const Anova3Design> design_;
};

/// A generated problem: the model (with its fixed design), true parameters,
/// and the raw responses Y (column-major n x p) with their summaries.
struct Anova3Instance {
    Anova3Model model;
    Anova3Params truth;
    std::vector<double> y;
    Anova3Data data;
};

/// Samples X uniformly over the 3 classes (redrawing any column with fewer
/// than 2 observations in some class), then Y from the true model.
Anova3Instance anova3_make(std::size_t n, std::size_t p, std::span<const double> rho2, const RngSpec& rng);

/// Summaries of raw responses under a design.
Anova3Data anova3_summarize(const Anova3Design& design, std::span<const double> y);

}  // namespace rankshrink

#pragma once

// Simulation studies: named scenarios, per-trial MSE-ratio tables, and the
// large-p experiment relating the frequentist rank bias to the Bayesian
// bias z - E[mu | z].

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rankshrink/anova3.hpp"
#include "rankshrink/core.hpp"
#include "rankshrink/gauss_bias.hpp"
#include "rankshrink/rng.hpp"

namespace rankshrink {

enum class Family { gaussian, anova3 };

std::string_view to_string(Family f) noexcept;
Family parse_family(std::string_view s);

enum class EstimatorKind { naive, boot1, boot2, oracle, lindsey, james_stein };

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::naive;
    int degree = 0;  // lindsey only

    /// "boot1", "boot2", "oracle", "lindsey5", "james_stein", "naive"
    std::string name() const;
    static EstimatorSpec parse(std::string_view s);
    friend bool operator==(const EstimatorSpec&, const EstimatorSpec&) = default;
};

std::vector<EstimatorSpec> parse_estimators(std::string_view comma_list);

struct ScenarioSpec {
    Family family = Family::gaussian;
    std::string scheme = "G1";  // G1..G6, S (990 at 0 / 10 at 6), C1..C3
    std::size_t p = 1000;
    std::size_t n = 50;         // anova3 only
    std::size_t trials = 20;
    std::vector<EstimatorSpec> estimators;
    std::uint64_t boot_samples = kDefaultBootSamples;
    std::uint64_t outer = kDefaultBootSamples;
    std::uint64_t inner = kDefaultBootSamples;
    std::uint64_t oracle_samples = kDefaultOracleSamples;
    std::size_t window = 0;     // 0: default_window(p)
    std::size_t bins = 90;
    std::uint64_t seed = 0;

    std::size_t resolved_window() const;
};

/// Expands "G1..G6" or "G1,G3" into scheme ids.
std::vector<std::string> expand_schemes(std::string_view text);

/// Family the scheme id belongs to; throws ConfigError for unknown ids.
Family scheme_family(std::string_view scheme);

struct GaussianDraw {
    EffectVector mu;
    std::vector<double> z;
};

struct Anova3Draw {
    Anova3Instance instance;
};

using ScenarioDraw = std::variant<GaussianDraw, Anova3Draw>;

/// Deterministic in (spec.seed, trial).
ScenarioDraw gen_scenario(const ScenarioSpec& spec, std::size_t trial);

/// True means for a Gaussian scheme (random schemes draw from `rng`).
std::vector<double> gaussian_scheme_means(std::string_view scheme, std::size_t p, const RngSpec& rng);

/// True rho^2 values for a categorical scheme.
std::vector<double> anova3_scheme_rho2(std::string_view scheme, std::size_t p, const RngSpec& rng);

struct EstimatorResult {
    std::string name;
    std::vector<double> ratios;  // per trial
    double mean = 0.0;
    double std_error = 0.0;
};

struct TrialReport {
    ScenarioSpec spec;
    std::vector<double> naive_sse;  // per trial
    std::vector<EstimatorResult> results;  // "naive" first, then spec.estimators in order

    const EstimatorResult* find(std::string_view name) const;
};

/// Throws ConfigError if an estimator does not apply to the family.
void validate(const ScenarioSpec& spec);

/// Runs spec.trials independent trials; ratio = SSE(estimator) / SSE(naive).
TrialReport run_table(const ScenarioSpec& spec);

/// Estimates of a single trial, for curve export.
struct TrialEstimates {
    std::vector<double> truth;     // mu or rho^2
    std::vector<double> naive;
    std::vector<EffectEstimates> estimates;  // spec.estimators order
};

TrialEstimates run_trial(const ScenarioSpec& spec, std::size_t trial);

// ---------------------------------------------------------------------------
// Large-p experiment

enum class PriorKind { two_point, uniform };

struct BoundedPrior {
    PriorKind kind = PriorKind::two_point;
    double a = 2.0;  // support {-a, a} or [-a, a]

    static BoundedPrior parse(std::string_view name, double a);
    double sample(Engine& eng) const;
};

/// Marginal of z = mu + N(0,1) with mu ~ prior.
double marginal_cdf(const BoundedPrior& prior, double z);
double marginal_pdf(const BoundedPrior& prior, double z);
double marginal_pdf_derivative(const BoundedPrior& prior, double z);

/// t-quantile of the marginal by bisection to 1e-10.
double marginal_quantile(const BoundedPrior& prior, double t);

/// E[mu | z] via Tweedie on the analytic marginal (a*tanh(a z) for the
/// two-point prior).
double posterior_mean(const BoundedPrior& prior, double z);

/// E[mu | z] by direct integration against the prior (adaptive quadrature
/// for the uniform prior, a finite sum for the two-point prior).
double posterior_mean_direct(const BoundedPrior& prior, double z);

struct ConvergenceRow {
    std::size_t p = 0;
    std::size_t rank = 0;     // 1-based ascending rank floor(t p)
    double frequentist = 0.0; // MC mean of z_(k) - mu_{i(k)}
    double std_error = 0.0;
    double limit = 0.0;       // F^{-1}(t) - E[mu | z = F^{-1}(t)]
    double gap = 0.0;         // frequentist - limit
};

std::vector<ConvergenceRow> theorem1_experiment(const BoundedPrior& prior, double t,
                                                std::span<const std::size_t> p_grid, std::size_t replicates,
                                                const RngSpec& rng);

}  // namespace rankshrink

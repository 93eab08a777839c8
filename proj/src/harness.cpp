#include "rankshrink/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

#include "rankshrink/errors.hpp"
#include "rankshrink/genmod.hpp"
#include "rankshrink/parallel.hpp"
#include "rankshrink/simd/kernels.hpp"
#include "rankshrink/tweedie.hpp"

namespace rankshrink {

std::string_view to_string(Family f) noexcept { return f == Family::gaussian ? "gaussian" : "anova3"; }

Family parse_family(std::string_view s) {
    if (s == "gaussian") return Family::gaussian;
    if (s == "anova3") return Family::anova3;
    throw ConfigError("unknown family '" + std::string(s) + "'");
}

std::string EstimatorSpec::name() const {
    switch (kind) {
        case EstimatorKind::naive: return "naive";
        case EstimatorKind::boot1: return "boot1";
        case EstimatorKind::boot2: return "boot2";
        case EstimatorKind::oracle: return "oracle";
        case EstimatorKind::lindsey: return "lindsey" + std::to_string(degree);
        case EstimatorKind::james_stein: return "james_stein";
    }
    return "unknown";
}

EstimatorSpec EstimatorSpec::parse(std::string_view s) {
    if (s == "naive") return {EstimatorKind::naive};
    if (s == "boot1") return {EstimatorKind::boot1};
    if (s == "boot2") return {EstimatorKind::boot2};
    if (s == "oracle") return {EstimatorKind::oracle};
    if (s == "james_stein" || s == "js") return {EstimatorKind::james_stein};
    if (s == "tweedie") return {EstimatorKind::lindsey, 5};
    for (std::string_view prefix : {"lindsey", "spline", "tweedie"}) {
        if (s.starts_with(prefix)) {
            std::string_view rest = s.substr(prefix.size());
            int d = 0;
            auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), d);
            if (ec == std::errc() && ptr == rest.data() + rest.size() && d >= 2) return {EstimatorKind::lindsey, d};
        }
    }
    throw ConfigError("unknown estimator '" + std::string(s) + "'");
}

std::vector<EstimatorSpec> parse_estimators(std::string_view list) {
    std::vector<EstimatorSpec> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        std::size_t comma = list.find(',', pos);
        std::string_view item = list.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.push_back(EstimatorSpec::parse(item));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty estimator list");
    return out;
}

std::size_t ScenarioSpec::resolved_window() const { return window ? window : default_window(p); }

std::vector<std::string> expand_schemes(std::string_view text) {
    std::vector<std::string> out;
    std::size_t dots = text.find("..");
    if (dots != std::string_view::npos) {
        std::string_view a = text.substr(0, dots), b = text.substr(dots + 2);
        if (a.size() < 2 || b.size() < 2 || a[0] != b[0]) throw ConfigError("bad scheme range '" + std::string(text) + "'");
        int lo = 0, hi = 0;
        std::from_chars(a.data() + 1, a.data() + a.size(), lo);
        std::from_chars(b.data() + 1, b.data() + b.size(), hi);
        if (lo < 1 || hi < lo) throw ConfigError("bad scheme range '" + std::string(text) + "'");
        for (int i = lo; i <= hi; ++i) out.push_back(std::string(1, a[0]) + std::to_string(i));
    } else {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t comma = text.find(',', pos);
            std::string_view item =
                text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
            if (!item.empty()) out.emplace_back(item);
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
    }
    for (const auto& s : out) scheme_family(s);
    if (out.empty()) throw ConfigError("no schemes given");
    return out;
}

Family scheme_family(std::string_view scheme) {
    static const char* gaussian[] = {"G1", "G2", "G3", "G4", "G5", "G6", "S"};
    static const char* anova[] = {"C1", "C2", "C3"};
    for (const char* g : gaussian) {
        if (scheme == g) return Family::gaussian;
    }
    for (const char* c : anova) {
        if (scheme == c) return Family::anova3;
    }
    throw ConfigError("unknown scheme '" + std::string(scheme) + "'");
}

std::vector<double> gaussian_scheme_means(std::string_view scheme, std::size_t p, const RngSpec& rng) {
    if (p == 0) throw InvalidInput("scenario needs p >= 1");
    Engine eng = rng.engine();
    std::normal_distribution<double> normal;
    std::vector<double> mu(p, 0.0);
    const std::size_t tenth = p / 10;
    if (scheme == "G1") {
    } else if (scheme == "G2") {
        std::fill(mu.begin() + static_cast<std::ptrdiff_t>(p / 2), mu.end(), 6.0);
    } else if (scheme == "G3") {
        std::fill(mu.end() - static_cast<std::ptrdiff_t>(tenth), mu.end(), 6.0);
    } else if (scheme == "G4") {
        // N(0, 2) with 2 as the standard deviation.
        for (std::size_t i = p - tenth; i < p; ++i) mu[i] = 2.0 * normal(eng);
    } else if (scheme == "G5") {
        for (double& m : mu) m = normal(eng);
    } else if (scheme == "G6") {
        const std::size_t cluster = std::max<std::size_t>(1, p / 5);
        for (std::size_t i = 0; i < p; ++i) mu[i] = 6.0 * static_cast<double>(std::min<std::size_t>(i / cluster, 4) + 1);
    } else if (scheme == "S") {
        std::fill(mu.end() - static_cast<std::ptrdiff_t>(p / 100), mu.end(), 6.0);
    } else {
        throw ConfigError("unknown gaussian scheme '" + std::string(scheme) + "'");
    }
    return mu;
}

std::vector<double> anova3_scheme_rho2(std::string_view scheme, std::size_t p, const RngSpec& rng) {
    Engine eng = rng.engine();
    std::vector<double> rho2(p, 0.0);
    // exponential(10) / exponential(20) are rates: means 0.1 and 0.05.
    if (scheme == "C1") {
    } else if (scheme == "C2") {
        std::exponential_distribution<double> ex(10.0);
        for (double& r : rho2) r = std::min(ex(eng), kRho2Cap);
    } else if (scheme == "C3") {
        std::exponential_distribution<double> ex(20.0);
        std::normal_distribution<double> nm(0.55, 1.0 / 20.0);
        const std::size_t small = p - p / 5;
        for (std::size_t j = 0; j < p; ++j) {
            double v = j < small ? ex(eng) : nm(eng);
            rho2[j] = std::clamp(v, 0.0, kRho2Cap);
        }
    } else {
        throw ConfigError("unknown categorical scheme '" + std::string(scheme) + "'");
    }
    return rho2;
}

ScenarioDraw gen_scenario(const ScenarioSpec& spec, std::size_t trial) {
    const RngSpec rng = RngSpec{spec.seed}.child(trial).child(stream::scenario);
    Family fam = scheme_family(spec.scheme);
    if (fam != spec.family) throw ConfigError("scheme '" + spec.scheme + "' does not belong to family " + std::string(to_string(spec.family)));
    if (fam == Family::gaussian) {
        std::vector<double> mu = gaussian_scheme_means(spec.scheme, spec.p, rng.child(0));
        std::vector<double> z(spec.p);
        simulate_gaussian(mu, 1.0, rng.child(1), z);
        return GaussianDraw{EffectVector(std::move(mu)), std::move(z)};
    }
    std::vector<double> rho2 = anova3_scheme_rho2(spec.scheme, spec.p, rng.child(0));
    return Anova3Draw{anova3_make(spec.n, spec.p, rho2, rng.child(1))};
}

const EstimatorResult* TrialReport::find(std::string_view name) const {
    for (const auto& r : results) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

void validate(const ScenarioSpec& spec) {
    if (spec.trials == 0) throw ConfigError("trials must be >= 1");
    if (spec.p == 0) throw ConfigError("p must be >= 1");
    if (spec.estimators.empty()) throw ConfigError("no estimators requested");
    if (scheme_family(spec.scheme) != spec.family) {
        throw ConfigError("scheme '" + spec.scheme + "' does not belong to family " + std::string(to_string(spec.family)));
    }
    for (const auto& e : spec.estimators) {
        if (spec.family == Family::anova3 &&
            (e.kind == EstimatorKind::lindsey || e.kind == EstimatorKind::james_stein)) {
            throw ConfigError("estimator '" + e.name() + "' is only defined for the gaussian family");
        }
    }
}

namespace {

EffectEstimates naive_estimates(std::span<const double> stat, EstimatorTag tag = EstimatorTag::naive) {
    RankedSample r = rank_sample(stat);
    return subtract_rank_bias(r, std::vector<double>(stat.size(), 0.0), tag);
}

TrialEstimates gaussian_trial(const ScenarioSpec& spec, const GaussianDraw& draw, const RngSpec& trial_rng) {
    TrialEstimates out;
    out.truth = draw.mu.vec();
    out.naive = draw.z;
    const RankedSample ranked = rank_sample(draw.z);
    const Smoothing smooth{spec.resolved_window()};
    for (const auto& e : spec.estimators) {
        switch (e.kind) {
            case EstimatorKind::naive: out.estimates.push_back(naive_estimates(draw.z)); break;
            case EstimatorKind::boot1:
                out.estimates.push_back(boot1(ranked, spec.boot_samples, trial_rng.child(stream::boot1), smooth));
                break;
            case EstimatorKind::boot2:
                out.estimates.push_back(
                    boot2(ranked, spec.outer, spec.inner, trial_rng.child(stream::boot2), smooth));
                break;
            case EstimatorKind::oracle:
                out.estimates.push_back(
                    oracle_estimates(ranked, draw.mu, spec.oracle_samples, trial_rng.child(stream::oracle)));
                break;
            case EstimatorKind::lindsey:
                out.estimates.push_back(lindsey_tweedie(draw.z, e.degree, spec.bins));
                break;
            case EstimatorKind::james_stein: out.estimates.push_back(james_stein(draw.z)); break;
        }
    }
    return out;
}

TrialEstimates anova3_trial(const ScenarioSpec& spec, const Anova3Draw& draw, const RngSpec& trial_rng) {
    const Anova3Instance& inst = draw.instance;
    const Anova3Model& model = inst.model;
    TrialEstimates out;
    out.truth = inst.truth.rho2;
    out.naive = model.fit(inst.data).r2;
    const std::size_t window = spec.resolved_window();
    for (const auto& e : spec.estimators) {
        switch (e.kind) {
            case EstimatorKind::naive: out.estimates.push_back(naive_estimates(out.naive)); break;
            case EstimatorKind::boot1:
                out.estimates.push_back(generic_boot(model, inst.data, BootBudget{spec.boot_samples, spec.outer}, 1,
                                                     trial_rng.child(stream::boot1), Smoothing{window}));
                break;
            case EstimatorKind::boot2:
                out.estimates.push_back(generic_boot(model, inst.data, BootBudget{spec.inner, spec.outer}, 2,
                                                     trial_rng.child(stream::boot2), Smoothing{window}));
                break;
            case EstimatorKind::oracle:
                out.estimates.push_back(
                    generic_oracle(model, inst.truth, out.naive, spec.oracle_samples, trial_rng.child(stream::oracle)));
                break;
            default: throw ConfigError("estimator '" + e.name() + "' is only defined for the gaussian family");
        }
    }
    return out;
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_error_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

TrialEstimates run_trial(const ScenarioSpec& spec, std::size_t trial) {
    validate(spec);
    const RngSpec trial_rng = RngSpec{spec.seed}.child(trial);
    ScenarioDraw draw = gen_scenario(spec, trial);
    if (auto* g = std::get_if<GaussianDraw>(&draw)) return gaussian_trial(spec, *g, trial_rng);
    return anova3_trial(spec, std::get<Anova3Draw>(draw), trial_rng);
}

TrialReport run_table(const ScenarioSpec& spec) {
    validate(spec);
    const auto& kern = simd::kernels();
    const std::size_t m = spec.estimators.size();
    std::vector<double> naive_sse(spec.trials);
    std::vector<std::vector<double>> ratios(spec.trials, std::vector<double>(m));

    parallel_for(spec.trials, [&](std::size_t t) {
        TrialEstimates est = run_trial(spec, t);
        const std::size_t p = est.truth.size();
        double base = kern.sum_squared_diff(est.naive.data(), est.truth.data(), p);
        naive_sse[t] = base;
        for (std::size_t e = 0; e < m; ++e) {
            double sse = kern.sum_squared_diff(est.estimates[e].corrected.data(), est.truth.data(), p);
            ratios[t][e] = sse / base;
        }
    });

    TrialReport report;
    report.spec = spec;
    report.naive_sse = naive_sse;
    EstimatorResult naive{"naive", std::vector<double>(spec.trials, 1.0), 1.0, 0.0};
    report.results.push_back(naive);
    for (std::size_t e = 0; e < m; ++e) {
        EstimatorResult r;
        r.name = spec.estimators[e].name();
        for (std::size_t t = 0; t < spec.trials; ++t) r.ratios.push_back(ratios[t][e]);
        r.mean = mean_of(r.ratios);
        r.std_error = std_error_of(r.ratios);
        report.results.push_back(std::move(r));
    }
    return report;
}

}  // namespace rankshrink

#include "rankshrink/anova3.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rankshrink/errors.hpp"

namespace rankshrink {

namespace {

Anova3Fit fit_from_parts(const std::array<std::uint32_t, 3>& counts, const std::array<double, 3>& means,
                         double within_ss, double total_ss) {
    const double n = static_cast<double>(counts[0] + counts[1] + counts[2]);
    Anova3Fit f;
    f.theta = means;
    double grand = 0.0;
    for (int k = 0; k < 3; ++k) grand += counts[k] * means[k];
    grand /= n;
    double between = 0.0;
    for (int k = 0; k < 3; ++k) between += counts[k] * (means[k] - grand) * (means[k] - grand);
    if (total_ss < 0.0) total_ss = between + within_ss;

    f.r2 = total_ss > 0.0 ? std::clamp(1.0 - within_ss / total_ss, 0.0, 1.0) : 0.0;
    f.plug_in_rho2 = std::clamp(f.r2, 0.0, kRho2Cap);
    f.sigma2 = within_ss / n;
    if (f.r2 > kRho2Cap) {
        // Noise level that makes the fitted model's rho^2 exactly the cap.
        f.sigma2 = (between / n) * (1.0 - kRho2Cap) / kRho2Cap;
    }
    return f;
}

void check_counts(const std::array<std::uint32_t, 3>& counts) {
    for (int k = 0; k < 3; ++k) {
        if (counts[k] < 2) {
            throw InvalidInput("anova3_fit: class " + std::to_string(k) + " has " + std::to_string(counts[k]) +
                               " observation(s), need >= 2");
        }
    }
}

}  // namespace

Anova3Fit anova3_fit(std::span<const double> y, std::span<const std::uint8_t> labels) {
    if (y.size() != labels.size()) throw InvalidInput("anova3_fit: y and labels differ in length");
    std::array<std::uint32_t, 3> counts{};
    std::array<double, 3> sums{};
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (labels[i] > 2) throw InvalidInput("anova3_fit: label out of range");
        if (!std::isfinite(y[i])) throw InvalidInput("anova3_fit: non-finite response");
        ++counts[labels[i]];
        sums[labels[i]] += y[i];
        total += y[i];
    }
    check_counts(counts);
    std::array<double, 3> means{};
    for (int k = 0; k < 3; ++k) means[k] = sums[k] / counts[k];
    const double grand = total / static_cast<double>(y.size());
    double within = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double r = y[i] - means[labels[i]];
        double t = y[i] - grand;
        within += r * r;
        tss += t * t;
    }
    return fit_from_parts(counts, means, within, tss);
}

Anova3Fit anova3_fit(const std::array<std::uint32_t, 3>& counts, const std::array<double, 3>& means,
                     double within_ss) {
    check_counts(counts);
    return fit_from_parts(counts, means, within_ss, -1.0);
}

double anova3_delta(double rho2) {
    if (!(rho2 >= 0.0 && rho2 <= kRho2Cap)) throw InvalidInput("rho^2 must lie in [0, 0.99]");
    return std::sqrt(1.5 * rho2 / (1.0 - rho2));
}

Anova3Model::Anova3Model(std::shared_ptr<const Anova3Design> design) : design_(std::move(design)) {
    if (!design_ || design_->n < 9) throw InvalidInput("Anova3Model: need a design with n >= 9");
    if (design_->counts.size() != design_->p) throw InvalidInput("Anova3Model: design counts missing");
    for (const auto& c : design_->counts) check_counts(c);
}

Anova3Data Anova3Model::simulate(const Params& params, const RngSpec& rng) const {
    const std::size_t p = design_->p;
    Engine eng = rng.engine();
    std::normal_distribution<double> normal;
    std::chi_squared_distribution<double> chi2(static_cast<double>(design_->n) - 3.0);

    Anova3Data out;
    out.class_means.resize(p);
    out.within_ss.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double sd = std::sqrt(params.sigma2[j]);
        for (int k = 0; k < 3; ++k) {
            out.class_means[j][k] = params.theta[j][k] + sd * normal(eng) / std::sqrt(double(design_->counts[j][k]));
        }
        out.within_ss[j] = params.sigma2[j] * chi2(eng);
    }
    return out;
}

Anova3Params Anova3Model::fit(const Dataset& data) const {
    const std::size_t p = design_->p;
    if (data.class_means.size() != p || data.within_ss.size() != p) {
        throw InvalidInput("Anova3Model::fit: dataset does not match design");
    }
    Params out;
    out.rho2.resize(p);
    out.r2.resize(p);
    out.theta.resize(p);
    out.sigma2.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        Anova3Fit f = fit_from_parts(design_->counts[j], data.class_means[j], data.within_ss[j], -1.0);
        if (!std::isfinite(f.r2) || !std::isfinite(f.sigma2)) {
            throw NumericalFailure("Anova3Model::fit: non-finite fit for feature " + std::to_string(j));
        }
        out.rho2[j] = f.plug_in_rho2;
        out.r2[j] = f.r2;
        out.theta[j] = f.theta;
        out.sigma2[j] = f.sigma2;
    }
    return out;
}

Anova3Params Anova3Model::truth(std::span<const double> rho2) const {
    if (rho2.size() != design_->p) throw InvalidInput("Anova3Model::truth: need one rho^2 per feature");
    Params out;
    out.rho2.assign(rho2.begin(), rho2.end());
    out.r2 = out.rho2;
    out.theta.resize(rho2.size());
    out.sigma2.assign(rho2.size(), 1.0);
    for (std::size_t j = 0; j < rho2.size(); ++j) {
        double d = anova3_delta(rho2[j]);
        out.theta[j] = {-d, 0.0, d};
    }
    return out;
}

Anova3Data anova3_summarize(const Anova3Design& design, std::span<const double> y) {
    if (y.size() != design.n * design.p) throw InvalidInput("anova3_summarize: response size mismatch");
    Anova3Data out;
    out.class_means.resize(design.p);
    out.within_ss.resize(design.p);
    for (std::size_t j = 0; j < design.p; ++j) {
        auto col = y.subspan(j * design.n, design.n);
        auto lab = design.column(j);
        std::array<double, 3> sums{};
        for (std::size_t i = 0; i < design.n; ++i) sums[lab[i]] += col[i];
        for (int k = 0; k < 3; ++k) out.class_means[j][k] = sums[k] / design.counts[j][k];
        double w = 0.0;
        for (std::size_t i = 0; i < design.n; ++i) {
            double r = col[i] - out.class_means[j][lab[i]];
            w += r * r;
        }
        out.within_ss[j] = w;
    }
    return out;
}

Anova3Instance anova3_make(std::size_t n, std::size_t p, std::span<const double> rho2, const RngSpec& rng) {
    if (n < 9) throw InvalidInput("anova3_make: n must be >= 9");
    if (p == 0 || rho2.size() != p) throw InvalidInput("anova3_make: need one rho^2 per feature");
    for (double r : rho2) {
        if (!(r >= 0.0 && r <= kRho2Cap)) throw InvalidInput("anova3_make: rho^2 outside [0, 0.99]");
    }

    Engine eng = rng.engine();
    std::uniform_int_distribution<int> cls(0, 2);
    std::normal_distribution<double> normal;

    auto design = std::make_shared<Anova3Design>();
    design->n = n;
    design->p = p;
    design->labels.resize(n * p);
    design->counts.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        std::array<std::uint32_t, 3> c{};
        do {
            c = {0, 0, 0};
            for (std::size_t i = 0; i < n; ++i) {
                auto k = static_cast<std::uint8_t>(cls(eng));
                design->labels[j * n + i] = k;
                ++c[k];
            }
        } while (c[0] < 2 || c[1] < 2 || c[2] < 2);
        design->counts[j] = c;
    }

    Anova3Model model(design);
    Anova3Params truth = model.truth(rho2);
    std::vector<double> y(n * p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            y[j * n + i] = truth.theta[j][design->labels[j * n + i]] + normal(eng);
        }
    }
    Anova3Data data = anova3_summarize(*design, y);
    return Anova3Instance{std::move(model), std::move(truth), std::move(y), std::move(data)};
}

}  // namespace rankshrink

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "rankshrink/errors.hpp"
#include "rankshrink/harness.hpp"
#include "rankshrink/parallel.hpp"

namespace rankshrink {

namespace {

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// P(lo < X < hi) for standard normal X, without cancellation in the tails.
double normal_mass(double lo, double hi) {
    if (lo >= 0.0) return Phi(-lo) - Phi(-hi);
    return Phi(hi) - Phi(lo);
}

/// Antiderivative of Phi.
double Phi_integral(double x) { return x * Phi(x) + phi(x); }

}  // namespace

BoundedPrior BoundedPrior::parse(std::string_view name, double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("prior half-width must be positive");
    if (name == "two_point" || name == "two-point") return {PriorKind::two_point, a};
    if (name == "uniform") return {PriorKind::uniform, a};
    throw ConfigError("unsupported prior '" + std::string(name) + "' (expected two_point or uniform)");
}

double BoundedPrior::sample(Engine& eng) const {
    if (kind == PriorKind::two_point) {
        std::bernoulli_distribution coin(0.5);
        return coin(eng) ? a : -a;
    }
    std::uniform_real_distribution<double> u(-a, a);
    return u(eng);
}

double marginal_cdf(const BoundedPrior& prior, double z) {
    const double a = prior.a;
    if (prior.kind == PriorKind::two_point) return 0.5 * (Phi(z - a) + Phi(z + a));
    return (Phi_integral(z + a) - Phi_integral(z - a)) / (2.0 * a);
}

double marginal_pdf(const BoundedPrior& prior, double z) {
    const double a = prior.a;
    if (prior.kind == PriorKind::two_point) return 0.5 * (phi(z - a) + phi(z + a));
    return normal_mass(z - a, z + a) / (2.0 * a);
}

double marginal_pdf_derivative(const BoundedPrior& prior, double z) {
    const double a = prior.a;
    if (prior.kind == PriorKind::two_point) return -0.5 * ((z - a) * phi(z - a) + (z + a) * phi(z + a));
    return (phi(z + a) - phi(z - a)) / (2.0 * a);
}

double marginal_quantile(const BoundedPrior& prior, double t) {
    if (!(t > 0.0 && t < 1.0)) throw InvalidInput("quantile level must lie in (0, 1)");
    double lo = -prior.a - 1.0, hi = prior.a + 1.0;
    while (marginal_cdf(prior, lo) > t) lo -= 2.0 * (hi - lo);
    while (marginal_cdf(prior, hi) < t) hi += 2.0 * (hi - lo);
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        (marginal_cdf(prior, mid) < t ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double posterior_mean(const BoundedPrior& prior, double z) {
    if (prior.kind == PriorKind::two_point) return prior.a * std::tanh(prior.a * z);
    return z + marginal_pdf_derivative(prior, z) / marginal_pdf(prior, z);
}

double posterior_mean_direct(const BoundedPrior& prior, double z) {
    const double a = prior.a;
    if (prior.kind == PriorKind::two_point) {
        double wp = phi(z - a), wm = phi(z + a);
        return a * (wp - wm) / (wp + wm);
    }
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    double num = gauss_kronrod<double, 61>::integrate([&](double m) { return m * phi(z - m); }, -a, a, 15, 1e-12, &err);
    double den = gauss_kronrod<double, 61>::integrate([&](double m) { return phi(z - m); }, -a, a, 15, 1e-12, &err);
    return num / den;
}

std::vector<ConvergenceRow> theorem1_experiment(const BoundedPrior& prior, double t,
                                                std::span<const std::size_t> p_grid, std::size_t replicates,
                                                const RngSpec& rng) {
    if (!(t > 0.0 && t < 1.0)) throw InvalidInput("theorem1_experiment: t must lie in (0, 1)");
    if (replicates < 2) throw InvalidInput("theorem1_experiment: need at least 2 replicates");

    const double q = marginal_quantile(prior, t);
    const double limit = q - posterior_mean(prior, q);

    std::vector<ConvergenceRow> rows;
    for (std::size_t p : p_grid) {
        // floor(t p), guarded against t*p landing a hair below an integer.
        auto k = static_cast<std::size_t>(std::floor(t * static_cast<double>(p) + 1e-9));
        if (k < 1 || k > p) throw InvalidInput("theorem1_experiment: floor(t p) outside 1..p for p = " + std::to_string(p));

        const RngSpec prng = rng.child(p);
        std::vector<double> gaps(replicates);
        parallel_for(replicates, [&](std::size_t r) {
            Engine eng = prng.child(r).engine();
            std::normal_distribution<double> normal;
            std::vector<double> mu(p), z(p);
            for (std::size_t i = 0; i < p; ++i) {
                mu[i] = prior.sample(eng);
                z[i] = mu[i] + normal(eng);
            }
            std::vector<std::uint32_t> idx(p);
            std::iota(idx.begin(), idx.end(), 0u);
            std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(),
                             [&](std::uint32_t x, std::uint32_t y) { return z[x] < z[y] || (z[x] == z[y] && x < y); });
            std::uint32_t sel = idx[k - 1];
            gaps[r] = z[sel] - mu[sel];
        });

        double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(replicates);
        double ss = 0.0;
        for (double g : gaps) ss += (g - mean) * (g - mean);
        double se = std::sqrt(ss / static_cast<double>(replicates - 1) / static_cast<double>(replicates));
        rows.push_back({p, k, mean, se, limit, mean - limit});
    }
    return rows;
}

}  // namespace rankshrink

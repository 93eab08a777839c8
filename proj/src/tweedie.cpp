#include "rankshrink/tweedie.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rankshrink/errors.hpp"
#include "rankshrink/simd/kernels.hpp"

namespace rankshrink {

std::uint64_t BinnedCounts::total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

BinnedCounts bin_z(std::span<const double> z, std::size_t bins) {
    if (bins < 10) throw InvalidInput("bin_z: need at least 10 bins");
    if (z.empty()) throw InvalidInput("bin_z: empty input");
    for (double v : z) {
        if (!std::isfinite(v)) throw InvalidInput("bin_z: non-finite value");
    }
    auto [mn, mx] = std::minmax_element(z.begin(), z.end());
    double range = *mx - *mn;
    double pad = range > 0.0 ? 0.01 * range : 0.5;
    double lo = *mn - pad;
    double hi = *mx + pad;

    BinnedCounts out;
    out.width = (hi - lo) / static_cast<double>(bins);
    out.edges.resize(bins + 1);
    for (std::size_t j = 0; j <= bins; ++j) out.edges[j] = lo + out.width * static_cast<double>(j);
    out.edges[bins] = hi;
    out.counts.assign(bins, 0);
    for (double v : z) {
        auto j = static_cast<std::ptrdiff_t>(std::floor((v - lo) / out.width));
        j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(bins) - 1);
        ++out.counts[static_cast<std::size_t>(j)];
    }
    return out;
}

double DensityModel::log_density(double z) const noexcept {
    double u = (z - center) / scale;
    double r = 0.0;
    for (std::size_t m = coeffs.size(); m-- > 0;) r = r * u + coeffs[m];
    return r;
}

double DensityModel::log_density_derivative(double z) const noexcept {
    double u = (z - center) / scale;
    double r = 0.0;
    for (std::size_t m = coeffs.size(); m-- > 1;) r = r * u + static_cast<double>(m) * coeffs[m];
    return r / scale;
}

double DensityModel::density(double z) const noexcept { return std::exp(log_density(z)); }

std::vector<double> DensityModel::expected_counts(const BinnedCounts& bins) const {
    std::vector<double> out(bins.bins());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::exp(log_offset + log_density(bins.center(j)));
    return out;
}

namespace {

double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        if (y[j] > 0.0) d += y[j] * std::log(y[j] / mu[j]);
        d -= y[j] - mu[j];
    }
    return 2.0 * d;
}

/// Weighted least squares via column-pivoted QR on sqrt(W) X.
Eigen::VectorXd weighted_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& w, const Eigen::VectorXd& target,
                               int iteration, double deviance) {
    Eigen::VectorXd sw = w.array().sqrt();
    Eigen::MatrixXd xw = sw.asDiagonal() * x;
    Eigen::VectorXd tw = sw.cwiseProduct(target);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
    qr.setThreshold(1e-12);
    if (qr.rank() < x.cols()) {
        throw NumericalFailure("fit_lindsey: singular weighted normal equations (rank " + std::to_string(qr.rank()) +
                                   " < " + std::to_string(x.cols()) + ")",
                               iteration, deviance);
    }
    return qr.solve(tw);
}

}  // namespace

DensityModel fit_lindsey(const BinnedCounts& bins, int degree, LindseyOptions options) {
    if (degree < 2) throw InvalidInput("fit_lindsey: degree must be >= 2");
    const std::size_t nbins = bins.bins();
    const std::size_t ncoef = static_cast<std::size_t>(degree) + 1;
    const double total = static_cast<double>(bins.total());

    std::size_t nonempty = 0;
    double wsum = 0.0, wmean = 0.0;
    for (std::size_t j = 0; j < nbins; ++j) {
        if (bins.counts[j] == 0) continue;
        ++nonempty;
        double c = static_cast<double>(bins.counts[j]);
        wsum += c;
        wmean += c * bins.center(j);
    }
    if (nonempty <= ncoef) {
        throw NumericalFailure("fit_lindsey: " + std::to_string(nonempty) + " nonempty bins cannot identify " +
                               std::to_string(ncoef) + " coefficients");
    }
    wmean /= wsum;
    double wvar = 0.0;
    for (std::size_t j = 0; j < nbins; ++j) {
        double d = bins.center(j) - wmean;
        wvar += static_cast<double>(bins.counts[j]) * d * d;
    }
    double scale = std::sqrt(wvar / wsum);
    if (!(scale > 0.0)) throw NumericalFailure("fit_lindsey: zero spread in binned data");

    DensityModel model;
    model.degree = degree;
    model.center = wmean;
    model.scale = scale;
    model.log_offset = std::log(total * bins.width);
    model.lo = bins.edges.front();
    model.hi = bins.edges.back();

    Eigen::MatrixXd x(nbins, ncoef);
    Eigen::VectorXd y(nbins);
    for (std::size_t j = 0; j < nbins; ++j) {
        double u = (bins.center(j) - wmean) / scale;
        double pw = 1.0;
        for (std::size_t m = 0; m < ncoef; ++m, pw *= u) x(j, m) = pw;
        y[j] = static_cast<double>(bins.counts[j]);
    }
    const double offset = model.log_offset;

    // Start: weighted LS of log(count + 0.5) - offset on the nonempty bins.
    Eigen::VectorXd eta;
    {
        Eigen::MatrixXd xs(nonempty, ncoef);
        Eigen::VectorXd ws(nonempty), ts(nonempty);
        Eigen::Index r = 0;
        for (std::size_t j = 0; j < nbins; ++j) {
            if (bins.counts[j] == 0) continue;
            xs.row(r) = x.row(j);
            ws[r] = y[j] + 0.5;
            ts[r] = std::log(y[j] + 0.5) - offset;
            ++r;
        }
        eta = weighted_solve(xs, ws, ts, 0, 0.0);
    }

    auto means_for = [&](const Eigen::VectorXd& coef) -> Eigen::VectorXd {
        Eigen::VectorXd lin = (x * coef).array() + offset;
        return lin.array().exp();
    };

    Eigen::VectorXd mu = means_for(eta);
    double dev = poisson_deviance(y, mu);
    if (!std::isfinite(dev)) throw NumericalFailure("fit_lindsey: non-finite deviance at start", 0, dev);

    int it = 0;
    bool converged = false;
    for (it = 1; it <= options.max_iterations; ++it) {
        Eigen::VectorXd lin = x * eta;
        Eigen::VectorXd work = lin + (y - mu).cwiseQuotient(mu);
        Eigen::VectorXd next = weighted_solve(x, mu, work, it, dev);

        // Step halving keeps the deviance from increasing.
        Eigen::VectorXd mu_next = means_for(next);
        double dev_next = poisson_deviance(y, mu_next);
        int halvings = 0;
        while ((!std::isfinite(dev_next) || dev_next > dev * (1.0 + 1e-12) + 1e-12) && halvings < 30) {
            next = 0.5 * (next + eta);
            mu_next = means_for(next);
            dev_next = poisson_deviance(y, mu_next);
            ++halvings;
        }
        if (!std::isfinite(dev_next) || !next.allFinite()) {
            throw NumericalFailure("fit_lindsey: IRLS diverged", it, dev);
        }
        double change = std::abs(dev - dev_next) / (std::abs(dev_next) + 0.1);
        eta = next;
        mu = mu_next;
        dev = dev_next;
        if (change < options.tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NumericalFailure("fit_lindsey: IRLS did not converge in " + std::to_string(options.max_iterations) +
                                   " iterations",
                               options.max_iterations, dev);
    }

    model.coeffs.assign(eta.data(), eta.data() + eta.size());
    model.iterations = it;
    model.deviance = dev;
    return model;
}

EffectEstimates tweedie_correct(std::span<const double> z, const DensityModel& model) {
    if (z.empty()) throw InvalidInput("tweedie_correct: empty input");
    const std::size_t n = z.size();
    const auto& kern = simd::kernels();

    std::vector<double> deriv;
    for (std::size_t m = 1; m < model.coeffs.size(); ++m) deriv.push_back(static_cast<double>(m) * model.coeffs[m]);

    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = (z[i] - model.center) / model.scale;
    std::vector<double> slope(n);
    kern.polyval(deriv.data(), deriv.size(), u.data(), slope.data(), n);

    EffectEstimates out;
    out.tag = EstimatorTag::tweedie;
    out.naive.assign(z.begin(), z.end());
    out.corrected.resize(n);
    std::size_t outside = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out.corrected[i] = z[i] + slope[i] / model.scale;
        if (z[i] < model.lo || z[i] > model.hi) ++outside;
    }
    if (outside > 0) {
        out.warnings.push_back("tweedie_correct: " + std::to_string(outside) +
                               " value(s) outside the fitted range; log-density extrapolated");
    }
    RankedSample ranked = rank_sample(z);
    out.order = std::move(ranked.order);
    out.inv_rank = std::move(ranked.inv_rank);
    return out;
}

EffectEstimates lindsey_tweedie(std::span<const double> z, int degree, std::size_t bins) {
    return tweedie_correct(z, fit_lindsey(bin_z(z, bins), degree));
}

}  // namespace rankshrink

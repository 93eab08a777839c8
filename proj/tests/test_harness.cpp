#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "rankshrink/errors.hpp"
#include "rankshrink/harness.hpp"
#include "rankshrink/io.hpp"
#include "rankshrink/parallel.hpp"

using namespace rankshrink;

namespace {

std::size_t count_equal(const std::vector<double>& v, double x) {
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), x));
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sd(std::span<const double> v) {
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Student-t CDF by composite Simpson on the density, and the normal quantile
// by bisection on erfc. Deliberately naive; used only as a cross-check.
double t_density(double x, double df) {
    double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * std::numbers::pi);
    return c * std::pow(1.0 + x * x / df, -(df + 1) / 2);
}

double t_cdf_lower(double t, double df) {
    // P(T <= t) for t <= 0 = 1/2 - integral_t^0 density.
    const int n = 200000;
    double h = -t / n, s = t_density(t, df) + t_density(0.0, df);
    for (int i = 1; i < n; ++i) s += t_density(t + i * h, df) * (i % 2 ? 4.0 : 2.0);
    return 0.5 - s * h / 3.0;
}

double normal_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ScenarioSpec small_spec(std::string scheme, std::vector<EstimatorSpec> ests) {
    ScenarioSpec s;
    s.scheme = std::move(scheme);
    s.family = scheme_family(s.scheme);
    s.p = 200;
    s.n = 30;
    s.trials = 3;
    s.estimators = std::move(ests);
    s.boot_samples = 30;
    s.outer = 5;
    s.inner = 10;
    s.oracle_samples = 200;
    s.seed = 77;
    return s;
}

}  // namespace

TEST_CASE("expand_schemes") {
    CHECK(expand_schemes("G1..G6") == std::vector<std::string>{"G1", "G2", "G3", "G4", "G5", "G6"});
    CHECK(expand_schemes("C1..C3").size() == 3);
    CHECK(expand_schemes("G2,S,C1") == std::vector<std::string>{"G2", "S", "C1"});
    CHECK_THROWS_AS(expand_schemes("G7"), ConfigError);
    CHECK_THROWS_AS(expand_schemes("G3..G1"), ConfigError);
    CHECK_THROWS_AS(expand_schemes("G1..C3"), ConfigError);
    CHECK_THROWS_AS(expand_schemes(""), ConfigError);
    CHECK(scheme_family("C2") == Family::anova3);
    CHECK(scheme_family("S") == Family::gaussian);
}

TEST_CASE("gaussian scheme means") {
    const RngSpec rng{1};
    const std::size_t p = 1000;
    auto g1 = gaussian_scheme_means("G1", p, rng);
    CHECK(count_equal(g1, 0.0) == p);
    auto g2 = gaussian_scheme_means("G2", p, rng);
    CHECK(count_equal(g2, 0.0) == 500);
    CHECK(count_equal(g2, 6.0) == 500);
    auto g3 = gaussian_scheme_means("G3", p, rng);
    CHECK(count_equal(g3, 0.0) == 900);
    CHECK(count_equal(g3, 6.0) == 100);
    auto s = gaussian_scheme_means("S", p, rng);
    CHECK(count_equal(s, 0.0) == 990);
    CHECK(count_equal(s, 6.0) == 10);
    auto g6 = gaussian_scheme_means("G6", p, rng);
    for (int j = 1; j <= 5; ++j) CHECK(count_equal(g6, 6.0 * j) == 200);

    auto g4 = gaussian_scheme_means("G4", 100'000, rng);
    CHECK(count_equal(g4, 0.0) == 90'000);
    std::vector<double> alt(g4.end() - 10'000, g4.end());
    CHECK(std::abs(mean(alt)) < 0.06);
    CHECK(sd(alt) == doctest::Approx(2.0).epsilon(0.03));

    auto g5 = gaussian_scheme_means("G5", 100'000, rng);
    CHECK(std::abs(mean(g5)) < 0.02);
    CHECK(sd(g5) == doctest::Approx(1.0).epsilon(0.02));

    CHECK(gaussian_scheme_means("G5", 50, RngSpec{2}) == gaussian_scheme_means("G5", 50, RngSpec{2}));
    CHECK_THROWS_AS(gaussian_scheme_means("C1", 10, rng), ConfigError);
}

TEST_CASE("categorical scheme rho^2 values") {
    const std::size_t p = 100'000;
    auto c1 = anova3_scheme_rho2("C1", 1000, RngSpec{3});
    CHECK(count_equal(c1, 0.0) == 1000);

    auto c2 = anova3_scheme_rho2("C2", p, RngSpec{3});
    CHECK(mean(c2) == doctest::Approx(0.1).epsilon(0.03));
    CHECK(*std::max_element(c2.begin(), c2.end()) <= 0.99);
    CHECK(*std::min_element(c2.begin(), c2.end()) >= 0.0);

    auto c3 = anova3_scheme_rho2("C3", p, RngSpec{4});
    std::span<const double> low(c3.data(), p * 4 / 5), high(c3.data() + p * 4 / 5, p / 5);
    CHECK(mean(low) == doctest::Approx(0.05).epsilon(0.03));
    CHECK(mean(high) == doctest::Approx(0.55).epsilon(0.01));
    CHECK(sd(high) == doctest::Approx(0.05).epsilon(0.03));
}

TEST_CASE("gen_scenario is reproducible per (seed, trial)") {
    ScenarioSpec spec;
    spec.scheme = "G5";
    spec.p = 100;
    spec.seed = 9;
    auto a = std::get<GaussianDraw>(gen_scenario(spec, 0));
    auto b = std::get<GaussianDraw>(gen_scenario(spec, 0));
    auto c = std::get<GaussianDraw>(gen_scenario(spec, 1));
    CHECK(a.z == b.z);
    CHECK(a.mu.vec() == b.mu.vec());
    CHECK(a.z != c.z);

    spec.family = Family::anova3;
    spec.scheme = "C2";
    spec.n = 20;
    auto d = std::get<Anova3Draw>(gen_scenario(spec, 2));
    auto e = std::get<Anova3Draw>(gen_scenario(spec, 2));
    CHECK(d.instance.y == e.instance.y);
    CHECK(d.instance.truth.rho2 == e.instance.truth.rho2);
}

TEST_CASE("estimator names parse") {
    CHECK(EstimatorSpec::parse("boot1").kind == EstimatorKind::boot1);
    CHECK(EstimatorSpec::parse("js").kind == EstimatorKind::james_stein);
    CHECK(EstimatorSpec::parse("lindsey7") == EstimatorSpec{EstimatorKind::lindsey, 7});
    CHECK(EstimatorSpec::parse("spline3") == EstimatorSpec{EstimatorKind::lindsey, 3});
    CHECK(EstimatorSpec::parse("tweedie") == EstimatorSpec{EstimatorKind::lindsey, 5});
    CHECK(EstimatorSpec::parse("lindsey5").name() == "lindsey5");
    CHECK_THROWS_AS(EstimatorSpec::parse("lindsey1"), ConfigError);
    CHECK_THROWS_AS(EstimatorSpec::parse("lindseyx"), ConfigError);
    CHECK_THROWS_AS(EstimatorSpec::parse("nlpden"), ConfigError);
    CHECK(parse_estimators("boot1, boot2,oracle").size() == 3);
    CHECK_THROWS_AS(parse_estimators(""), ConfigError);
    CHECK_THROWS_AS(parse_estimators(" , "), ConfigError);
}

TEST_CASE("validate rejects nonsense configurations") {
    auto s = small_spec("C1", {EstimatorSpec::parse("lindsey5")});
    CHECK_THROWS_AS(validate(s), ConfigError);
    s.estimators = {EstimatorSpec::parse("js")};
    CHECK_THROWS_AS(validate(s), ConfigError);
    s.estimators = {};
    CHECK_THROWS_AS(validate(s), ConfigError);
    s = small_spec("G1", {EstimatorSpec::parse("boot1")});
    s.trials = 0;
    CHECK_THROWS_AS(validate(s), ConfigError);
    s = small_spec("G1", {EstimatorSpec::parse("boot1")});
    s.family = Family::anova3;
    CHECK_THROWS_AS(validate(s), ConfigError);
}

TEST_CASE("run_table: shape, sanity and reproducibility") {
    auto spec = small_spec("G3", parse_estimators("boot1,boot2,oracle,lindsey5,js,naive"));
    set_thread_count(1);
    auto a = run_table(spec);
    set_thread_count(3);
    auto b = run_table(spec);
    set_thread_count(0);

    REQUIRE(a.results.size() == 7);
    CHECK(a.results[0].name == "naive");
    CHECK(a.results[0].mean == 1.0);
    CHECK(a.naive_sse.size() == 3);
    CHECK(a.find("lindsey5") != nullptr);
    CHECK(a.find("missing") == nullptr);
    CHECK(a.find("naive")->ratios == std::vector<double>(3, 1.0));
    CHECK(a.results.back().mean == doctest::Approx(1.0));  // explicit naive column
    for (const char* name : {"boot1", "boot2", "oracle", "james_stein"}) {
        CAPTURE(name);
        CHECK(a.find(name)->mean < 1.0);
        CHECK(a.find(name)->std_error >= 0.0);
    }
    for (std::size_t e = 0; e < a.results.size(); ++e) CHECK(a.results[e].ratios == b.results[e].ratios);
    CHECK(a.naive_sse == b.naive_sse);
    for (double r : a.find("oracle")->ratios) CHECK(r < 1.0);
    CHECK(a.find("oracle")->mean <= a.find("boot1")->mean);

    auto other_seed = spec;
    other_seed.seed = 78;
    CHECK(run_table(other_seed).find("boot1")->ratios != a.find("boot1")->ratios);
}

TEST_CASE("run_table on the categorical family") {
    auto spec = small_spec("C2", parse_estimators("boot1,boot2,oracle"));
    auto r = run_table(spec);
    REQUIRE(r.results.size() == 4);
    for (const auto& e : r.results) CHECK(std::isfinite(e.mean));
    CHECK(r.find("oracle")->mean < 1.0);
}

TEST_CASE("run_trial returns per-estimator curves") {
    auto spec = small_spec("G2", parse_estimators("boot1,lindsey3"));
    auto t = run_trial(spec, 0);
    CHECK(t.truth.size() == 200);
    CHECK(t.naive.size() == 200);
    REQUIRE(t.estimates.size() == 2);
    CHECK(t.estimates[1].tag == EstimatorTag::tweedie);
}

TEST_CASE("t_to_z matches an independent quadrature") {
    for (double df : {3.0, 5.0, 12.5, 40.0, 100.0}) {
        for (double t : {-4.0, -2.0, -0.7, 0.3, 1.5, 3.0}) {
            CAPTURE(df);
            CAPTURE(t);
            double want = t < 0 ? normal_quantile(t_cdf_lower(t, df)) : -normal_quantile(t_cdf_lower(-t, df));
            std::vector<double> one{t};
            CHECK(t_to_z(one, df)[0] == doctest::Approx(want).epsilon(1e-6));
        }
    }
}

TEST_CASE("t_to_z properties") {
    std::vector<double> t{-8.0, -1.0, 0.0, 1.0, 8.0};
    auto z = t_to_z(t, 7.0);
    CHECK(z[2] == 0.0);
    CHECK(z[0] == -z[4]);
    CHECK(z[1] == -z[3]);
    CHECK(std::abs(z[4]) < 8.0);  // heavier tails map inward
    std::vector<double> big{1.96};
    CHECK(std::abs(t_to_z(big, 1e6)[0] - 1.96) < 1e-3);
    std::vector<double> grid;
    for (double x = -6.0; x <= 6.0; x += 0.1) grid.push_back(x);
    auto zg = t_to_z(grid, 3.0);
    for (std::size_t i = 1; i < zg.size(); ++i) CHECK(zg[i] > zg[i - 1]);
    CHECK_THROWS_AS(t_to_z(big, 0.0), InvalidInput);
    std::vector<double> bad{std::nan("")};
    CHECK_THROWS_AS(t_to_z(bad, 4.0), InvalidInput);
}

TEST_CASE("two-sample t statistics") {
    // Group a: 1,2,3 (mean 2, var 1); group b: 4,6,8 (mean 6, var 4).
    std::vector<std::vector<double>> rows{{1, 2, 3, 4, 6, 8}};
    std::vector<std::string> labels{"a", "a", "a", "b", "b", "b"};
    auto pooled = two_sample_t(rows, labels, false);
    CHECK(pooled.group_a == "a");
    CHECK(pooled.t[0] == doctest::Approx(-4.0 / std::sqrt(2.5 * 2.0 / 3.0)));
    CHECK(pooled.df[0] == 4.0);
    auto welch = two_sample_t(rows, labels, true);
    CHECK(welch.t[0] == doctest::Approx(-4.0 / std::sqrt(5.0 / 3.0)));
    double a = 1.0 / 3.0, b = 4.0 / 3.0;
    CHECK(welch.df[0] == doctest::Approx((a + b) * (a + b) / (a * a / 2.0 + b * b / 2.0)));
    CHECK(two_sample_z(pooled)[0] == doctest::Approx(t_to_z(pooled.t, 4.0)[0]));

    std::vector<std::string> three{"a", "a", "b", "b", "c", "c"};
    CHECK_THROWS_AS(two_sample_t(rows, three, false), InvalidInput);
    std::vector<std::string> one_b{"a", "a", "a", "a", "a", "b"};
    CHECK_THROWS_AS(two_sample_t(rows, one_b, false), InvalidInput);
}

TEST_CASE("bounded priors: closed forms against direct integration") {
    for (auto prior : {BoundedPrior::parse("two_point", 2.0), BoundedPrior::parse("uniform", 2.0),
                       BoundedPrior::parse("uniform", 0.5)}) {
        for (double z = -5.0; z <= 5.0; z += 0.25) {
            CAPTURE(z);
            CHECK(std::abs(posterior_mean(prior, z) - posterior_mean_direct(prior, z)) <= 1e-6);
            const double h = 1e-5;
            double dcdf = (marginal_cdf(prior, z + h) - marginal_cdf(prior, z - h)) / (2 * h);
            CHECK(dcdf == doctest::Approx(marginal_pdf(prior, z)).epsilon(1e-6).scale(1e-3));
            double dpdf = (marginal_pdf(prior, z + h) - marginal_pdf(prior, z - h)) / (2 * h);
            CHECK(dpdf == doctest::Approx(marginal_pdf_derivative(prior, z)).epsilon(1e-6).scale(1e-3));
        }
        for (double t : {0.1, 0.5, 0.75, 0.9}) {
            double q = marginal_quantile(prior, t);
            CHECK(marginal_cdf(prior, q) == doctest::Approx(t).epsilon(1e-9));
        }
        CHECK(std::abs(marginal_quantile(prior, 0.5)) < 1e-9);
    }
    auto u1 = BoundedPrior::parse("uniform", 1.0);
    double q = marginal_quantile(u1, 0.75);
    CHECK(std::abs(posterior_mean(u1, q) - posterior_mean_direct(u1, q)) <= 1e-6);

    auto tp = BoundedPrior::parse("two-point", 2.0);
    CHECK(posterior_mean(tp, 0.7) == doctest::Approx(2.0 * std::tanh(1.4)));
    CHECK_THROWS_AS(BoundedPrior::parse("laplace", 1.0), ConfigError);
    CHECK_THROWS_AS(BoundedPrior::parse("uniform", 0.0), InvalidInput);
    CHECK_THROWS_AS(marginal_quantile(tp, 1.0), InvalidInput);
}

TEST_CASE("theorem1_experiment: rows, ranks and reproducibility") {
    auto prior = BoundedPrior::parse("two_point", 2.0);
    std::vector<std::size_t> grid{100, 250};
    auto a = theorem1_experiment(prior, 0.9, grid, 200, RngSpec{5});
    auto b = theorem1_experiment(prior, 0.9, grid, 200, RngSpec{5});
    REQUIRE(a.size() == 2);
    CHECK(a[0].rank == 90);
    CHECK(a[1].rank == 225);
    CHECK(a[0].frequentist == b[0].frequentist);
    CHECK(a[0].limit == a[1].limit);
    CHECK(a[0].gap == doctest::Approx(a[0].frequentist - a[0].limit));
    CHECK(a[0].std_error > 0.0);
    // Loose sanity check: the finite-p bias sits near the limit already.
    CHECK(std::abs(a[1].gap) < 6.0 * a[1].std_error + 0.1);
    auto median = theorem1_experiment(prior, 0.5, grid, 200, RngSpec{6});
    CHECK(std::abs(median[0].limit) < 1e-9);
    CHECK(std::abs(median[1].gap) < 4.0 * median[1].std_error + 0.05);
    CHECK_THROWS_AS(theorem1_experiment(prior, 1.5, grid, 200, RngSpec{}), InvalidInput);
    CHECK_THROWS_AS(theorem1_experiment(prior, 0.5, grid, 1, RngSpec{}), InvalidInput);
}

// End-to-end checks against reference MSE ratios and analytic results.
// Prints one PASS/FAIL line per criterion; exits nonzero if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rankshrink/cli.hpp"
#include "rankshrink/core.hpp"
#include "rankshrink/gauss_bias.hpp"
#include "rankshrink/harness.hpp"
#include "rankshrink/io.hpp"
#include "rankshrink/parallel.hpp"
#include "rankshrink/tweedie.hpp"

using namespace rankshrink;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [miss: " << what << "]";
        }
    }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << title << " ("
              << std::lround(secs) << " s)" << o.detail.str() << std::endl;
}

std::string fmt(double v, int digits = 3) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

bool near(Outcome& o, const std::string& label, double got, double want, double tol) {
    bool ok = std::abs(got - want) <= tol;
    o.detail << " " << label << "=" << fmt(got) << "(" << fmt(want) << ")";
    o.require(ok, label + " off by " + fmt(std::abs(got - want)) + " > " + fmt(tol, 2));
    return ok;
}

std::vector<double> row(const std::vector<TrialReport>& reports, const std::string& name) {
    std::vector<double> out;
    for (const auto& r : reports) out.push_back(r.find(name)->mean);
    return out;
}

std::vector<TrialReport> table1() {
    std::vector<TrialReport> out;
    for (const auto& scheme : expand_schemes("G1..G6")) {
        ScenarioSpec s;
        s.scheme = scheme;
        s.estimators = parse_estimators("boot1,boot2,lindsey3,lindsey5,lindsey7,oracle");
        out.push_back(run_table(s));
    }
    return out;
}

std::vector<double> draw(std::size_t n, std::uint64_t seed, const std::function<double(std::mt19937_64&)>& f) {
    std::mt19937_64 eng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = f(eng);
    return v;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        rows.push_back(std::move(f));
    }
    return rows;
}

}  // namespace

int main() {
    std::cout << "threads: " << thread_count() << std::endl;

    std::vector<TrialReport> t1;
    {
        auto t0 = std::chrono::steady_clock::now();
        t1 = table1();
        double mins = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
        std::cout << "Gaussian grid computed in " << fmt(mins, 1) << " min" << std::endl;
        std::cout << "estimator      G1     G2     G3     G4     G5     G6" << std::endl;
        for (const char* name : {"boot1", "boot2", "lindsey3", "lindsey5", "lindsey7", "oracle"}) {
            std::printf("%-10s", name);
            for (double v : row(t1, name)) std::printf(" %6.3f", v);
            std::printf("\n");
        }
        std::fflush(stdout);
    }

    report(1, "Gaussian MSE ratios: bootstrap", [&](Outcome& o) {
        const std::array<double, 6> b1{0.10, 0.22, 0.17, 0.24, 0.54, 0.30};
        const std::array<double, 6> b2{0.04, 0.12, 0.09, 0.20, 0.53, 0.18};
        auto g1 = row(t1, "boot1"), g2 = row(t1, "boot2");
        for (std::size_t s = 0; s < 6; ++s) {
            double tol = s == 4 ? 0.08 : 0.05;
            near(o, "boot1/G" + std::to_string(s + 1), g1[s], b1[s], tol);
            near(o, "boot2/G" + std::to_string(s + 1), g2[s], b2[s], tol);
        }
    });

    report(2, "Gaussian MSE ratios: oracle", [&](Outcome& o) {
        const std::array<double, 6> want{0.002, 0.05, 0.03, 0.17, 0.52, 0.05};
        auto got = row(t1, "oracle");
        for (std::size_t s = 0; s < 6; ++s) near(o, "oracle/G" + std::to_string(s + 1), got[s], want[s], 0.03);
    });

    report(3, "Gaussian MSE ratios: Lindsey, G1-G5", [&](Outcome& o) {
        const std::array<std::array<double, 5>, 3> want{{{0.02, 0.16, 0.19, 0.19, 0.53},
                                                          {0.04, 0.10, 0.09, 0.19, 0.53},
                                                          {0.05, 0.09, 0.07, 0.20, 0.54}}};
        const std::array<int, 3> degrees{3, 5, 7};
        for (std::size_t d = 0; d < 3; ++d) {
            auto got = row(t1, "lindsey" + std::to_string(degrees[d]));
            for (std::size_t s = 0; s < 5; ++s)
                near(o, "d" + std::to_string(degrees[d]) + "/G" + std::to_string(s + 1), got[s], want[d][s], 0.10);
        }
    });

    report(4, "categorical rho^2 MSE ratios", [&](Outcome& o) {
        const std::array<std::array<double, 3>, 3> want{{{0.0516, 0.061, 0.002}, {0.550, 0.546, 0.538}, {0.511, 0.475, 0.442}}};
        const std::array<const char*, 3> names{"boot1", "boot2", "oracle"};
        std::size_t s = 0;
        for (const auto& scheme : expand_schemes("C1..C3")) {
            ScenarioSpec spec;
            spec.family = Family::anova3;
            spec.scheme = scheme;
            spec.estimators = parse_estimators("boot1,boot2,oracle");
            auto rep = run_table(spec);
            double tol = s == 0 ? 0.08 : 0.10;
            for (std::size_t e = 0; e < 3; ++e)
                near(o, std::string(names[e]) + "/" + scheme, rep.find(names[e])->mean, want[s][e], tol);
            ++s;
        }
    });

    report(5, "risk decomposition on G3", [&](Outcome& o) {
        EffectVector mu(gaussian_scheme_means("G3", 1000, RngSpec{11}));
        auto beta = mc_bias(mu, 10'000, RngSpec{12}).beta;
        const std::size_t R = 500, p = mu.size();
        double naive = 0.0, oracle = 0.0, beta2 = 0.0;
        for (double b : beta) beta2 += b * b;
        std::vector<double> z(p);
        for (std::size_t r = 0; r < R; ++r) {
            simulate_gaussian(mu.values(), 1.0, RngSpec{13}.child(r), z);
            auto ranked = rank_sample(z);
            for (std::size_t k = 0; k < p; ++k) {
                double err = ranked.order[k] - mu[ranked.inv_rank[k]];
                naive += err * err;
                oracle += (err - beta[k]) * (err - beta[k]);
            }
        }
        naive /= static_cast<double>(R);
        oracle /= static_cast<double>(R);
        double rel = std::abs(naive - (beta2 + oracle)) / naive;
        o.detail << " naive=" << fmt(naive, 1) << " sum_beta2=" << fmt(beta2, 1) << " oracle=" << fmt(oracle, 1)
                 << " rel=" << fmt(rel, 4);
        o.require(rel <= 0.05, "relative discrepancy above 0.05");
    });

    report(6, "two-mean closed form", [&](Outcome& o) {
        auto b = mc_bias(EffectVector({0.0, 0.0}), 1'000'000, RngSpec{21}).beta;
        double want = 1.0 / std::sqrt(std::numbers::pi);
        near(o, "beta_low", b[0], -want, 0.01);
        near(o, "beta_high", b[1], want, 0.01);
    });

    report(7, "Tweedie analytic oracles", [&](Outcome& o) {
        auto gz = draw(100'000, 31, [](auto& e) { return std::normal_distribution<double>(0.0, std::sqrt(2.0))(e); });
        auto gm = fit_lindsey(bin_z(gz, 90), 2);
        double worst = 0.0;
        for (int i = -40; i <= 40; ++i) {
            std::vector<double> x{i * 0.05};
            worst = std::max(worst, std::abs(tweedie_correct(x, gm).corrected[0] - x[0] / 2.0));
        }
        o.detail << " gaussian_max_err=" << fmt(worst);
        o.require(worst <= 0.05, "gaussian prior");

        auto tz = draw(100'000, 32, [](auto& e) {
            double m = std::bernoulli_distribution(0.5)(e) ? 2.0 : -2.0;
            return m + std::normal_distribution<double>()(e);
        });
        auto tm = fit_lindsey(bin_z(tz, 90), 7);
        worst = 0.0;
        for (int i = -60; i <= 60; ++i) {
            std::vector<double> x{i * 0.05};
            worst = std::max(worst, std::abs(tweedie_correct(x, tm).corrected[0] - 2.0 * std::tanh(2.0 * x[0])));
        }
        o.detail << " two_point_max_err=" << fmt(worst);
        o.require(worst <= 0.1, "two-point prior");
    });

    report(8, "large-p convergence to the Bayesian bias", [&](Outcome& o) {
        auto prior = BoundedPrior::parse("two_point", 2.0);
        const std::vector<std::size_t> grid{100, 2000};
        for (double t : {0.75, 0.9}) {
            auto rows = theorem1_experiment(prior, t, grid, 2000, RngSpec{41});
            const auto& small = rows[0];
            const auto& large = rows[1];
            o.detail << " t=" << t << ": gap100=" << fmt(small.gap, 4) << " gap2000=" << fmt(large.gap, 4)
                     << " se2000=" << fmt(large.std_error, 4);
            o.require(std::abs(large.gap) < std::abs(small.gap), "gap not shrinking at t=" + fmt(t, 2));
            o.require(std::abs(large.gap) <= 3.0 * large.std_error, "gap beyond 3 se at t=" + fmt(t, 2));
        }
    });

    report(9, "property suite", [&](Outcome& o) {
        // Antisymmetry under a symmetric mean vector.
        std::vector<double> sym;
        for (int i = 0; i < 20; ++i) {
            sym.push_back(0.3 * i);
            sym.push_back(-0.3 * i);
        }
        const std::uint64_t B = 100'000;
        auto b = mc_bias(EffectVector(sym), B, RngSpec{51}).beta;
        double worst = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) worst = std::max(worst, std::abs(b[k] + b[b.size() - 1 - k]));
        o.detail << " antisym=" << fmt(worst, 4);
        o.require(worst <= 8.0 / std::sqrt(static_cast<double>(B)), "antisymmetry");

        // Shift equivariance.
        std::vector<double> mu{0.0, 1.0, -2.0, 3.5, 0.5}, shifted = mu;
        for (auto& m : shifted) m += 7.25;
        auto b0 = mc_bias(EffectVector(mu), 5000, RngSpec{52}).beta;
        auto b1 = mc_bias(EffectVector(shifted), 5000, RngSpec{52}).beta;
        worst = 0.0;
        for (std::size_t k = 0; k < b0.size(); ++k) worst = std::max(worst, std::abs(b0[k] - b1[k]));
        o.detail << " shift=" << worst;
        o.require(worst <= 1e-12, "shift equivariance");

        // Poisson mass conservation and derivative accuracy.
        auto z = draw(20'000, 53, [](auto& e) {
            return (std::bernoulli_distribution(0.3)(e) ? 3.0 : 0.0) + std::normal_distribution<double>()(e);
        });
        auto bins = bin_z(z, 90);
        for (int d : {2, 3, 5, 7}) {
            auto m = fit_lindsey(bins, d);
            auto fitted = m.expected_counts(bins);
            double s = 0.0;
            for (double f : fitted) s += f;
            double mass = std::abs(s - static_cast<double>(bins.total())) / static_cast<double>(bins.total());
            o.require(mass <= 1e-6, "mass conservation d=" + std::to_string(d));
            double fd_err = 0.0;
            for (std::size_t j = 0; j < bins.bins(); ++j) {
                double x = bins.center(j), h = 1e-4;
                double fd = (m.log_density(x + h) - m.log_density(x - h)) / (2.0 * h);
                fd_err = std::max(fd_err, std::abs(fd - m.log_density_derivative(x)));
            }
            o.require(fd_err <= 1e-6, "derivative d=" + std::to_string(d));
        }

        // Bit-identical reruns across thread counts.
        auto zs = draw(300, 54, [](auto& e) { return std::normal_distribution<double>(1.0, 2.0)(e); });
        auto ranked = rank_sample(zs);
        std::vector<std::vector<double>> runs;
        for (std::size_t threads : {1, 2, 5}) {
            set_thread_count(threads);
            runs.push_back(boot2(ranked, 20, 30, RngSpec{55}, Smoothing{7}).corrected);
            auto b1run = boot1(ranked, 50, RngSpec{56}).corrected;
            runs.back().insert(runs.back().end(), b1run.begin(), b1run.end());
        }
        set_thread_count(0);
        o.require(runs[0] == runs[1] && runs[1] == runs[2], "thread-count determinism");

        // James-Stein keeps the order of z.
        auto js = james_stein(zs).corrected;
        bool ordered = true;
        for (std::size_t i = 0; i < zs.size(); ++i)
            for (std::size_t j = 0; j < zs.size(); ++j)
                if (zs[i] < zs[j] && js[i] > js[j]) ordered = false;
        o.require(ordered, "James-Stein order");
    });

    report(10, "prostate-scale shrink and curve agreement", [&](Outcome& o) {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "rankshrink_acceptance";
        fs::create_directories(dir);
        const std::string in = (dir / "z.txt").string(), out = (dir / "shrink.csv").string();

        // G4-like stand-in at p=6033: 90% null, 10% N(0, 2^2) means.
        std::mt19937_64 eng(61);
        std::normal_distribution<double> nd;
        std::vector<double> mu(6033, 0.0);
        for (std::size_t i = mu.size() * 9 / 10; i < mu.size(); ++i) mu[i] = 2.0 * nd(eng);
        {
            std::ofstream f(in);
            for (double m : mu) f << format_number(m + nd(eng)) << '\n';
        }

        std::vector<std::string> args{"rankshrink", "shrink", "--input", in, "--output", out,
                                      "--estimators", "boot1,boot2,tweedie", "--boot-samples", "100",
                                      "--outer", "100", "--inner", "100", "--seed", "1"};
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream cout_sink, cerr_sink;
        auto t0 = std::chrono::steady_clock::now();
        int status = cli::run(static_cast<int>(argv.size()), argv.data(), cout_sink, cerr_sink);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.detail << " runtime=" << fmt(secs, 1) << "s";
        o.require(status == 0, "shrink failed: " + cerr_sink.str());
        o.require(secs <= 300.0, "runtime above 5 min");
        if (status != 0) return;

        auto rows = read_csv_rows(out);
        const auto& header = rows.at(0);
        auto col = [&](const std::string& name) {
            return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
        };
        const std::size_t c_rank = col("rank"), c_boot = col("boot2"), c_tw = col("tweedie");
        o.require(rows.size() == 6034, "row count");
        double worst = 0.0;
        const std::size_t p = rows.size() - 1, lo = p / 20, hi = p - p / 20;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            auto rank = static_cast<std::size_t>(std::stoul(rows[r][c_rank]));
            if (rank <= lo || rank > hi) continue;
            worst = std::max(worst, std::abs(std::stod(rows[r][c_boot]) - std::stod(rows[r][c_tw])));
        }
        o.detail << " max|boot2-tweedie| central 90%=" << fmt(worst);
        o.require(worst <= 0.5, "curves disagree");
        fs::remove_all(dir);
    });

    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}

#include "rankshrink/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>

#include "rankshrink/errors.hpp"
#include "rankshrink/gauss_bias.hpp"
#include "rankshrink/harness.hpp"
#include "rankshrink/io.hpp"
#include "rankshrink/tweedie.hpp"

namespace rankshrink::cli {

namespace {

using json = nlohmann::ordered_json;

Command parse_command(const std::string& s) {
    if (s == "shrink") return Command::shrink;
    if (s == "simulate") return Command::simulate;
    if (s == "theorem1") return Command::theorem1;
    if (s == "curves") return Command::curves;
    throw ConfigError("unknown command '" + s + "' (expected shrink, simulate, theorem1 or curves)");
}

/// Writes to a temporary sibling and renames on success, so a failed run
/// never leaves a partial file behind.
class OutputFile {
public:
    OutputFile(std::string path, std::ostream& console) : path_(std::move(path)), console_(console) {
        if (to_stdout()) return;
        tmp_ = path_ + ".partial";
        file_ = std::make_unique<std::ofstream>(tmp_, std::ios::binary);
        if (!*file_) throw IoError("cannot write '" + path_ + "'");
    }
    ~OutputFile() {
        if (file_ && !committed_) {
            file_.reset();
            std::remove(tmp_.c_str());
        }
    }
    std::ostream& stream() { return to_stdout() ? console_ : *file_; }
    void commit() {
        if (to_stdout()) {
            console_.flush();
            return;
        }
        file_->close();
        if (!*file_ || std::rename(tmp_.c_str(), path_.c_str()) != 0) throw IoError("cannot write '" + path_ + "'");
        committed_ = true;
    }

private:
    bool to_stdout() const { return path_.empty() || path_ == "-"; }
    std::string path_;
    std::ostream& console_;
    std::string tmp_;
    std::unique_ptr<std::ofstream> file_;
    bool committed_ = false;
};

std::vector<double> load_z(const CliConfig& cfg) {
    if (cfg.input.empty()) throw ConfigError("--input is required");
    if (looks_like_matrix(cfg.input)) {
        ExpressionMatrix m = read_expression_matrix(cfg.input);
        return two_sample_z(two_sample_t(m.rows, m.labels, cfg.welch));
    }
    std::vector<double> v = read_values(cfg.input);
    if (cfg.df > 0.0) return t_to_z(v, cfg.df);
    return v;
}

void write_header(std::ostream& out, const CliConfig& cfg) {
    out << "# rankshrink " << to_string(cfg.command) << '\n';
    out << "# config: " << config_json(cfg) << '\n';
}

struct NamedEstimator {
    std::string name;
    EstimatorSpec spec;
};

/// Parses the estimator list; a bare "tweedie" means Lindsey at --degree.
std::vector<NamedEstimator> resolve_estimators(const CliConfig& cfg, std::string_view fallback) {
    std::string list = cfg.estimators_set ? cfg.estimators : std::string(fallback);
    std::vector<NamedEstimator> out;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');) {
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (item.empty()) continue;
        if (item == "tweedie") {
            out.push_back({"tweedie", EstimatorSpec{EstimatorKind::lindsey, cfg.degree}});
        } else {
            EstimatorSpec e = EstimatorSpec::parse(item);
            out.push_back({e.name(), e});
        }
    }
    if (out.empty()) throw ConfigError("empty estimator list");
    return out;
}

std::vector<EstimatorSpec> specs_of(const std::vector<NamedEstimator>& named) {
    std::vector<EstimatorSpec> out;
    for (const auto& n : named) out.push_back(n.spec);
    return out;
}

struct Column {
    std::string name;
    std::vector<double> values;  // per original index
    std::vector<std::string> warnings;
};

std::vector<Column> shrink_columns(const CliConfig& cfg, std::span<const double> z, const RankedSample& ranked,
                                   const std::vector<NamedEstimator>& ests, const std::vector<double>* truth) {
    const RngSpec root{cfg.seed};
    const Smoothing smooth{cfg.window ? cfg.window : default_window(z.size())};
    std::vector<Column> cols;
    for (const auto& [name, e] : ests) {
        EffectEstimates est;
        switch (e.kind) {
            case EstimatorKind::naive: est.corrected.assign(z.begin(), z.end()); break;
            case EstimatorKind::boot1: est = boot1(ranked, cfg.boot_samples, root.child(stream::boot1), smooth); break;
            case EstimatorKind::boot2:
                est = boot2(ranked, cfg.outer, cfg.inner, root.child(stream::boot2), smooth);
                break;
            case EstimatorKind::lindsey: est = lindsey_tweedie(z, e.degree, cfg.bins); break;
            case EstimatorKind::james_stein: est = james_stein(z); break;
            case EstimatorKind::oracle:
                if (!truth) throw ConfigError("oracle needs true means (--truth)");
                est = oracle_estimates(ranked, EffectVector(*truth), cfg.oracle_samples, root.child(stream::oracle));
                break;
        }
        cols.push_back({name, std::move(est.corrected), std::move(est.warnings)});
    }
    return cols;
}

json number_array(std::span<const double> v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

}  // namespace

std::string to_string(Command c) {
    switch (c) {
        case Command::shrink: return "shrink";
        case Command::simulate: return "simulate";
        case Command::theorem1: return "theorem1";
        case Command::curves: return "curves";
    }
    return "unknown";
}

std::string config_json(const CliConfig& cfg) {
    json j;
    j["command"] = to_string(cfg.command);
    j["input"] = cfg.input;
    j["truth"] = cfg.truth;
    j["output"] = cfg.output;
    j["family"] = cfg.family;
    j["schemes"] = cfg.schemes;
    j["estimators"] = cfg.estimators_set ? cfg.estimators : "";
    j["trials"] = cfg.trials;
    j["p"] = cfg.p;
    j["n"] = cfg.n;
    j["boot_samples"] = cfg.boot_samples;
    j["outer"] = cfg.outer;
    j["inner"] = cfg.inner;
    j["oracle_samples"] = cfg.oracle_samples;
    j["bins"] = cfg.bins;
    j["degree"] = cfg.degree;
    j["window"] = cfg.window;
    j["seed"] = cfg.seed;
    j["format"] = cfg.format;
    j["welch"] = cfg.welch;
    j["df"] = cfg.df;
    j["prior"] = cfg.prior;
    j["prior_a"] = cfg.prior_a;
    j["quantiles"] = cfg.quantiles;
    j["p_grid"] = cfg.p_grid;
    j["replicates"] = cfg.replicates;
    return j.dump();
}

int cmd_shrink(const CliConfig& cfg, std::ostream& console) {
    std::vector<double> z = load_z(cfg);
    if (z.size() < 4) throw InvalidInput("shrink needs at least 4 values, got " + std::to_string(z.size()));
    const RankedSample ranked = rank_sample(z);
    auto ests = resolve_estimators(cfg, "boot1,boot2,tweedie,james_stein");
    std::vector<Column> cols = shrink_columns(cfg, z, ranked, ests, nullptr);

    std::vector<std::size_t> rank(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) rank[ranked.inv_rank[k]] = k + 1;

    OutputFile file(cfg.output, console);
    std::ostream& out = file.stream();
    if (cfg.format == "json") {
        json j;
        j["config"] = json::parse(config_json(cfg));
        json w = json::array();
        for (const auto& c : cols) {
            for (const auto& m : c.warnings) w.push_back(m);
        }
        j["warnings"] = w;
        j["index"] = json::array();
        for (std::size_t i = 0; i < z.size(); ++i) j["index"].push_back(i + 1);
        j["z"] = number_array(z);
        j["rank"] = rank;
        for (const auto& c : cols) j[c.name] = number_array(c.values);
        out << j.dump(2) << '\n';
    } else {
        write_header(out, cfg);
        for (const auto& c : cols) {
            for (const auto& m : c.warnings) out << "# warning: " << m << '\n';
        }
        out << "index,z,rank";
        for (const auto& c : cols) out << ',' << c.name;
        out << '\n';
        for (std::size_t i = 0; i < z.size(); ++i) {
            out << (i + 1) << ',' << format_number(z[i]) << ',' << rank[i];
            for (const auto& c : cols) out << ',' << format_number(c.values[i]);
            out << '\n';
        }
    }
    file.commit();
    return 0;
}

int cmd_simulate(const CliConfig& cfg, std::ostream& console) {
    // Without --family, the first scheme decides.
    Family family = Family::gaussian;
    if (!cfg.family.empty()) {
        family = parse_family(cfg.family);
    } else if (!cfg.schemes.empty()) {
        family = scheme_family(expand_schemes(cfg.schemes).front());
    }
    std::string scheme_text = cfg.schemes.empty() ? (family == Family::gaussian ? "G1..G6" : "C1..C3") : cfg.schemes;
    std::vector<std::string> schemes = expand_schemes(scheme_text);
    std::string fallback = family == Family::gaussian ? "boot1,boot2,lindsey3,lindsey5,lindsey7,oracle" : "boot1,boot2,oracle";
    auto ests = specs_of(resolve_estimators(cfg, fallback));

    std::vector<ScenarioSpec> specs;
    for (const auto& s : schemes) {
        ScenarioSpec spec;
        spec.family = family;
        spec.scheme = s;
        spec.p = cfg.p;
        spec.n = cfg.n;
        spec.trials = cfg.trials;
        spec.estimators = ests;
        spec.boot_samples = cfg.boot_samples;
        spec.outer = cfg.outer;
        spec.inner = cfg.inner;
        spec.oracle_samples = cfg.oracle_samples;
        spec.window = cfg.window;
        spec.bins = cfg.bins;
        spec.seed = cfg.seed;
        validate(spec);
        specs.push_back(std::move(spec));
    }

    std::vector<TrialReport> reports;
    for (const auto& spec : specs) reports.push_back(run_table(spec));

    std::string prefix = cfg.output.empty() ? "rankshrink_" + std::string(to_string(family)) : cfg.output;
    std::string header = "rankshrink simulate\nconfig: " + config_json(cfg) +
                         "\nMSE as a fraction of the naive MSE, averaged over trials";
    OutputFile csv(prefix + ".csv", console);
    write_table_csv(csv.stream(), reports, header);
    OutputFile js(prefix + ".json", console);
    write_reports_json(js.stream(), reports, config_json(cfg));
    csv.commit();
    js.commit();
    return 0;
}

int cmd_theorem1(const CliConfig& cfg, std::ostream& console) {
    BoundedPrior prior = BoundedPrior::parse(cfg.prior, cfg.prior_a);
    OutputFile file(cfg.output, console);
    std::ostream& out = file.stream();
    json rows = json::array();
    if (cfg.format != "json") {
        write_header(out, cfg);
        out << "prior,a,t,p,rank,frequentist,std_error,limit,gap\n";
    }
    for (std::size_t qi = 0; qi < cfg.quantiles.size(); ++qi) {
        double t = cfg.quantiles[qi];
        auto table = theorem1_experiment(prior, t, cfg.p_grid, cfg.replicates, RngSpec{cfg.seed}.child(qi));
        for (const auto& r : table) {
            if (cfg.format == "json") {
                rows.push_back({{"prior", cfg.prior}, {"a", cfg.prior_a}, {"t", t}, {"p", r.p}, {"rank", r.rank},
                                {"frequentist", r.frequentist}, {"std_error", r.std_error}, {"limit", r.limit},
                                {"gap", r.gap}});
            } else {
                out << cfg.prior << ',' << format_number(cfg.prior_a) << ',' << format_number(t) << ',' << r.p << ','
                    << r.rank << ',' << format_number(r.frequentist) << ',' << format_number(r.std_error) << ','
                    << format_number(r.limit) << ',' << format_number(r.gap) << '\n';
            }
        }
    }
    if (cfg.format == "json") out << json{{"config", json::parse(config_json(cfg))}, {"rows", rows}}.dump(2) << '\n';
    file.commit();
    return 0;
}

int cmd_curves(const CliConfig& cfg, std::ostream& console) {
    std::vector<double> stat;
    std::vector<Column> cols;
    if (!cfg.input.empty()) {
        stat = load_z(cfg);
        if (stat.size() < 4) throw InvalidInput("curves needs at least 4 values");
        std::vector<double> truth;
        if (!cfg.truth.empty()) {
            truth = read_values(cfg.truth);
            if (truth.size() != stat.size()) throw InvalidInput("--truth length does not match --input");
        }
        std::string fallback = truth.empty() ? "boot1,boot2,lindsey5,james_stein" : "boot1,boot2,lindsey5,james_stein,oracle";
        auto ests = resolve_estimators(cfg, fallback);
        cols = shrink_columns(cfg, stat, rank_sample(stat), ests, truth.empty() ? nullptr : &truth);
    } else {
        if (cfg.schemes.empty()) throw ConfigError("curves needs --input or --schemes");
        auto schemes = expand_schemes(cfg.schemes);
        if (schemes.size() != 1) throw ConfigError("curves takes exactly one scheme");
        ScenarioSpec spec;
        spec.scheme = schemes[0];
        spec.family = scheme_family(spec.scheme);
        spec.p = cfg.p;
        spec.n = cfg.n;
        spec.trials = 1;
        std::string fallback = spec.family == Family::gaussian ? "boot1,boot2,lindsey5,james_stein,oracle" : "boot1,boot2,oracle";
        auto named = resolve_estimators(cfg, fallback);
        spec.estimators = specs_of(named);
        spec.boot_samples = cfg.boot_samples;
        spec.outer = cfg.outer;
        spec.inner = cfg.inner;
        spec.oracle_samples = cfg.oracle_samples;
        spec.window = cfg.window;
        spec.bins = cfg.bins;
        spec.seed = cfg.seed;
        TrialEstimates est = run_trial(spec, 0);
        stat = est.naive;
        for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
            cols.push_back({named[e].name, std::move(est.estimates[e].corrected),
                            std::move(est.estimates[e].warnings)});
        }
    }

    const RankedSample ranked = rank_sample(stat);
    OutputFile file(cfg.output, console);
    std::ostream& out = file.stream();
    if (cfg.format == "json") {
        json j;
        j["config"] = json::parse(config_json(cfg));
        j["order"] = number_array(ranked.order);
        for (const auto& c : cols) {
            std::vector<double> v(stat.size());
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = c.values[ranked.inv_rank[k]];
            j["curves"][c.name] = number_array(v);
        }
        out << j.dump(2) << '\n';
    } else {
        write_header(out, cfg);
        out << "rank,z,estimator,value\n";
        for (const auto& c : cols) {
            for (std::size_t k = 0; k < stat.size(); ++k) {
                out << (k + 1) << ',' << format_number(ranked.order[k]) << ',' << c.name << ','
                    << format_number(c.values[ranked.inv_rank[k]]) << '\n';
            }
        }
    }
    file.commit();
    return 0;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CliConfig cfg;
    std::string command;
    CLI::App app{"Selection-bias correction for many estimated effects"};
    app.add_option("command,--command", command, "shrink | simulate | theorem1 | curves")->required();
    app.add_option("--input", cfg.input, "z-values (one per line), t-statistics with --df, or an expression CSV");
    app.add_option("--truth", cfg.truth, "true means for the oracle curve (curves on --input)");
    app.add_option("--output", cfg.output, "output path (simulate: file prefix); '-' or empty for stdout");
    app.add_option("--family", cfg.family, "gaussian | anova3 (default: from --schemes, else gaussian)");
    app.add_option("--schemes", cfg.schemes, "e.g. G1..G6, C1..C3, S, or a comma list");
    auto* est_opt = app.add_option("--estimators", cfg.estimators, "comma list: boot1,boot2,tweedie,lindsey<d>,james_stein,oracle");
    app.add_option("--trials", cfg.trials);
    app.add_option("--p", cfg.p);
    app.add_option("--n", cfg.n);
    app.add_option("--boot-samples", cfg.boot_samples);
    app.add_option("--outer", cfg.outer);
    app.add_option("--inner", cfg.inner);
    app.add_option("--oracle-samples", cfg.oracle_samples);
    app.add_option("--bins", cfg.bins);
    app.add_option("--degree", cfg.degree, "Lindsey polynomial degree for 'tweedie'");
    app.add_option("--window", cfg.window, "odd smoothing window; 0 = nearest odd to p/100");
    app.add_option("--seed", cfg.seed);
    app.add_option("--format", cfg.format)->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--welch", cfg.welch, "Welch t-statistics for expression matrices");
    app.add_option("--df", cfg.df, "treat input values as t-statistics with this many degrees of freedom");
    app.add_option("--prior", cfg.prior, "two_point | uniform");
    app.add_option("--prior-a", cfg.prior_a);
    app.add_option("--t", cfg.quantiles)->delimiter(',');
    app.add_option("--p-grid", cfg.p_grid)->delimiter(',');
    app.add_option("--replicates", cfg.replicates);

    auto report = [&](const char* type, const std::string& msg, json extra = json::object()) {
        json e = {{"type", type}, {"message", msg}};
        for (auto& [k, v] : extra.items()) e[k] = v;
        err << json{{"error", e}}.dump() << '\n';
    };

    try {
        app.parse(argc, argv);
        cfg.estimators_set = est_opt->count() > 0;
        cfg.command = parse_command(command);
        switch (cfg.command) {
            case Command::shrink: return cmd_shrink(cfg, out);
            case Command::simulate: return cmd_simulate(cfg, out);
            case Command::theorem1: return cmd_theorem1(cfg, out);
            case Command::curves: return cmd_curves(cfg, out);
        }
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        report("usage", e.what());
        return 2;
    } catch (const IoError& e) {
        report("io", e.what(), {{"line", e.line()}});
    } catch (const NumericalFailure& e) {
        report("numerical_failure", e.what(), {{"iterations", e.iterations()}, {"deviance", e.last_deviance()}});
    } catch (const ConfigError& e) {
        report("config", e.what());
    } catch (const InvalidInput& e) {
        report("invalid_input", e.what());
    } catch (const std::exception& e) {
        report("internal", e.what());
    }
    return 1;
}

}  // namespace rankshrink::cli

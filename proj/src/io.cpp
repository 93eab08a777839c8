#include "rankshrink/io.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "rankshrink/errors.hpp"

namespace rankshrink {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        std::size_t comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

bool skippable(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

}  // namespace

std::vector<double> t_to_z(std::span<const double> t_stats, double df) {
    if (!(df > 0.0) || !std::isfinite(df)) throw InvalidInput("t_to_z: df must be positive");
    boost::math::students_t_distribution<double> tdist(df);
    boost::math::normal_distribution<double> norm;
    std::vector<double> z(t_stats.size());
    for (std::size_t i = 0; i < t_stats.size(); ++i) {
        double t = t_stats[i];
        if (!std::isfinite(t)) throw InvalidInput("t_to_z: non-finite statistic at index " + std::to_string(i));
        if (t == 0.0) {
            z[i] = 0.0;
            continue;
        }
        double lower = boost::math::cdf(tdist, -std::abs(t));
        double zl = lower > 0.0 ? boost::math::quantile(norm, lower) : -std::numeric_limits<double>::infinity();
        z[i] = t < 0.0 ? zl : -zl;
    }
    return z;
}

TwoSampleResult two_sample_t(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& labels,
                             bool welch) {
    TwoSampleResult out;
    std::vector<int> group(labels.size(), -1);
    for (std::size_t c = 0; c < labels.size(); ++c) {
        if (out.group_a.empty() || labels[c] == out.group_a) {
            out.group_a = labels[c];
            group[c] = 0;
        } else if (out.group_b.empty() || labels[c] == out.group_b) {
            out.group_b = labels[c];
            group[c] = 1;
        } else {
            throw InvalidInput("two_sample_t: more than two group labels ('" + labels[c] + "')");
        }
    }
    if (out.group_b.empty()) throw InvalidInput("two_sample_t: need two groups");

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != labels.size()) throw InvalidInput("two_sample_t: row " + std::to_string(r) + " has wrong width");
        double n[2] = {0, 0}, s[2] = {0, 0};
        for (std::size_t c = 0; c < row.size(); ++c) {
            n[group[c]] += 1.0;
            s[group[c]] += row[c];
        }
        if (n[0] < 2 || n[1] < 2) throw InvalidInput("two_sample_t: each group needs >= 2 samples");
        double m[2] = {s[0] / n[0], s[1] / n[1]};
        double ss[2] = {0, 0};
        for (std::size_t c = 0; c < row.size(); ++c) {
            double d = row[c] - m[group[c]];
            ss[group[c]] += d * d;
        }
        double v0 = ss[0] / (n[0] - 1), v1 = ss[1] / (n[1] - 1);
        double se, df;
        if (welch) {
            double a = v0 / n[0], b = v1 / n[1];
            se = std::sqrt(a + b);
            df = (a + b) * (a + b) / (a * a / (n[0] - 1) + b * b / (n[1] - 1));
        } else {
            df = n[0] + n[1] - 2;
            double pooled = (ss[0] + ss[1]) / df;
            se = std::sqrt(pooled * (1.0 / n[0] + 1.0 / n[1]));
        }
        if (!(se > 0.0)) throw NumericalFailure("two_sample_t: zero variance in feature " + std::to_string(r));
        out.t.push_back((m[0] - m[1]) / se);
        out.df.push_back(df);
    }
    return out;
}

std::vector<double> two_sample_z(const TwoSampleResult& t) {
    std::vector<double> z(t.t.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = t_to_z(std::span(&t.t[i], 1), t.df[i])[0];
    return z;
}

std::vector<double> parse_values(std::istream& in) {
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skippable(line)) continue;
        std::string_view v = trim(line);
        if (!v.empty() && v.back() == ',') v.remove_suffix(1);
        double x = 0.0;
        if (!parse_double(v, x) || !std::isfinite(x)) {
            throw IoError("line " + std::to_string(lineno) + ": not a finite number: '" + line + "'", lineno);
        }
        out.push_back(x);
    }
    return out;
}

std::vector<double> read_values(const std::string& path) {
    auto in = open_or_throw(path);
    try {
        return parse_values(in);
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what(), e.line());
    }
}

ExpressionMatrix parse_expression_matrix(std::istream& in) {
    ExpressionMatrix m;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (skippable(line)) continue;
        auto fields = split_fields(line);
        if (!have_header) {
            for (auto f : fields) m.labels.emplace_back(f);
            have_header = true;
            continue;
        }
        std::size_t skip = 0;
        if (fields.size() == m.labels.size() + 1) {
            skip = 1;
        } else if (fields.size() != m.labels.size()) {
            throw IoError("line " + std::to_string(lineno) + ": expected " + std::to_string(m.labels.size()) +
                              " values, found " + std::to_string(fields.size()),
                          lineno);
        }
        std::vector<double> row;
        for (std::size_t i = skip; i < fields.size(); ++i) {
            double x = 0.0;
            if (!parse_double(fields[i], x) || !std::isfinite(x)) {
                throw IoError("line " + std::to_string(lineno) + ": not a finite number: '" + std::string(fields[i]) + "'",
                              lineno);
            }
            row.push_back(x);
        }
        m.rows.push_back(std::move(row));
    }
    if (!have_header) throw IoError("expression matrix has no header row");
    return m;
}

ExpressionMatrix read_expression_matrix(const std::string& path) {
    auto in = open_or_throw(path);
    try {
        return parse_expression_matrix(in);
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what(), e.line());
    }
}

bool looks_like_matrix(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    while (std::getline(in, line)) {
        if (skippable(line)) continue;
        std::string_view v = trim(line);
        if (!v.empty() && v.back() == ',') v.remove_suffix(1);
        return v.find(',') != std::string_view::npos;
    }
    return false;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_table_csv(std::ostream& out, std::span<const TrialReport> reports, const std::string& header_comment) {
    std::istringstream hc(header_comment);
    for (std::string line; std::getline(hc, line);) out << "# " << line << '\n';

    // Union of estimator names, in first-seen order.
    std::vector<std::string> names;
    for (const auto& r : reports) {
        for (const auto& e : r.results) {
            if (std::find(names.begin(), names.end(), e.name) == names.end()) names.push_back(e.name);
        }
    }
    out << "estimator";
    for (const auto& r : reports) out << ',' << r.spec.scheme;
    for (const auto& r : reports) out << ',' << r.spec.scheme << "_se";
    out << '\n';
    for (const auto& name : names) {
        out << name;
        for (const auto& r : reports) {
            const EstimatorResult* e = r.find(name);
            out << ',' << (e ? format_number(e->mean) : "");
        }
        for (const auto& r : reports) {
            const EstimatorResult* e = r.find(name);
            out << ',' << (e ? format_number(e->std_error) : "");
        }
        out << '\n';
    }
}

void write_reports_json(std::ostream& out, std::span<const TrialReport> reports, const std::string& config_json) {
    nlohmann::ordered_json root;
    root["config"] = config_json.empty() ? nlohmann::ordered_json::object() : nlohmann::ordered_json::parse(config_json);
    root["tables"] = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json t;
        t["scheme"] = r.spec.scheme;
        t["family"] = std::string(to_string(r.spec.family));
        t["p"] = r.spec.p;
        if (r.spec.family == Family::anova3) t["n"] = r.spec.n;
        t["trials"] = r.spec.trials;
        t["seed"] = r.spec.seed;
        t["boot_samples"] = r.spec.boot_samples;
        t["outer"] = r.spec.outer;
        t["inner"] = r.spec.inner;
        t["oracle_samples"] = r.spec.oracle_samples;
        t["window"] = r.spec.resolved_window();
        t["bins"] = r.spec.bins;
        t["naive_sse"] = r.naive_sse;
        nlohmann::ordered_json ests = nlohmann::ordered_json::array();
        for (const auto& e : r.results) {
            ests.push_back({{"name", e.name}, {"mean_ratio", e.mean}, {"std_error", e.std_error}, {"ratios", e.ratios}});
        }
        t["estimators"] = std::move(ests);
        root["tables"].push_back(std::move(t));
    }
    out << root.dump(2) << '\n';
}

}  // namespace rankshrink

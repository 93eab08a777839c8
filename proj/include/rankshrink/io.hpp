#pragma once

// Real-data ingestion (t-statistics to z-values, expression matrices) and
// report serialization. All number formatting is locale independent.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rankshrink/harness.hpp"

namespace rankshrink {

/// z_i = Phi^{-1}(T_df(t_i)), computed on the lower tail for each sign so the
/// map is exactly odd. df may be fractional (Welch).
std::vector<double> t_to_z(std::span<const double> t_stats, double df);

struct TwoSampleResult {
    std::vector<double> t;
    std::vector<double> df;  // per feature (constant for the pooled test)
    std::string group_a;
    std::string group_b;
};

/// Matrix rows are features, columns samples; `labels` has one entry per
/// column and exactly two distinct values (the first one seen is group A).
/// Statistic is mean(A) - mean(B) over its standard error.
TwoSampleResult two_sample_t(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& labels,
                             bool welch);

/// Two-sample t then t_to_z (per-feature df).
std::vector<double> two_sample_z(const TwoSampleResult& t);

/// One value per line; blank lines and lines starting with '#' are skipped.
/// A trailing field separator is tolerated. Throws IoError naming the line.
std::vector<double> read_values(const std::string& path);
std::vector<double> parse_values(std::istream& in);

struct ExpressionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
};

/// CSV with a header row of group labels. A data row may carry one extra
/// leading field (a feature name), which is ignored.
ExpressionMatrix read_expression_matrix(const std::string& path);
ExpressionMatrix parse_expression_matrix(std::istream& in);

/// True if the first data line of the file has more than one field.
bool looks_like_matrix(const std::string& path);

/// Shortest round-trip decimal representation, '.' separator.
std::string format_number(double v);

/// One row per estimator, one column per scheme (mean ratio), followed by
/// the matching standard-error columns.
void write_table_csv(std::ostream& out, std::span<const TrialReport> reports, const std::string& header_comment);

/// Full per-trial detail, budgets and seeds.
void write_reports_json(std::ostream& out, std::span<const TrialReport> reports, const std::string& config_json);

}  // namespace rankshrink

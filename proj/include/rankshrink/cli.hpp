#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rankshrink::cli {

enum class Command { shrink, simulate, theorem1, curves };

/// Fully resolved run configuration. Every output records it.
struct CliConfig {
    Command command = Command::shrink;
    std::string input;
    std::string truth;   // optional true means for curves on an input file
    std::string output;
    std::string family;  // empty: inferred from schemes
    std::string schemes;
    std::string estimators;
    bool estimators_set = false;  // false: per-command default list
    std::size_t trials = 20;
    std::size_t p = 1000;
    std::size_t n = 50;
    std::uint64_t boot_samples = 100;
    std::uint64_t outer = 100;
    std::uint64_t inner = 100;
    std::uint64_t oracle_samples = 10000;
    std::size_t bins = 90;
    int degree = 5;
    std::size_t window = 0;  // 0: default for p
    std::uint64_t seed = 0;
    std::string format = "csv";
    bool welch = false;
    double df = 0.0;  // > 0: input values are t-statistics with this df
    // theorem1
    std::string prior = "two_point";
    double prior_a = 2.0;
    std::vector<double> quantiles{0.75, 0.9};
    std::vector<std::size_t> p_grid{100, 250, 500, 1000, 2000};
    std::size_t replicates = 2000;
};

std::string to_string(Command c);

/// JSON object with every field of the config.
std::string config_json(const CliConfig& cfg);

// Each command writes to its --output path, or to `console` when that is empty
// or "-".

int cmd_shrink(const CliConfig& cfg, std::ostream& console);
int cmd_simulate(const CliConfig& cfg, std::ostream& console);
int cmd_theorem1(const CliConfig& cfg, std::ostream& console);
int cmd_curves(const CliConfig& cfg, std::ostream& console);

/// Parses argv and dispatches. Errors are reported on `err` as one JSON
/// line {"error": {...}} and yield a nonzero exit status.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rankshrink::cli

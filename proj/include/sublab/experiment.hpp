#pragma once

#include "sublab/common.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sublab {

using Json = nlohmann::json;

inline constexpr int kConfigVersion = 1;

/// Experiment kinds accepted by the runner.
const std::vector<std::string>& experiment_kinds();

struct ExperimentConfig {
    int version = kConfigVersion;
    std::string kind;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    Json tolerances = Json::object();  // every key present after parsing (defaults filled)
    Json params = Json::object();
};

/// Schema violations, one entry per offending field path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Default parameter and tolerance tables per kind.
Json default_params(const std::string& kind);
Json default_tolerances(const std::string& kind);

/// Strict parse: unknown keys and wrongly typed values are violations; missing
/// params and tolerances take their defaults; every tolerance must be positive.
ExperimentConfig parse_config_json(const Json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

/// Canonical JSON (sorted keys, defaults filled).
Json config_to_json(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical JSON without output_dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string comparison;  // "<=" or ">="
    bool pass = false;
};

enum class RunStatus { Pass, CheckFailure, ConfigError, Refusal };
int exit_code(RunStatus status);
std::string to_string(RunStatus status);

struct RunReport {
    std::string kind;
    std::string config_hash;
    double wall_time = 0.0;
    RunStatus status = RunStatus::Pass;
    std::string message;
    std::vector<CheckResult> checks;
    std::vector<std::string> files;  // relative to the output directory
    bool partial = false;             // refusal after some files were written
    Json summary = Json::object();    // informational values (not checked)

    Json to_json() const;
};

/// Runs one experiment, writing CSV files and report.json into config.output_dir.
/// Numerical refusals are caught and reported with status Refusal.
RunReport run_experiment(const ExperimentConfig& config, int workers);

struct SweepReport {
    std::string axis;
    std::vector<double> values;
    std::vector<RunReport> runs;
    RunStatus status = RunStatus::Pass;
};

/// Runs the config once per value of params.<axis> (a scalar replaces a list
/// parameter by a one-element list). Point i writes into <output_dir>/point_<i>;
/// the merged table sweep.csv lists every check ordered by value.
SweepReport sweep(const ExperimentConfig& config, const std::string& axis, const std::vector<double>& values,
                  int workers);

/// Fixed 17-significant-digit formatting used by every CSV writer.
std::string format_number(double v);

/// Inverse metric of the corrector test symbol: I + x1 P1 + y1 P2.
Eigen::MatrixXd perturbed_inverse_metric(double x1, double y1);

}  // namespace sublab

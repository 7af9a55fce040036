// Command-line front end: run, sweep and validate experiment configs.
// Worker count comes from SUBLAB_WORKERS; exit codes follow RunStatus.

#include "sublab/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

namespace {

void print_report(const sublab::RunReport& r) {
    std::cout << r.kind << " [" << r.config_hash << "] " << sublab::to_string(r.status) << " in " << r.wall_time
              << " s\n";
    if (!r.message.empty()) std::cout << "  " << r.message << "\n";
    for (const auto& c : r.checks)
        std::cout << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << " = " << sublab::format_number(c.measured)
                  << " (" << c.comparison << " " << sublab::format_number(c.tolerance) << ")\n";
}

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> values;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        values.push_back(v);
    }
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sub-Laplacian spectral experiments"};
    app.require_subcommand(1);
    std::string config_path, axis, values, output;

    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("config", config_path, "Config file (JSON)")->required();
    run->add_option("-o,--output", output, "Override the output directory");

    auto* sweep = app.add_subcommand("sweep", "Run a config over a list of parameter values");
    sweep->add_option("config", config_path, "Config file (JSON)")->required();
    sweep->add_option("--axis", axis, "Parameter name under params")->required();
    sweep->add_option("--values", values, "Comma-separated values (may be empty)")->required();
    sweep->add_option("-o,--output", output, "Override the output directory");

    auto* validate = app.add_subcommand("validate", "Check a config and print its canonical form");
    validate->add_option("config", config_path, "Config file (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const int workers = sublab::workers_from_env();
    try {
        auto cfg = sublab::parse_config(config_path);
        if (!output.empty()) cfg.output_dir = output;
        if (validate->parsed()) {
            std::cout << sublab::config_to_json(cfg).dump(2) << "\nhash " << sublab::config_hash(cfg) << "\n";
            return 0;
        }
        if (run->parsed()) {
            const auto report = sublab::run_experiment(cfg, workers);
            print_report(report);
            return sublab::exit_code(report.status);
        }
        std::vector<double> list;
        try {
            list = parse_values(values);
        } catch (const std::exception&) {
            throw sublab::ConfigError({"values: expected a comma-separated list of numbers"});
        }
        const auto report = sublab::sweep(cfg, axis, list, workers);
        for (std::size_t i = 0; i < report.runs.size(); ++i) {
            std::cout << axis << " = " << sublab::format_number(report.values[i]) << ": ";
            print_report(report.runs[i]);
        }
        std::cout << "sweep " << sublab::to_string(report.status) << " (" << report.runs.size() << " points)\n";
        return sublab::exit_code(report.status);
    } catch (const sublab::ConfigError& e) {
        std::cerr << "config error:\n";
        for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
        return sublab::exit_code(sublab::RunStatus::ConfigError);
    }
}

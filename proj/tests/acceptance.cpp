// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Each criterion runs the experiment pipeline and, where possible, re-derives the
// expected numbers independently here.

#include "sublab/experiment.hpp"
#include "sublab/landau.hpp"
#include "sublab/spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

using namespace sublab;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::path("acceptance_out");

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ExperimentConfig config(const std::string& text, const std::string& dir) {
    auto cfg = parse_config_text(text);
    cfg.output_dir = (kRoot / dir).string();
    fs::remove_all(cfg.output_dir);
    return cfg;
}

// quantity,value tables -> map.
std::map<std::string, double> read_pairs(const fs::path& p) {
    std::map<std::string, double> out;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    return out;
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

const CheckResult* find_check(const RunReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string describe(const RunReport& r) {
    std::ostringstream os;
    os << to_string(r.status);
    if (!r.message.empty()) os << " (" << r.message << ")";
    for (const auto& c : r.checks) os << " " << c.name << "=" << format_number(c.measured);
    os << " t=" << r.wall_time << "s";
    return os.str();
}

void expect_pass(Outcome& o, const RunReport& r) {
    o.require(r.status == RunStatus::Pass, r.kind + " " + describe(r));
    if (r.status == RunStatus::Pass) o.detail += (o.detail.empty() ? "" : "; ") + r.kind + " " + describe(r);
}

Outcome oscillator_spectrum_criterion(int workers) {
    Outcome o;
    const auto r = run_experiment(config(R"({"version": 1, "kind": "landau"})", "c1"), workers);
    expect_pass(o, r);
    o.require(r.wall_time < 10.0, "runtime above 10 s");
    // Dense oracle for d <= 2: each level value occurs at least binom(n + d - 1, n) times.
    for (int d : {1, 2})
        for (double lambda : {-0.5, 0.5, 1.0, 2.0}) {
            const auto H = oscillator_symbol(lambda, d, 24);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(H.dense(), Eigen::EigenvaluesOnly);
            for (int n = 0; n <= 6; ++n) {
                const double level = std::abs(lambda) * (2 * n + d);
                const long hits = ((dense.eigenvalues().array() - level).abs() < 1e-8).count();
                long expected = 1;
                for (int k = 1; k <= n; ++k) expected = expected * (n + d - k) / k;
                o.require(hits >= expected, "dense oracle misses level " + std::to_string(n));
            }
        }
    return o;
}

Outcome plancherel_criterion(int workers) {
    Outcome o;
    const auto r = run_experiment(config(R"({"version": 1, "kind": "plancherel"})", "c2"), workers);
    expect_pass(o, r);
    o.require(r.wall_time < 60.0, "runtime above 1 min");
    if (r.status == RunStatus::Pass) {
        // Closed form: int exp(-(x^2 + y^2) - z^2) = pi^{3/2}.
        const auto s = read_pairs(kRoot / "c2" / "plancherel_summary.csv");
        const double exact = std::pow(kPi, 1.5);
        o.require(std::abs(s.at("kernel_l2") / exact - 1.0) < 1e-8, "kernel norm differs from pi^{3/2}");
        o.require(std::abs(s.at("transform_l2") / exact - 1.0) < 1e-4, "transform norm differs from pi^{3/2}");
    }
    return o;
}

Outcome sylvester_criterion(int workers) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    expect_pass(o, run_experiment(config(R"({"version": 1, "kind": "sylvester"})", "c3_sylvester"), workers));
    expect_pass(o, run_experiment(config(R"({"version": 1, "kind": "corrector"})", "c3_corrector"), workers));
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(elapsed < 60.0, "runtime above 1 min");
    // Parity table must cover all odd words of length 1 and 3 on levels 0..3.
    o.require(read_rows(kRoot / "c3_corrector" / "parity.csv").size() == 4 * 10, "parity table incomplete");
    return o;
}

Outcome weyl_criterion(int workers) {
    Outcome o;
    for (const std::string model : {"constant", "nilmanifold"}) {
        const auto r = run_experiment(
            config(R"({"version": 1, "kind": "weyl", "params": {"model": ")" + model + R"("}})", "c4_" + model),
            workers);
        expect_pass(o, r);
        o.require(r.wall_time < 600.0, model + " runtime above 10 min");
        const auto* count = find_check(r, "eigenvalue_count");
        o.require(count && count->measured >= 2000, model + " has fewer than 2000 eigenvalues");
    }
    return o;
}

Outcome proportions_criterion(int workers) {
    Outcome o;
    const auto r = run_experiment(config(R"({"version": 1, "kind": "proportions"})", "c5"), workers);
    expect_pass(o, r);
    if (fs::exists(kRoot / "c5" / "proportions.csv")) {
        for (const auto& row : read_rows(kRoot / "c5" / "proportions.csv")) {
            const int n = std::stoi(row[0]);
            const double profile = 8.0 / (kPi * kPi * (2 * n + 1) * (2 * n + 1));
            o.require(std::abs(std::stod(row[3]) - profile) < 1e-12, "expected column is not the 8/(pi^2 (2n+1)^2) profile");
            o.require(std::abs(std::stod(row[2]) / profile - 1.0) <= 0.1, "level " + row[0] + " off by more than 10%");
        }
    }
    o.require(landau_ratio(0, 1, 1) == boost::rational<long long>(9, 1), "ratio 0:1 is not 9");
    o.require(landau_ratio(0, 2, 1) == boost::rational<long long>(25, 1), "ratio 0:2 is not 25");
    return o;
}

Outcome hs_criterion(int workers) {
    Outcome o;
    const auto r = run_experiment(config(R"({"version": 1, "kind": "hscalc"})", "c6"), workers);
    expect_pass(o, r);
    o.require(r.wall_time < 30.0, "runtime above 30 s");
    return o;
}

Outcome decay_criterion(int workers) {
    Outcome o;
    expect_pass(o, run_experiment(config(R"({"version": 1, "kind": "decay"})", "c7"), workers));
    if (fs::exists(kRoot / "c7" / "decay.csv")) {
        const auto rows = read_rows(kRoot / "c7" / "decay.csv");
        o.require(rows.size() == 7, "expected 7 hbar values");
        o.require(std::stod(rows.front()[0]) == 1.0 / 64.0 && std::abs(std::stod(rows.back()[0]) - 0.125) < 1e-15,
                  "hbar range is not [1/64, 1/8]");
        for (const auto& row : rows) o.require(std::stod(row[3]) <= 1.0 + 1e-9, "resolvent norm above 1/|Im z|");
    }
    return o;
}

Outcome reeb_criterion(int workers) {
    Outcome o;
    expect_pass(o, run_experiment(config(R"({"version": 1, "kind": "reeb"})", "c8"), workers));
    return o;
}

Outcome variance_criterion(int workers) {
    Outcome o;
    const auto r = run_experiment(config(R"({"version": 1, "kind": "variance"})", "c9"), workers);
    expect_pass(o, r);
    if (fs::exists(kRoot / "c9" / "kvn_extraction.csv"))
        for (const auto& row : read_rows(kRoot / "c9" / "kvn_extraction.csv")) {
            o.require(std::stol(row[1]) == 100000, "prefix length is not 10^5");
            o.require(std::abs(std::stod(row[3]) - std::stod(row[4])) <= 0.02, row[0] + " density off by > 0.02");
        }
    return o;
}

// Reduced-size configs for every kind; each runs at 1 and 3 workers.
Outcome determinism_criterion() {
    Outcome o;
    const std::vector<std::pair<std::string, std::string>> configs{
        {"plancherel", R"({"version": 1, "kind": "plancherel", "params": {"N": 24, "half_width": 7.5,
                         "spacing": 0.5, "lambda_nodes": 8}})"},
        {"landau", R"({"version": 1, "kind": "landau", "params": {"N": 12, "n_max": 4}})"},
        {"sylvester", R"({"version": 1, "kind": "sylvester", "seed": 11})"},
        {"corrector", R"({"version": 1, "kind": "corrector", "params": {"N": 16}})"},
        {"spectrum", R"({"version": 1, "kind": "spectrum", "params": {"model": "sine", "grid": 16,
                       "delta_max": 60.0, "save_vectors": true}})"},
        {"weyl", R"({"version": 1, "kind": "weyl", "params": {"model": "nilmanifold", "grid": 32,
                   "delta_max": 120.0, "min_count": 0}})"},
        {"proportions", R"({"version": 1, "kind": "proportions", "params": {"grid": 32, "delta_max": 200.0}})"},
        {"variance", R"({"version": 1, "kind": "variance", "params": {"grid": 16, "delta_max": 60.0,
                       "kvn_length": 5000}})"},
        {"hscalc", R"({"version": 1, "kind": "hscalc", "seed": 5, "params": {"size": 12}})"},
        {"reeb", R"({"version": 1, "kind": "reeb", "params": {"T": 2.0, "starts": 5}})"},
        {"decay", R"({"version": 1, "kind": "decay", "params": {"n": 32, "hbars": [0.125, 0.25]}})"},
    };
    int compared = 0;
    for (const auto& [kind, text] : configs) {
        const auto a = run_experiment(config(text, "c10_" + kind + "_w1"), 1);
        const auto b = run_experiment(config(text, "c10_" + kind + "_w3"), 3);
        o.require(a.files == b.files && !a.files.empty(), kind + ": manifests differ or are empty");
        o.require(a.status == b.status, kind + ": status differs");
        for (const auto& f : a.files) {
            if (fs::path(f).extension() != ".csv") continue;
            const auto x = slurp(kRoot / ("c10_" + kind + "_w1") / f);
            const auto y = slurp(kRoot / ("c10_" + kind + "_w3") / f);
            o.require(!x.empty() && x == y, kind + "/" + f + " differs");
            ++compared;
        }
    }
    o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(compared) + " CSV files compared";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const int workers = workers_from_env();
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 oscillator spectrum", [&] { return oscillator_spectrum_criterion(workers); }},
        {"2 Plancherel identity", [&] { return plancherel_criterion(workers); }},
        {"3 Sylvester and corrector", [&] { return sylvester_criterion(workers); }},
        {"4 Weyl exponent", [&] { return weyl_criterion(workers); }},
        {"5 Landau proportions", [&] { return proportions_criterion(workers); }},
        {"6 Helffer-Sjostrand calculus", [&] { return hs_criterion(workers); }},
        {"7 disjoint-support decay", [&] { return decay_criterion(workers); }},
        {"8 Reeb geometry", [&] { return reeb_criterion(workers); }},
        {"9 quantum variance machinery", [&] { return variance_criterion(workers); }},
        {"10 determinism", [] { return determinism_criterion(); }},
    };
    // Optional argument: run only the criteria whose number is listed (e.g. "1,3").
    std::vector<std::string> only;
    if (argc > 1) {
        std::stringstream ss(argv[1]);
        std::string item;
        while (std::getline(ss, item, ',')) only.push_back(item);
    }
    bool all = true;
    for (const auto& [name, fn] : criteria) {
        const std::string number = name.substr(0, name.find(' '));
        if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %s [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), t, o.detail.c_str());
        all = all && o.pass;
    }
    return all ? 0 : 1;
}

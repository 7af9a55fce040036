#include "doctest.h"

#include "sublab/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sublab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "sublab_experiment_tests" / name;
    fs::remove_all(dir);
    return dir;
}

std::vector<std::string> violations_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

}  // namespace

TEST_CASE("minimal config gets defaults and a stable hash") {
    const auto a = parse_config_text(R"({"version": 1, "kind": "plancherel"})");
    CHECK(a.params.at("N").get<int>() == 64);
    CHECK(a.tolerances.at("relative_error").get<double>() == 1e-4);
    const auto b = parse_config_text(R"({"version": 1, "kind": "plancherel", "params": {"N": 64},
                                         "output_dir": "elsewhere"})");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    const auto c = parse_config_text(R"({"version": 1, "kind": "plancherel", "seed": 2})");
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("schema violations carry field paths") {
    auto v = violations_of(R"({"version": 1, "kind": "plancherel", "tolerances": {"relative_error": -1}})");
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "tolerances.relative_error: must be positive");
    v = violations_of(R"({"version": 1, "kind": "landau", "extra": 3, "params": {"N": "big", "typo": 1}})");
    CHECK(v.size() == 3);
    v = violations_of(R"({"kind": "weyl"})");
    CHECK(v.size() == 1);
    v = violations_of(R"({"version": 1, "kind": "nope"})");
    CHECK(v.size() == 1);
    v = violations_of(R"({"version": 1, "kind": "weyl", "params": {"model": "sphere"}})");
    CHECK(v.size() == 1);
    v = violations_of(R"({"version": 1, "kind": "landau", "params": {"N": 24.5}})");
    CHECK(v.size() == 1);
    v = violations_of("{not json");
    CHECK(v.size() == 1);
}

TEST_CASE("emit, parse, emit is the identity") {
    const auto cfg = parse_config_text(R"({"version": 1, "kind": "decay", "seed": 7,
                                           "params": {"n": 64, "hbars": [0.1, 0.2]},
                                           "tolerances": {"slope": 2.5}})");
    const Json once = config_to_json(cfg);
    const auto again = parse_config_json(once);
    CHECK(config_to_json(again) == once);
    CHECK(config_to_json(again).dump() == once.dump());
    CHECK(config_hash(again) == config_hash(cfg));
}

TEST_CASE("17 significant digits") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(2.0) == "2");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("landau run passes and writes its manifest") {
    auto cfg = parse_config_text(R"({"version": 1, "kind": "landau", "params": {"d": [1, 2], "N": 12, "n_max": 4}})");
    cfg.output_dir = scratch("landau").string();
    const auto r = run_experiment(cfg, 2);
    CHECK(r.status == RunStatus::Pass);
    CHECK(exit_code(r.status) == 0);
    for (const auto& f : r.files) CHECK(fs::exists(fs::path(cfg.output_dir) / f));
    const auto report = Json::parse(slurp(fs::path(cfg.output_dir) / "report.json"));
    CHECK(report.at("config_hash") == config_hash(cfg));
    CHECK(report.at("checks").size() == r.checks.size());
}

TEST_CASE("weyl on an incomplete dataset is refused") {
    auto cfg = parse_config_text(R"({"version": 1, "kind": "weyl",
                                     "params": {"grid": 16, "delta_max": 100.0, "mode_limit": 1}})");
    cfg.output_dir = scratch("weyl_incomplete").string();
    const auto r = run_experiment(cfg, 1);
    CHECK(r.status == RunStatus::Refusal);
    CHECK(exit_code(r.status) == 3);
    CHECK(r.partial);
}

TEST_CASE("identical config and seed give identical CSV bytes across worker counts") {
    auto cfg = parse_config_text(R"({"version": 1, "kind": "reeb", "params": {"T": 1.0, "starts": 4}})");
    cfg.output_dir = scratch("det1").string();
    const auto a = run_experiment(cfg, 1);
    cfg.output_dir = scratch("det3").string();
    const auto b = run_experiment(cfg, 3);
    REQUIRE(a.files == b.files);
    const auto base = fs::temp_directory_path() / "sublab_experiment_tests";
    for (const auto& f : a.files) {
        const auto one = slurp(base / "det1" / f);
        CHECK(!one.empty());
        CHECK(one == slurp(base / "det3" / f));
    }
}

TEST_CASE("sweeps") {
    auto cfg = parse_config_text(R"({"version": 1, "kind": "decay", "params": {"n": 32}})");
    cfg.output_dir = scratch("sweep_empty").string();
    const auto empty = sweep(cfg, "hbars", {}, 2);
    CHECK(empty.runs.empty());
    CHECK(exit_code(empty.status) == 0);

    cfg.output_dir = scratch("sweep_hbar").string();
    const auto s = sweep(cfg, "hbars", {0.25, 0.125, 0.5}, 2);
    REQUIRE(s.runs.size() == 3);
    CHECK(s.values == std::vector<double>{0.125, 0.25, 0.5});
    std::istringstream merged(slurp(fs::path(cfg.output_dir) / "sweep_decay.csv"));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(merged, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0].rfind("hbars,hbar,", 0) == 0);
    CHECK(lines[1].rfind("0.125,", 0) == 0);
    CHECK(lines[3].rfind("0.5,", 0) == 0);

    CHECK_THROWS_AS(sweep(cfg, "no_such_param", {1.0}, 1), ConfigError);
    CHECK_THROWS_AS(sweep(cfg, "n", {32.5}, 1), ConfigError);
    const auto bad = sweep(cfg, "n", {-4.0}, 1);
    CHECK(bad.runs[0].status == RunStatus::ConfigError);
}

TEST_CASE("contour node sweep gives a monotone error column") {
    auto cfg = parse_config_text(R"({"version": 1, "kind": "sylvester"})");
    cfg.output_dir = scratch("sweep_contour").string();
    const auto s = sweep(cfg, "contour_nodes", {8, 12, 16, 24}, 1);
    double previous = 1e300;
    for (const auto& r : s.runs) {
        const auto c = std::find_if(r.checks.begin(), r.checks.end(),
                                    [](const CheckResult& x) { return x.name == "contour_vs_direct"; });
        REQUIRE(c != r.checks.end());
        CHECK(c->measured < previous);
        previous = c->measured;
    }
}

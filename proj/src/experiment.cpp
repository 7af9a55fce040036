#include "sublab/experiment.hpp"

#include "sublab/heisenberg.hpp"
#include "sublab/kernel_io.hpp"
#include "sublab/landau.hpp"
#include "sublab/models.hpp"
#include "sublab/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace sublab {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Schema.
// ---------------------------------------------------------------------------

namespace {

enum class Constraint { Any, Positive, NonNegative };

struct ParamSpec {
    std::string key;
    Json value;
    Constraint constraint = Constraint::Any;
    std::vector<std::string> choices;
};

std::vector<ParamSpec> model_specs(const std::string& model, double delta_max, int grid, bool with_vectors) {
    std::vector<ParamSpec> specs{
        {"model", model, Constraint::Any, {"constant", "sine", "nilmanifold"}},
        {"flux", 1, Constraint::Positive, {}},
        {"b", 1.0, Constraint::Positive, {}},
        {"eps1", 0.3, Constraint::Any, {}},
        {"eps2", 0.2, Constraint::Any, {}},
        {"normalization", "metric", Constraint::Any, {"metric", "connection"}},
        {"grid", grid, Constraint::Positive, {}},
        {"delta_max", delta_max, Constraint::Positive, {}},
        {"mode_limit", 400, Constraint::Positive, {}},
        {"max_plaquette_flux", 0.05, Constraint::Positive, {}},
    };
    if (with_vectors) specs.push_back({"save_vectors", false, Constraint::Any, {}});
    return specs;
}

Json geometric_list(double lo, double hi, int count) {
    Json a = Json::array();
    for (int i = 0; i < count; ++i) a.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return a;
}

const std::map<std::string, std::vector<ParamSpec>>& spec_table() {
    static const std::map<std::string, std::vector<ParamSpec>> table = [] {
        std::map<std::string, std::vector<ParamSpec>> t;
        t["plancherel"] = {
            {"N", 64, Constraint::Positive, {}},
            {"half_width", 7.5, Constraint::Positive, {}},
            {"spacing", 0.3, Constraint::Positive, {}},
            {"lambda_min", 0.25, Constraint::Positive, {}},
            {"lambda_max", 4.5, Constraint::Positive, {}},
            {"lambda_nodes", 24, Constraint::Positive, {}},
            {"kernel_file", "", Constraint::Any, {}},
        };
        t["landau"] = {
            {"d", Json::array({1, 2, 3}), Constraint::Positive, {}},
            {"lambda", Json::array({-0.5, 0.5, 1.0, 2.0}), Constraint::Any, {}},
            {"N", 24, Constraint::Positive, {}},
            {"n_max", 6, Constraint::NonNegative, {}},
        };
        t["sylvester"] = {
            {"d", 1, Constraint::Positive, {}},
            {"lambda", 1.0, Constraint::Any, {}},
            {"N", 24, Constraint::Positive, {}},
            {"level", 1, Constraint::NonNegative, {}},
            {"contour_nodes", 64, Constraint::Positive, {}},
        };
        t["corrector"] = {
            {"N", 32, Constraint::Positive, {}},
            {"level", 0, Constraint::NonNegative, {}},
            {"lambda", 1.0, Constraint::Any, {}},
            {"step", 1e-3, Constraint::Positive, {}},
            {"parity_levels", 3, Constraint::NonNegative, {}},
        };
        t["spectrum"] = model_specs("constant", 2.0 * kPi * 20.0, 48, true);
        t["weyl"] = model_specs("constant", 2.0 * kPi * 50.0, 64, false);
        t["weyl"].push_back({"window_lo_fraction", 0.1, Constraint::Positive, {}});
        t["weyl"].push_back({"samples", 64, Constraint::Positive, {}});
        t["weyl"].push_back({"min_count", 2000, Constraint::NonNegative, {}});
        t["proportions"] = model_specs("constant", 2.0 * kPi * 60.0, 64, false);
        t["proportions"].push_back({"n_max", 3, Constraint::NonNegative, {}});
        t["variance"] = model_specs("constant", 2.0 * kPi * 20.0, 48, false);
        for (const auto& s : std::vector<ParamSpec>{
                 {"observable", "cos2pix1", Constraint::Any, {"cos2pix1", "cos2pix2", "constant"}},
                 {"cluster_mode", "adapted", Constraint::Any, {"average", "adapted", "per_vector"}},
                 {"n_deltas", 8, Constraint::Positive, {}},
                 {"delta0_fraction", 0.25, Constraint::Positive, {}},
                 {"shift_constant", 0.7, Constraint::Any, {}},
                 {"kvn_length", 100000, Constraint::Positive, {}},
                 {"kvn_bernoulli", 0.01, Constraint::Positive, {}},
             })
            t["variance"].push_back(s);
        t["hscalc"] = {
            {"size", 50, Constraint::Positive, {}},
            {"center", 0.0, Constraint::Any, {}},
            {"radius", 1.0, Constraint::Positive, {}},
            {"aa_order", 3, Constraint::NonNegative, {}},
            {"spectrum_radius", 1.5, Constraint::Positive, {}},
        };
        t["reeb"] = {
            {"flux", 1, Constraint::Positive, {}},
            {"eps1", 0.5, Constraint::Any, {}},
            {"eps2", 0.0, Constraint::Any, {}},
            {"b", 1.0, Constraint::Positive, {}},
            {"normalization", "metric", Constraint::Any, {"metric", "connection"}},
            {"T", 10.0, Constraint::Positive, {}},
            {"dt", 1e-3, Constraint::Positive, {}},
            {"starts", 8, Constraint::Positive, {}},
        };
        t["decay"] = {
            {"n", 192, Constraint::Positive, {}},
            {"m", 1, Constraint::Positive, {}},
            {"flux", 1, Constraint::Positive, {}},
            {"b", 1.0, Constraint::Positive, {}},
            {"hbars", geometric_list(1.0 / 64.0, 1.0 / 8.0, 7), Constraint::Positive, {}},
            {"psi1", Json::array({0.02, 0.22}), Constraint::Any, {}},
            {"psi2", Json::array({0.52, 0.72}), Constraint::Any, {}},
            {"control_psi2", Json::array({0.1, 0.3}), Constraint::Any, {}},
            {"z_re", 0.0, Constraint::Any, {}},
            {"z_im", 1.0, Constraint::Any, {}},
            {"iterations", 60, Constraint::Positive, {}},
        };
        return t;
    }();
    return table;
}

const std::map<std::string, Json>& tolerance_table() {
    static const std::map<std::string, Json> table = {
        {"plancherel", {{"relative_error", 1e-4}}},
        {"landau", {{"eigenvalue", 1e-8}}},
        {"sylvester", {{"residual", 1e-10}, {"contour_vs_direct", 1e-8}, {"dense_reference", 1e-8}}},
        {"corrector", {{"compatibility", 1e-9}, {"parity", 1e-12}}},
        {"spectrum", Json::object()},
        {"weyl", {{"exponent", 0.1}}},
        {"proportions", {{"relative", 0.1}}},
        {"variance", {{"zero", 1e-12}, {"shift", 1e-12}, {"contrast", 0.9}, {"kvn_density", 0.02}}},
        {"hscalc", {{"error", 1e-6}, {"commutator", 1e-8}}},
        {"reeb", {{"field", 1e-10}, {"volume", 1e-4}, {"periodicity", 1e-8}}},
        {"decay", {{"slope", 3.0}, {"control_slope", 0.5}}},
    };
    return table;
}

const char* type_name(const Json& spec) {
    if (spec.is_boolean()) return "a boolean";
    if (spec.is_number_integer()) return "an integer";
    if (spec.is_number()) return "a number";
    if (spec.is_string()) return "a string";
    return "an array";
}

// Coerces `in` to the type of `spec`; arrays are checked element-wise.
bool coerce(const Json& spec, const Json& in, Json& out) {
    if (spec.is_boolean()) {
        if (!in.is_boolean()) return false;
        out = in;
    } else if (spec.is_number_integer()) {
        if (!in.is_number_integer()) return false;
        out = in.get<long long>();
    } else if (spec.is_number()) {
        if (!in.is_number()) return false;
        out = in.get<double>();
    } else if (spec.is_string()) {
        if (!in.is_string()) return false;
        out = in;
    } else {
        if (!in.is_array()) return false;
        out = Json::array();
        for (const auto& e : in) {
            Json v;
            if (!coerce(spec.front(), e, v)) return false;
            out.push_back(v);
        }
    }
    return true;
}

void check_constraint(const std::string& path, const Json& v, Constraint c, std::vector<std::string>& violations) {
    if (v.is_array()) {
        if (v.empty()) violations.push_back(path + ": must not be empty");
        for (std::size_t i = 0; i < v.size(); ++i)
            check_constraint(path + "[" + std::to_string(i) + "]", v[i], c, violations);
        return;
    }
    if (!v.is_number()) return;
    const double x = v.get<double>();
    if (!std::isfinite(x)) violations.push_back(path + ": must be finite");
    else if (c == Constraint::Positive && !(x > 0.0)) violations.push_back(path + ": must be positive");
    else if (c == Constraint::NonNegative && x < 0.0) violations.push_back(path + ": must be nonnegative");
}

void check_interval(const Json& p, const std::string& key, std::vector<std::string>& violations) {
    const auto& v = p.at(key);
    if (v.size() != 2 || !(v[0].get<double>() < v[1].get<double>()))
        violations.push_back("params." + key + ": expected [lo, hi] with lo < hi");
}

void validate_kind(const std::string& kind, const Json& p, std::vector<std::string>& violations) {
    auto fail = [&](const std::string& msg) { violations.push_back(msg); };
    if (kind == "plancherel") {
        if (p.at("lambda_max").get<double>() <= p.at("lambda_min").get<double>())
            fail("params.lambda_max: must exceed params.lambda_min");
    } else if (kind == "landau") {
        for (const auto& l : p.at("lambda"))
            if (l.get<double>() == 0.0) fail("params.lambda: zero is not a representation parameter");
        for (const auto& d : p.at("d"))
            if (d.get<int>() > 3) fail("params.d: dimensions above 3 are not supported");
        if (2 * p.at("n_max").get<int>() >= p.at("N").get<int>()) fail("params.n_max: requires 2 n_max < N");
    } else if (kind == "sylvester") {
        if (p.at("lambda").get<double>() == 0.0) fail("params.lambda: must be nonzero");
        if (2 * p.at("level").get<int>() >= p.at("N").get<int>()) fail("params.level: requires 2 level < N");
        if (p.at("d").get<int>() > 3) fail("params.d: dimensions above 3 are not supported");
    } else if (kind == "corrector") {
        if (p.at("lambda").get<double>() == 0.0) fail("params.lambda: must be nonzero");
        if (2 * std::max(p.at("level").get<int>(), p.at("parity_levels").get<int>()) >= p.at("N").get<int>())
            fail("params.parity_levels: requires 2 level < N");
    } else if (kind == "decay") {
        check_interval(p, "psi1", violations);
        check_interval(p, "psi2", violations);
        check_interval(p, "control_psi2", violations);
        if (p.at("z_im").get<double>() == 0.0) fail("params.z_im: z must be off the real axis");
    } else if (kind == "reeb") {
        if (std::abs(p.at("eps1").get<double>()) + std::abs(p.at("eps2").get<double>()) >= 1.0)
            fail("params.eps1: |eps1| + |eps2| must be below 1");
    }
    if (p.contains("model")) {
        if (std::abs(p.at("eps1").get<double>()) + std::abs(p.at("eps2").get<double>()) >= 1.0)
            fail("params.eps1: |eps1| + |eps2| must be below 1");
        if (p.at("grid").get<int>() < 8) fail("params.grid: must be at least 8");
    }
    if (kind == "weyl" && p.at("window_lo_fraction").get<double>() >= 1.0)
        fail("params.window_lo_fraction: must be below 1");
    if (kind == "variance") {
        if (p.at("delta0_fraction").get<double>() > 1.0) fail("params.delta0_fraction: must not exceed 1");
        if (p.at("kvn_bernoulli").get<double>() >= 1.0) fail("params.kvn_bernoulli: must be below 1");
    }
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"plancherel", "landau",   "sylvester", "corrector",
                                                "spectrum",   "weyl",     "proportions", "variance",
                                                "hscalc",     "reeb",     "decay"};
    return kinds;
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid config: " + join(violations, "; ")), violations_(std::move(violations)) {}

Json default_params(const std::string& kind) {
    const auto it = spec_table().find(kind);
    if (it == spec_table().end()) throw ConfigError({"kind: unknown experiment kind '" + kind + "'"});
    Json j = Json::object();
    for (const auto& s : it->second) j[s.key] = s.value;
    return j;
}

Json default_tolerances(const std::string& kind) {
    const auto it = tolerance_table().find(kind);
    if (it == tolerance_table().end()) throw ConfigError({"kind: unknown experiment kind '" + kind + "'"});
    return it->second;
}

ExperimentConfig parse_config_json(const Json& j) {
    std::vector<std::string> violations;
    if (!j.is_object()) throw ConfigError({"<root>: expected a JSON object"});
    static const std::vector<std::string> top{"version", "kind", "seed", "output_dir", "tolerances", "params"};
    for (const auto& [key, value] : j.items())
        if (std::find(top.begin(), top.end(), key) == top.end()) violations.push_back(key + ": unknown key");

    ExperimentConfig cfg;
    if (!j.contains("version")) {
        violations.push_back("version: missing");
    } else if (!j["version"].is_number_integer() || j["version"].get<long long>() != kConfigVersion) {
        violations.push_back("version: unsupported (expected " + std::to_string(kConfigVersion) + ")");
    }
    if (!j.contains("kind") || !j["kind"].is_string()) {
        violations.push_back("kind: missing or not a string");
        throw ConfigError(violations);
    }
    cfg.kind = j["kind"].get<std::string>();
    const auto spec_it = spec_table().find(cfg.kind);
    if (spec_it == spec_table().end()) {
        violations.push_back("kind: unknown experiment kind '" + cfg.kind + "'");
        throw ConfigError(violations);
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) violations.push_back("seed: expected a nonnegative integer");
        else cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string() || j["output_dir"].get<std::string>().empty())
            violations.push_back("output_dir: expected a nonempty string");
        else cfg.output_dir = j["output_dir"].get<std::string>();
    }

    cfg.tolerances = default_tolerances(cfg.kind);
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (!t.is_object()) {
            violations.push_back("tolerances: expected an object");
        } else {
            for (const auto& [key, value] : t.items()) {
                const std::string path = "tolerances." + key;
                if (!cfg.tolerances.contains(key)) violations.push_back(path + ": unknown key");
                else if (!value.is_number()) violations.push_back(path + ": expected a number");
                else if (!(value.get<double>() > 0.0) || !std::isfinite(value.get<double>()))
                    violations.push_back(path + ": must be positive");
                else cfg.tolerances[key] = value.get<double>();
            }
        }
    }

    cfg.params = default_params(cfg.kind);
    if (j.contains("params")) {
        const auto& p = j["params"];
        if (!p.is_object()) {
            violations.push_back("params: expected an object");
        } else {
            for (const auto& [key, value] : p.items()) {
                const std::string path = "params." + key;
                const auto s = std::find_if(spec_it->second.begin(), spec_it->second.end(),
                                            [&](const ParamSpec& ps) { return ps.key == key; });
                if (s == spec_it->second.end()) {
                    violations.push_back(path + ": unknown key");
                    continue;
                }
                Json v;
                if (!coerce(s->value, value, v)) {
                    violations.push_back(path + ": expected " + std::string(type_name(s->value)));
                    continue;
                }
                if (!s->choices.empty() &&
                    std::find(s->choices.begin(), s->choices.end(), v.get<std::string>()) == s->choices.end()) {
                    violations.push_back(path + ": must be one of " + join(s->choices, ", "));
                    continue;
                }
                const std::size_t before = violations.size();
                check_constraint(path, v, s->constraint, violations);
                if (violations.size() == before) cfg.params[key] = v;
            }
        }
    }
    if (violations.empty()) validate_kind(cfg.kind, cfg.params, violations);
    if (!violations.empty()) throw ConfigError(violations);
    return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError({std::string("<root>: ") + e.what()});
    }
    return parse_config_json(j);
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"<file>: cannot open " + path});
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str());
}

Json config_to_json(const ExperimentConfig& c) {
    return Json{{"version", c.version}, {"kind", c.kind},         {"seed", c.seed},
                {"output_dir", c.output_dir}, {"tolerances", c.tolerances}, {"params", c.params}};
}

std::string config_hash(const ExperimentConfig& config) {
    Json j = config_to_json(config);
    j.erase("output_dir");
    const std::string text = j.dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

int exit_code(RunStatus status) {
    switch (status) {
        case RunStatus::Pass: return 0;
        case RunStatus::CheckFailure: return 1;
        case RunStatus::ConfigError: return 2;
        case RunStatus::Refusal: return 3;
    }
    return 3;
}

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Pass: return "pass";
        case RunStatus::CheckFailure: return "check_failure";
        case RunStatus::ConfigError: return "config_error";
        case RunStatus::Refusal: return "refusal";
    }
    return "refusal";
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json RunReport::to_json() const {
    Json j;
    j["kind"] = kind;
    j["config_hash"] = config_hash;
    j["wall_time_seconds"] = wall_time;
    j["status"] = to_string(status);
    j["exit_code"] = exit_code(status);
    j["message"] = message;
    j["partial"] = partial;
    j["checks"] = Json::array();
    for (const auto& c : checks)
        j["checks"].push_back({{"name", c.name},
                               {"measured", c.measured},
                               {"tolerance", c.tolerance},
                               {"comparison", c.comparison},
                               {"pass", c.pass}});
    j["files"] = files;
    j["summary"] = summary;
    return j;
}

Eigen::MatrixXd perturbed_inverse_metric(double x1, double y1) {
    Eigen::Matrix2d p1, p2;
    p1 << 0.3, 0.1, 0.1, -0.2;
    p2 << 0.05, 0.2, 0.2, 0.15;
    return Eigen::MatrixXd(Eigen::Matrix2d::Identity() + x1 * p1 + y1 * p2);
}

// ---------------------------------------------------------------------------
// Runners.
// ---------------------------------------------------------------------------

namespace {

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
    Table& row() {
        rows_.emplace_back();
        return *this;
    }
    Table& num(double v) {
        rows_.back().push_back(format_number(v));
        return *this;
    }
    Table& integer(long long v) {
        rows_.back().push_back(std::to_string(v));
        return *this;
    }
    Table& text(const std::string& s) {
        rows_.back().push_back(s);
        return *this;
    }
    std::string str() const {
        std::string out = join(header_, ",") + "\n";
        for (const auto& r : rows_) out += join(r, ",") + "\n";
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct Run {
    const ExperimentConfig& cfg;
    int workers;
    fs::path dir;
    RunReport& report;

    const Json& param(const std::string& key) const { return cfg.params.at(key); }
    double real(const std::string& key) const { return param(key).get<double>(); }
    int integer(const std::string& key) const { return param(key).get<int>(); }
    std::string text(const std::string& key) const { return param(key).get<std::string>(); }
    double tol(const std::string& key) const { return cfg.tolerances.at(key).get<double>(); }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        out << content;
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        report.files.push_back(name);
    }
    void write(const std::string& name, const Table& t) { write(name, t.str()); }

    void at_most(const std::string& name, double measured, double tolerance) {
        report.checks.push_back({name, measured, tolerance, "<=", measured <= tolerance});
    }
    void at_least(const std::string& name, double measured, double tolerance) {
        report.checks.push_back({name, measured, tolerance, ">=", measured >= tolerance});
    }
};

std::vector<double> reals(const Json& a) {
    std::vector<double> v;
    for (const auto& e : a) v.push_back(e.get<double>());
    return v;
}

void run_plancherel(Run& run) {
    const std::string file = run.text("kernel_file");
    SampledKernel kernel;
    if (file.empty()) {
        const double w = run.real("half_width"), h = run.real("spacing");
        kernel = sample_kernel_box(1, {w, w, w}, {h, h, h}, [](const GroupElement& g) {
            return cd(std::exp(-0.5 * (g.x.squaredNorm() + g.y.squaredNorm()) - 0.5 * g.z * g.z), 0.0);
        });
    } else {
        kernel = fs::path(file).extension() == ".csv" ? load_kernel_csv(file) : load_kernel_binary(file);
    }
    const auto grid = LambdaGrid::log_gauss(run.real("lambda_min"), run.real("lambda_max"), run.integer("lambda_nodes"));
    const auto r = plancherel_check(kernel, grid, run.integer("N"), run.workers);

    Table integrand({"lambda", "integrand"});
    for (std::size_t i = 0; i < r.lambdas.size(); ++i) integrand.row().num(r.lambdas[i]).num(r.integrand[i]);
    run.write("plancherel_integrand.csv", integrand);
    Table summary({"quantity", "value"});
    summary.row().text("kernel_l2").num(r.kernel_l2);
    summary.row().text("transform_l2").num(r.transform_l2);
    summary.row().text("transform_l2_raw").num(r.transform_l2_raw);
    summary.row().text("relative_error").num(r.relative_error);
    summary.row().text("relative_error_raw").num(r.relative_error_raw);
    summary.row().text("gap_fraction").num(r.gap_fraction);
    summary.row().text("max_band_leakage").num(r.max_band_leakage);
    run.write("plancherel_summary.csv", summary);
    run.report.summary["warnings"] = r.warnings;
    run.at_most("relative_error", r.relative_error, run.tol("relative_error"));
}

void run_landau(Run& run) {
    const int N = run.integer("N"), n_max = run.integer("n_max");
    struct Case {
        int d = 1;
        double lambda = 1.0;
        double max_error = 0.0;
        double max_residual = 0.0;
        long safe_count = 0;
        std::vector<long> found;
    };
    std::vector<Case> cases;
    for (const auto& d : run.param("d"))
        for (const auto& l : run.param("lambda")) {
            Case c;
            c.d = d.get<int>();
            c.lambda = l.get<double>();
            cases.push_back(c);
        }

    parallel_for(cases.size(), run.workers, [&](std::size_t ci) {
        Case& c = cases[ci];
        const auto H = oscillator_symbol(c.lambda, c.d, N);
        const auto spectrum = oscillator_spectrum(H);
        const double scale = std::abs(c.lambda);
        c.found.assign(n_max + 1, 0);
        const long dim = H.dim();
        std::vector<std::vector<int>> alphas(dim);
        for (long f = 0; f < dim; ++f) alphas[f] = multi_index(f, c.d, N);
        Eigen::VectorXd v(dim);
        for (const auto& e : spectrum) {
            const long n = std::lround((e.value / scale - c.d) / 2.0);
            c.max_error = std::max(c.max_error, std::abs(e.value - scale * (2.0 * n + c.d)));
            if (n >= 0 && n <= n_max) ++c.found[n];
            ++c.safe_count;
            for (long f = 0; f < dim; ++f) {
                const auto& alpha = alphas[f];
                double prod = 1.0;
                for (int a = 0; a < c.d; ++a) prod *= H.axis_vectors(alpha[a], e.axis_index[a]);
                v(f) = prod;
            }
            c.max_residual = std::max(c.max_residual, (H.matrix * v - e.value * v).norm() / v.norm());
        }
    });

    Table levels({"d", "lambda", "n", "eigenvalue", "multiplicity", "expected_multiplicity"});
    Table cases_table({"d", "lambda", "safe_band_eigenvalues", "max_eigenvalue_error", "max_matrix_residual"});
    double max_error = 0.0, max_residual = 0.0;
    long mismatch = 0;
    for (const auto& c : cases) {
        for (int n = 0; n <= n_max; ++n) {
            const long expected = landau_multiplicity(n, c.d);
            levels.row().integer(c.d).num(c.lambda).integer(n).num(std::abs(c.lambda) * (2 * n + c.d))
                .integer(c.found[n]).integer(expected);
            mismatch += std::abs(c.found[n] - expected);
        }
        cases_table.row().integer(c.d).num(c.lambda).integer(c.safe_count).num(c.max_error).num(c.max_residual);
        max_error = std::max(max_error, c.max_error);
        max_residual = std::max(max_residual, c.max_residual);
    }
    run.write("landau_levels.csv", levels);
    run.write("landau_cases.csv", cases_table);
    run.at_most("eigenvalue_error", max_error, run.tol("eigenvalue"));
    run.at_most("matrix_residual", max_residual, run.tol("eigenvalue"));
    run.report.checks.push_back({"multiplicity_mismatch", static_cast<double>(mismatch), 0.0, "<=", mismatch == 0});
}

CMatrix random_complex(long rows, long cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    CMatrix Y(rows, cols);
    for (long j = 0; j < cols; ++j)
        for (long i = 0; i < rows; ++i) Y(i, j) = cd(normal(rng), normal(rng));
    return Y / Y.norm();
}

void run_sylvester(Run& run) {
    const int d = run.integer("d"), N = run.integer("N"), level = run.integer("level");
    const double lambda = run.real("lambda");
    const auto H = oscillator_symbol(lambda, d, N);
    const CMatrix Y = random_complex(H.dim(), H.dim(), run.cfg.seed);
    const auto contour = ContourSpec::around_level(lambda, d, level, run.integer("contour_nodes"));
    const auto direct = sylvester_solve(H, level, Y, SylvesterMethod::Direct, contour);
    const auto integral = sylvester_solve(H, level, Y, SylvesterMethod::Contour, contour);
    const double difference = (integral.X - direct.X).norm();

    Table t({"quantity", "value"});
    t.row().text("direct_residual").num(direct.residual);
    t.row().text("contour_residual").num(integral.residual);
    t.row().text("contour_vs_direct").num(difference);
    t.row().text("gap").num(direct.gap);
    t.row().text("solution_norm").num(direct.X.norm());
    run.at_most("direct_residual", direct.residual, run.tol("residual"));
    run.at_most("contour_vs_direct", difference, run.tol("contour_vs_direct"));
    if (H.dim() <= 32) {
        const CMatrix Hd = H.dense().cast<cd>();
        const auto split = spectral_split(Hd, std::abs(lambda) * (2 * level + d), std::abs(lambda) / 2,
                                          safe_band_mask(d, N));
        const double dense = (sylvester_dense_reference(Hd, split.projector, Y) - direct.X).norm();
        t.row().text("dense_reference").num(dense);
        run.at_most("dense_reference", dense, run.tol("dense_reference"));
    }
    run.write("sylvester.csv", t);
}

void run_corrector(Run& run) {
    const int N = run.integer("N"), level = run.integer("level");
    const double lambda = run.real("lambda");
    const auto H0 = metric_symbol([](const GroupElement& g) { return perturbed_inverse_metric(g.x(0), g.y(0)); });
    SymbolField H1;
    H1.order = 1;
    H1.eval = [](const GroupElement&, const TruncatedRep& r) {
        return CMatrix(kI * (0.7 * CMatrix(r.gen_X[0]) + 0.4 * CMatrix(r.gen_Y[0])));
    };
    const std::vector<GroupElement> nodes{GroupElement::identity(1), GroupElement::h1(0.3, -0.2, 0.1),
                                          GroupElement::h1(-0.25, 0.4, 0.0)};
    std::vector<CorrectorReport> reports(nodes.size());
    parallel_for(nodes.size(), run.workers, [&](std::size_t i) {
        reports[i] = corrector_pi1(H0, H1, level, nodes[i], lambda, N, std::numeric_limits<double>::infinity(),
                                   run.real("step"));
    });

    Table t({"x", "y", "z", "commutator_pi_r", "level_block", "complement_block", "parity_t1",
             "idempotence_residual", "commutation_residual", "sylvester_residual", "hermiticity_defect", "gap"});
    double compat = 0.0;
    Json records = Json::array();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& r = reports[i];
        t.row().num(nodes[i].x(0)).num(nodes[i].y(0)).num(nodes[i].z).num(r.commutator_pi_r).num(r.level_block)
            .num(r.complement_block).num(r.parity_t1).num(r.idempotence_residual).num(r.commutation_residual)
            .num(r.sylvester_residual).num(r.hermiticity_defect).num(r.gap);
        compat = std::max({compat, r.commutator_pi_r, r.level_block, r.complement_block, r.parity_t1,
                           r.idempotence_residual, r.commutation_residual});
        Json rec = Json::parse(r.to_json());
        rec["node"] = {nodes[i].x(0), nodes[i].y(0), nodes[i].z};
        records.push_back(rec);
    }
    run.write("corrector.csv", t);
    run.write("corrector_records.json", records.dump(2) + "\n");
    run.at_most("compatibility", compat, run.tol("compatibility"));

    // Parity: Pi_n M Pi_n vanishes for every odd word of length 1 and 3 in X, Y.
    const auto rep = schrodinger_generators(lambda, 1, N);
    const std::vector<CMatrix> gens{CMatrix(rep.gen_X[0]), CMatrix(rep.gen_Y[0])};
    const auto H = oscillator_symbol(lambda, 1, N);
    Table parity({"level", "word", "compression"});
    double worst = 0.0;
    for (int n = 0; n <= run.integer("parity_levels"); ++n) {
        const auto proj = landau_projector(H, n);
        for (int length : {1, 3}) {
            for (int word = 0; word < (1 << length); ++word) {
                CMatrix M = CMatrix::Identity(N, N);
                std::string name;
                for (int k = 0; k < length; ++k) {
                    const int g = (word >> (length - 1 - k)) & 1;
                    M = M * gens[g];
                    name += g ? 'Y' : 'X';
                }
                const double c = parity_compression(proj, M);
                parity.row().integer(n).text(name).num(c);
                worst = std::max(worst, c);
            }
        }
    }
    run.write("parity.csv", parity);
    run.at_most("parity", worst, run.tol("parity"));
}

struct ModelDataset {
    SpectralDataset data;
    std::optional<ContactModel3D> torus;
};

ContactModel3D torus_model(const Run& run) {
    const auto norm = run.text("normalization") == "metric" ? ContactNormalization::Metric
                                                             : ContactNormalization::Connection;
    if (run.text("model") == "sine")
        return sine_field_model(run.integer("flux"), run.real("eps1"), run.real("eps2"), norm);
    return constant_field_model(run.integer("flux"), run.real("b"), norm);
}

ModelDataset model_dataset(Run& run, bool want_vectors) {
    ModelDataset out;
    const double delta_max = run.real("delta_max");
    if (run.text("model") == "nilmanifold") {
        NilmanifoldModel nil;
        nil.n = run.integer("grid");
        nil.max_plaquette_flux = run.real("max_plaquette_flux");
        const int top = static_cast<int>(std::floor(delta_max / (2.0 * kPi))) + 1;
        if (run.integer("mode_limit") < top) nil.z_modes = run.integer("mode_limit");
        out.data = nilmanifold_spectrum(nil, delta_max, run.cfg.seed, run.workers, want_vectors);
        landau_label_nilmanifold(out.data);
        run.report.summary["commutator_defect_top"] =
            nilmanifold_commutator_defect(nil, std::max(1, out.data.max_mode));
    } else {
        out.torus = torus_model(run);
        AssemblyOptions opt;
        opt.n1 = opt.n2 = run.integer("grid");
        opt.delta_max = delta_max;
        opt.want_vectors = want_vectors || run.text("model") == "sine";
        opt.seed = run.cfg.seed;
        opt.workers = run.workers;
        opt.mode_limit = run.integer("mode_limit");
        out.data = assemble_full_spectrum(*out.torus, opt);
        landau_label(out.data, *out.torus);
    }
    long labeled = 0;
    for (const auto& e : out.data.entries) labeled += e.level.has_value();
    run.report.summary["eigenvalues"] = out.data.size();
    run.report.summary["labeled"] = labeled;
    run.report.summary["max_mode"] = out.data.max_mode;
    run.report.summary["complete"] = out.data.complete;
    if (!out.data.complete) run.report.summary["incomplete_reason"] = out.data.incomplete_reason;
    return out;
}

void run_spectrum(Run& run) {
    const bool save = run.param("save_vectors").get<bool>();
    auto md = model_dataset(run, save);
    run.write("dataset.csv", md.data.to_csv());
    if (save) {
        md.data.save_vectors((run.dir / "dataset_vectors.bin").string());
        run.report.files.push_back("dataset_vectors.bin");
    }
    run.report.checks.push_back({"complete", md.data.complete ? 1.0 : 0.0, 1.0, ">=", md.data.complete});
}

void run_weyl(Run& run) {
    auto md = model_dataset(run, false);
    run.write("dataset.csv", md.data.to_csv());
    const double hi = run.real("delta_max");
    const auto fit = weyl_fit(md.data, run.real("window_lo_fraction") * hi, hi, run.integer("samples"));
    Table t({"delta", "count"});
    for (std::size_t i = 0; i < fit.deltas.size(); ++i) t.row().num(fit.deltas[i]).integer(fit.counts[i]);
    run.write("weyl_counts.csv", t);
    Table f({"quantity", "value"});
    f.row().text("exponent").num(fit.exponent);
    f.row().text("constant").num(fit.constant);
    f.row().text("delta_lo").num(fit.delta_lo);
    f.row().text("delta_hi").num(fit.delta_hi);
    f.row().text("residual").num(fit.residual);
    f.row().text("distinct_counts").integer(fit.distinct_counts);
    run.write("weyl_fit.csv", f);
    run.at_most("exponent_deviation", std::abs(fit.exponent - 2.0), run.tol("exponent"));
    run.at_least("eigenvalue_count", static_cast<double>(md.data.size()), run.real("min_count"));
}

void run_proportions(Run& run) {
    auto md = model_dataset(run, false);
    run.write("dataset.csv", md.data.to_csv());
    const auto p = landau_proportions(md.data, run.integer("n_max"), run.real("delta_max"));
    Table t({"n", "count", "empirical", "expected", "relative_error"});
    double worst = 0.0;
    for (std::size_t n = 0; n < p.counts.size(); ++n) {
        t.row().integer(static_cast<long long>(n)).integer(p.counts[n]).num(p.empirical[n]).num(p.expected[n])
            .num(p.relative_error[n]);
        worst = std::max(worst, std::abs(p.relative_error[n]));
    }
    run.write("proportions.csv", t);
    Table ratios({"levels", "numerator", "denominator"});
    const auto r01 = landau_ratio(0, 1, 1), r02 = landau_ratio(0, 2, 1);
    ratios.row().text("0:1").integer(r01.numerator()).integer(r01.denominator());
    ratios.row().text("0:2").integer(r02.numerator()).integer(r02.denominator());
    run.write("proportion_ratios.csv", ratios);
    run.report.summary["labeled_at_delta"] = p.labeled;
    run.report.summary["unlabeled_at_delta"] = p.unlabeled;
    run.report.summary["remainder"] = p.remainder;
    run.at_most("relative_error", worst, run.tol("relative"));
    const bool exact = r01 == boost::rational<long long>(9) && r02 == boost::rational<long long>(25);
    run.report.checks.push_back({"exact_ratios", exact ? 0.0 : 1.0, 0.0, "<=", exact});
}

Observable2D observable_by_name(const std::string& name, double shift = 0.0) {
    if (name == "cos2pix1") return [shift](double x1, double) { return std::cos(2.0 * kPi * x1) + shift; };
    if (name == "cos2pix2") return [shift](double, double x2) { return std::cos(2.0 * kPi * x2) + shift; };
    return [shift](double, double) { return 1.0 + shift; };
}

// Sequence with value 1 on a known sparse set and 0 elsewhere.
struct TestSequence {
    std::string name;
    std::vector<double> values;
    double good_density = 0.0;
};

std::vector<TestSequence> kvn_sequences(long length, double bernoulli, std::uint64_t seed) {
    std::vector<TestSequence> out;
    auto finish = [&](TestSequence s) {
        const double bad = std::accumulate(s.values.begin(), s.values.end(), 0.0);
        s.good_density = 1.0 - bad / static_cast<double>(length);
        out.push_back(std::move(s));
    };
    TestSequence squares{"squares", std::vector<double>(length, 0.0)};
    for (long k = 0; k * k < length; ++k) squares.values[k * k] = 1.0;
    finish(std::move(squares));
    TestSequence powers{"powers_of_two", std::vector<double>(length, 0.0)};
    for (long k = 1; k < length; k *= 2) powers.values[k] = 1.0;
    finish(std::move(powers));
    TestSequence random{"bernoulli", std::vector<double>(length, 0.0)};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : random.values) v = u(rng) < bernoulli ? 1.0 : 0.0;
    finish(std::move(random));
    return out;
}

void run_variance(Run& run) {
    auto md = model_dataset(run, true);
    if (!md.torus) throw NumericalRefusal("variance: requires a torus model (constant or sine)");
    run.write("dataset.csv", md.data.to_csv());
    const double hi = run.real("delta_max"), lo = run.real("delta0_fraction") * hi;
    const int count = run.integer("n_deltas");
    std::vector<double> deltas;
    for (int i = 0; i < count; ++i) deltas.push_back(count == 1 ? hi : lo + (hi - lo) * i / (count - 1));
    const auto mode = cluster_mode_from_string(run.text("cluster_mode"));
    const std::string name = run.text("observable");
    const double c = run.real("shift_constant");

    const auto base = variance_report(md.data, *md.torus, observable_by_name(name), name, deltas, mode);
    const auto shifted = variance_report(md.data, *md.torus, observable_by_name(name, c), name + "+c", deltas, mode);
    const auto constant = variance_report(md.data, *md.torus, observable_by_name("constant"), "constant", deltas, mode);

    Table t({"delta", "count", "variance", "variance_shifted", "variance_constant"});
    double zero = 0.0, shift = 0.0, contrast = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        t.row().num(deltas[i]).integer(base.counts[i]).num(base.variance[i]).num(shifted.variance[i])
            .num(constant.variance[i]);
        zero = std::max(zero, std::abs(constant.variance[i]));
        shift = std::max(shift, std::abs(shifted.variance[i] - base.variance[i]));
        contrast = std::min(contrast, base.variance[i] / base.variance[0]);
    }
    run.write("variance.csv", t);
    Table dev({"delta", "deviation"});
    for (std::size_t i = 0; i < md.data.entries.size(); ++i)
        dev.row().num(md.data.entries[i].delta).num(base.deviations[i]);
    run.write("variance_deviations.csv", dev);
    run.report.summary["mean"] = base.mean;
    run.report.summary["deviation_extraction_final_cesaro"] = base.extraction.final_cesaro;
    run.report.summary["deviation_extraction_inconclusive"] = base.extraction.inconclusive;

    Table kvn({"sequence", "length", "kept", "extracted_density", "known_density", "final_cesaro"});
    double kvn_error = 0.0;
    for (const auto& s : kvn_sequences(run.integer("kvn_length"), run.real("kvn_bernoulli"), run.cfg.seed)) {
        const auto r = density_one_extract(s.values);
        const double density = static_cast<double>(r.indices.size()) / static_cast<double>(s.values.size());
        kvn.row().text(s.name).integer(static_cast<long long>(s.values.size()))
            .integer(static_cast<long long>(r.indices.size())).num(density).num(s.good_density).num(r.final_cesaro);
        kvn_error = std::max(kvn_error, std::abs(density - s.good_density));
    }
    run.write("kvn_extraction.csv", kvn);

    run.at_most("constant_variance", zero, run.tol("zero"));
    run.at_most("shift_invariance", shift, run.tol("shift"));
    run.at_least("nonergodic_contrast", contrast, run.tol("contrast"));
    run.at_most("kvn_density_error", kvn_error, run.tol("kvn_density"));
}

void run_hscalc(Run& run) {
    const int n = run.integer("size");
    std::mt19937_64 rng(run.cfg.seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd G(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) G(i, j) = normal(rng);
    Eigen::MatrixXd T = 0.5 * (G + G.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> scale(T, Eigen::EigenvaluesOnly);
    T *= run.real("spectrum_radius") / scale.eigenvalues().cwiseAbs().maxCoeff();

    const auto f = bump_function(run.real("center"), run.real("radius"));
    const auto hs = hs_functional_calculus(T, f, run.integer("aa_order"), {}, run.workers);
    const Eigen::MatrixXd reference = functional_of_matrix(T, [&](double x) { return f(x); });
    const Eigen::MatrixXd diff = hs.value - reference;
    const double error = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (diff + diff.transpose()),
                                                                        Eigen::EigenvaluesOnly)
                             .eigenvalues().cwiseAbs().maxCoeff();
    const Eigen::MatrixXd comm = hs.value * T - T * hs.value;
    const double commutator = comm.norm();
    const auto zero = hs_functional_calculus(T, zero_function(-1.0, 1.0), run.integer("aa_order"), {}, run.workers);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T, Eigen::EigenvaluesOnly);
    Table spectrum({"eigenvalue", "f"});
    for (int i = 0; i < n; ++i) spectrum.row().num(eig.eigenvalues()(i)).num(f(eig.eigenvalues()(i)));
    run.write("hs_spectrum.csv", spectrum);
    Table t({"quantity", "value"});
    t.row().text("operator_norm_error").num(error);
    t.row().text("frobenius_error").num(diff.norm());
    t.row().text("commutator").num(commutator);
    t.row().text("zero_function_norm").num(zero.value.norm());
    t.row().text("strip_bound").num(hs.strip_bound);
    t.row().text("resolvent_evaluations").integer(hs.evaluations);
    run.write("hscalc.csv", t);
    run.at_most("error", error, run.tol("error"));
    run.at_most("commutator", commutator, run.tol("commutator"));
    run.at_most("zero_function", zero.value.norm(), run.tol("error"));
}

double circular_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double d = a(k) - b(k);
        worst = std::max(worst, std::abs(d - std::round(d)));
    }
    return worst;
}

void run_reeb(Run& run) {
    const auto norm = run.text("normalization") == "metric" ? ContactNormalization::Metric
                                                             : ContactNormalization::Connection;
    const auto model = sine_field_model(run.integer("flux"), run.real("eps1"), run.real("eps2"), norm);
    const auto flat = constant_field_model(run.integer("flux"), run.real("b"), norm);
    const double T = run.real("T"), dt = run.real("dt");
    const int count = run.integer("starts");

    std::mt19937_64 rng(run.cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Eigen::Vector3d> starts(count);
    for (auto& s : starts) {
        s(0) = u(rng);
        s(1) = u(rng);
        s(2) = u(rng);
    }

    double field = 0.0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            const Eigen::Vector3d p((i + 0.5) / 16.0, (j + 0.5) / 16.0, 0.3);
            field = std::max(field, (reeb_field_linear(model, p).field - reeb_field(model, p)).cwiseAbs().maxCoeff());
        }

    struct StartResult {
        double field = 0.0, volume = 0.0, periodicity = 0.0, birkhoff = 0.0;
    };
    std::vector<StartResult> results(count);
    parallel_for(starts.size(), run.workers, [&](std::size_t i) {
        const auto& p = starts[i];
        auto& r = results[i];
        r.field = (reeb_field_linear(model, p).field - reeb_field(model, p)).cwiseAbs().maxCoeff();
        r.volume = std::abs(flow_volume_ratio(model, p, T, dt) - 1.0);
        const double period = 1.0 / reeb_field(flat, p)(2);
        r.periodicity = circular_distance(reeb_flow_map(flat, p, period, dt), p);
        r.birkhoff = birkhoff_average(model, [](const Eigen::Vector3d& q) { return std::cos(2.0 * kPi * q(0)); }, p,
                                      T, dt);
    });

    Table t({"x1", "x2", "theta", "field_difference", "volume_defect", "periodicity_defect", "birkhoff_cos2pix1"});
    double volume = 0.0, periodicity = 0.0;
    for (int i = 0; i < count; ++i) {
        const auto& r = results[i];
        t.row().num(starts[i](0)).num(starts[i](1)).num(starts[i](2)).num(r.field).num(r.volume).num(r.periodicity)
            .num(r.birkhoff);
        field = std::max(field, r.field);
        volume = std::max(volume, r.volume);
        periodicity = std::max(periodicity, r.periodicity);
    }
    run.write("reeb_starts.csv", t);
    const auto trajectory = reeb_flow(model, starts.front(), T, dt);
    run.write("reeb_trajectory.csv", trajectory.to_csv());
    Table g({"quantity", "value"});
    g.row().text("contact_min_density").num(contact_check(model));
    g.row().text("contact_volume").num(contact_volume(model));
    g.row().text("max_eta_drift").num(trajectory.max_eta_drift);
    run.write("reeb_geometry.csv", g);
    run.at_most("field", field, run.tol("field"));
    run.at_most("volume", volume, run.tol("volume"));
    run.at_most("periodicity", periodicity, run.tol("periodicity"));
}

void run_decay(Run& run) {
    const auto model = constant_field_model(run.integer("flux"), run.real("b"));
    const auto op = magnetic_mode_operator(model, run.integer("m"), run.integer("n"), run.integer("n"));
    const auto hbars = reals(run.param("hbars"));
    const cd z(run.real("z_re"), run.real("z_im"));
    const auto p1 = reals(run.param("psi1")), p2 = reals(run.param("psi2")), pc = reals(run.param("control_psi2"));
    const auto psi1 = cutoff_x1(p1[0], p1[1]);
    const auto disjoint = disjoint_support_decay(op, psi1, cutoff_x1(p2[0], p2[1]), z, hbars, run.workers,
                                                 run.integer("iterations"));
    const auto control = disjoint_support_decay(op, psi1, cutoff_x1(pc[0], pc[1]), z, hbars, run.workers,
                                                run.integer("iterations"));
    Table t({"hbar", "disjoint_norm", "control_norm", "resolvent_norm"});
    for (std::size_t i = 0; i < hbars.size(); ++i)
        t.row().num(disjoint.hbar[i]).num(disjoint.norm[i]).num(control.norm[i]).num(disjoint.resolvent[i]);
    run.write("decay.csv", t);
    if (hbars.size() >= 2) {
        Table s({"curve", "slope"});
        s.row().text("disjoint").num(disjoint.slope);
        s.row().text("control").num(control.slope);
        run.write("decay_slopes.csv", s);
        run.at_least("disjoint_slope", disjoint.slope, run.tol("slope"));
        run.at_most("control_slope", control.slope, run.tol("control_slope"));
    }
}

void dispatch(Run& run) {
    const std::string& k = run.cfg.kind;
    if (k == "plancherel") run_plancherel(run);
    else if (k == "landau") run_landau(run);
    else if (k == "sylvester") run_sylvester(run);
    else if (k == "corrector") run_corrector(run);
    else if (k == "spectrum") run_spectrum(run);
    else if (k == "weyl") run_weyl(run);
    else if (k == "proportions") run_proportions(run);
    else if (k == "variance") run_variance(run);
    else if (k == "hscalc") run_hscalc(run);
    else if (k == "reeb") run_reeb(run);
    else if (k == "decay") run_decay(run);
    else throw ConfigError({"kind: unknown experiment kind '" + k + "'"});
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, int workers) {
    RunReport report;
    report.kind = config.kind;
    report.config_hash = config_hash(config);
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir(config.output_dir);
    try {
        fs::create_directories(dir);
        Run run{config, std::max(1, workers), dir, report};
        dispatch(run);
        const bool ok = std::all_of(report.checks.begin(), report.checks.end(), [](const CheckResult& c) { return c.pass; });
        report.status = ok ? RunStatus::Pass : RunStatus::CheckFailure;
    } catch (const ConfigError& e) {
        report.status = RunStatus::ConfigError;
        report.message = e.what();
    } catch (const NumericalRefusal& e) {
        report.status = RunStatus::Refusal;
        report.message = std::string("refused: ") + e.what();
    } catch (const std::exception& e) {
        report.status = RunStatus::Refusal;
        report.message = std::string("error: ") + e.what();
    }
    report.partial = report.status == RunStatus::Refusal && !report.files.empty();
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::error_code ec;
    fs::create_directories(dir, ec);
    Json j = report.to_json();
    j["config"] = config_to_json(config);
    std::ofstream out(dir / "report.json", std::ios::binary);
    out << j.dump(2) << "\n";
    return report;
}

SweepReport sweep(const ExperimentConfig& config, const std::string& axis, const std::vector<double>& values,
                  int workers) {
    const auto& specs = spec_table().at(config.kind);
    const auto s = std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& p) { return p.key == axis; });
    if (s == specs.end()) throw ConfigError({"axis: '" + axis + "' is not a parameter of " + config.kind});
    const Json& proto = s->value.is_array() ? s->value.front() : s->value;
    if (!proto.is_number()) throw ConfigError({"axis: '" + axis + "' is not numeric"});
    for (double v : values)
        if (proto.is_number_integer() && v != std::floor(v))
            throw ConfigError({"values: '" + axis + "' takes integers, got " + format_number(v)});

    SweepReport sw;
    sw.axis = axis;
    sw.values = values;
    std::stable_sort(sw.values.begin(), sw.values.end());
    sw.runs.resize(sw.values.size());
    const fs::path base(config.output_dir);
    fs::create_directories(base);

    const int outer = std::max(1, std::min<int>(workers, static_cast<int>(sw.values.size())));
    const int inner = std::max(1, workers / outer);
    parallel_for(sw.values.size(), outer, [&](std::size_t i) {
        ExperimentConfig point = config;
        point.output_dir = (base / ("point_" + std::to_string(i))).string();
        const double v = sw.values[i];
        const Json value = proto.is_number_integer() ? Json(static_cast<long long>(v)) : Json(v);
        point.params[axis] = s->value.is_array() ? Json::array({value}) : value;
        try {
            point = parse_config_json(config_to_json(point));
            sw.runs[i] = run_experiment(point, inner);
        } catch (const ConfigError& e) {
            sw.runs[i].kind = config.kind;
            sw.runs[i].status = RunStatus::ConfigError;
            sw.runs[i].message = e.what();
        }
    });

    Table merged({axis, "point", "status", "check", "measured", "tolerance", "comparison", "pass"});
    std::vector<std::string> tables;
    for (std::size_t i = 0; i < sw.runs.size(); ++i) {
        const auto& r = sw.runs[i];
        if (exit_code(r.status) > exit_code(sw.status)) sw.status = r.status;
        if (r.checks.empty())
            merged.row().num(sw.values[i]).integer(static_cast<long long>(i)).text(to_string(r.status))
                .text("").text("").text("").text("").text("");
        for (const auto& c : r.checks)
            merged.row().num(sw.values[i]).integer(static_cast<long long>(i)).text(to_string(r.status)).text(c.name)
                .num(c.measured).num(c.tolerance).text(c.comparison).text(c.pass ? "true" : "false");
        for (const auto& f : r.files)
            if (fs::path(f).extension() == ".csv" && std::find(tables.begin(), tables.end(), f) == tables.end())
                tables.push_back(f);
    }
    {
        std::ofstream out(base / "sweep.csv", std::ios::binary);
        out << merged.str();
    }
    // One merged table per CSV name with the axis value prepended.
    for (const auto& name : tables) {
        std::string header, body;
        for (std::size_t i = 0; i < sw.runs.size(); ++i) {
            std::ifstream in(base / ("point_" + std::to_string(i)) / name, std::ios::binary);
            if (!in) continue;
            std::string line;
            bool seen_header = false;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                if (!seen_header) {
                    seen_header = true;
                    if (header.empty()) header = axis + "," + line;
                    continue;
                }
                body += format_number(sw.values[i]) + "," + line + "\n";
            }
        }
        std::ofstream out(base / ("sweep_" + name), std::ios::binary);
        out << header << "\n" << body;
    }
    return sw;
}

}  // namespace sublab

#include "sublab/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sublab {

namespace {

// Eight-point Gauss-Legendre rule on [a, b]; nodes by Newton iteration on P_8.
double gauss8(const std::function<double(double)>& f, double a, double b) {
    struct Rule {
        double x[8], w[8];
        Rule() {
            for (int i = 0; i < 8; ++i) {
                double t = std::cos(kPi * (i + 0.75) / 8.5);
                double dp = 1.0;
                for (int it = 0; it < 100; ++it) {
                    double p0 = 1.0, p1 = t;
                    for (int k = 2; k <= 8; ++k) {
                        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = 8.0 * (t * p1 - p0) / (t * t - 1.0);
                    const double step = p1 / dp;
                    t -= step;
                    if (std::abs(step) < 1e-16) break;
                }
                x[i] = t;
                w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
            }
        }
    };
    static const Rule rule;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < 8; ++i) sum += rule.w[i] * f(mid + half * rule.x[i]);
    return half * sum;
}

// Nearest-neighbour lattice data: weights and link factors for the links leaving
// node (i, j) in the +x1 and +x2 directions. The link factor multiplies psi at the
// neighbour and already includes any seam factor.
struct LatticeData {
    int n1 = 0;
    int n2 = 0;
    std::function<double(int, int)> weight1, weight2, mass;
    std::function<cd(int, int)> link1, link2;
};

ModeOperator assemble_lattice(const LatticeData& data, int m, const std::string& boundary) {
    ModeOperator op;
    op.m = m;
    op.n1 = data.n1;
    op.n2 = data.n2;
    op.boundary = boundary;
    const long dim = op.dim();
    op.mass.resize(dim);
    for (int j = 0; j < data.n2; ++j)
        for (int i = 0; i < data.n1; ++i) op.mass(i + static_cast<long>(data.n1) * j) = data.mass(i, j);
    const Eigen::VectorXd scale = op.mass.cwiseSqrt().cwiseInverse();

    std::vector<Eigen::Triplet<cd>> trip;
    trip.reserve(static_cast<std::size_t>(dim) * 5);
    auto add_link = [&](long a, long b, double w, cd f) {
        trip.emplace_back(a, a, w * scale(a) * scale(a));
        trip.emplace_back(b, b, w * scale(b) * scale(b));
        trip.emplace_back(a, b, -w * f * scale(a) * scale(b));
        trip.emplace_back(b, a, -w * std::conj(f) * scale(a) * scale(b));
    };
    for (int j = 0; j < data.n2; ++j)
        for (int i = 0; i < data.n1; ++i) {
            const long a = i + static_cast<long>(data.n1) * j;
            const long right = ((i + 1) % data.n1) + static_cast<long>(data.n1) * j;
            const long up = i + static_cast<long>(data.n1) * ((j + 1) % data.n2);
            add_link(a, right, data.weight1(i, j), data.link1(i, j));
            add_link(a, up, data.weight2(i, j), data.link2(i, j));
        }
    op.matrix.resize(dim, dim);
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    op.matrix.makeCompressed();
    return op;
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

struct ModeResult {
    int m = 0;
    ModeSpectrum spectrum;
    std::string error;
};

struct ModeFamily {
    std::function<ModeOperator(int)> build;
    std::function<int(int)> initial_k;
    std::function<double(int)> shift;  // value expected below the spectrum of mode m
    int estimate = 0;  // modes 0..estimate are computed in parallel
};

SpectralDataset assemble_modes(const ModeFamily& family, double delta_max, int mode_limit, std::uint64_t seed,
                               int workers, bool want_vectors) {
    auto solve_mode = [&](int m) {
        ModeResult r;
        r.m = m;
        try {
            const ModeOperator op = family.build(m);
            r.spectrum = mode_spectrum_below(op, delta_max, family.initial_k(m), seed + 1000003ULL * m, want_vectors,
                                             family.shift(m));
        } catch (const NumericalRefusal& e) {
            r.error = e.what();
        }
        return r;
    };

    const int first_batch = std::min(family.estimate, mode_limit);
    std::vector<ModeResult> results(static_cast<std::size_t>(first_batch) + 1);
    parallel_for(results.size(), workers, [&](std::size_t idx) { results[idx] = solve_mode(static_cast<int>(idx)); });
    while (results.back().error.empty() && results.back().spectrum.values.size() > 0 &&
           results.back().m < mode_limit)
        results.push_back(solve_mode(results.back().m + 1));

    SpectralDataset ds;
    ds.delta_max = delta_max;
    ds.max_mode = results.back().m;
    ds.complete = true;
    for (const auto& r : results)
        if (!r.error.empty()) {
            ds.complete = false;
            ds.incomplete_reason = "mode " + std::to_string(r.m) + ": " + r.error;
            break;
        }
    if (ds.complete && results.back().spectrum.values.size() > 0) {
        ds.complete = false;
        ds.incomplete_reason = "mode limit reached while modes still contribute";
    }

    struct Keyed {
        SpectralEntry entry;
        long order;
        const ModeResult* source;
        int column;
        bool conjugate;
    };
    std::vector<Keyed> all;
    for (const auto& r : results) {
        const auto& s = r.spectrum;
        for (long c = 0; c < s.values.size(); ++c) {
            SpectralEntry e;
            e.delta = s.values(c);
            e.solver_residual = s.residuals(c);
            for (int sign : {1, -1}) {
                if (r.m == 0 && sign < 0) continue;
                e.m = sign * r.m;
                all.push_back({e, c, &r, static_cast<int>(c), sign < 0});
            }
        }
    }
    std::sort(all.begin(), all.end(), [](const Keyed& a, const Keyed& b) {
        if (a.entry.delta != b.entry.delta) return a.entry.delta < b.entry.delta;
        if (a.entry.m != b.entry.m) return a.entry.m < b.entry.m;
        return a.order < b.order;
    });
    for (auto& k : all) {
        if (want_vectors) {
            k.entry.vector = static_cast<long>(ds.vectors.size());
            const CVector v = k.source->spectrum.vectors.col(k.column);
            ds.vectors.push_back(k.conjugate ? CVector(v.conjugate()) : v);
        }
        ds.entries.push_back(k.entry);
    }
    return ds;
}

}  // namespace

Eigen::Vector2d ModeOperator::node(long index) const {
    return Eigen::Vector2d(static_cast<double>(index % n1) / n1, static_cast<double>(index / n1) / n2);
}

double ModeOperator::hermiticity_defect() const {
    const SpCMatrix diff = matrix - SpCMatrix(matrix.adjoint());
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SpCMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
}

ModeOperator magnetic_mode_operator(const ContactModel3D& model, int m, int n1, int n2) {
    if (n1 < 3 || n2 < 3) throw std::invalid_argument("mode operator needs at least 3 points per axis");
    const double h1 = 1.0 / n1, h2 = 1.0 / n2;
    const double alpha = 2.0 * kPi * m;
    const double seam_rate = alpha * model.flux;  // exp(i seam_rate x2) across x1 = 1
    // Single-valuedness across x2 = 1 of the x1 seam factor: exp(i 2 pi m flux) = 1.
    if (std::abs(std::remainder(static_cast<double>(m) * model.flux, 1.0)) > 1e-12)
        throw std::invalid_argument("non-integer flux sector");

    LatticeData data;
    data.n1 = n1;
    data.n2 = n2;
    data.mass = [&](int i, int j) { return model.sqrt_g(i * h1, j * h2) * h1 * h2; };
    data.weight1 = [&](int i, int j) {
        const double x1 = (i + 0.5) * h1, x2 = j * h2;
        return model.sqrt_g(x1, x2) / model.metric_diag(x1, x2)(0) * h2 / h1;
    };
    data.weight2 = [&](int i, int j) {
        const double x1 = i * h1, x2 = (j + 0.5) * h2;
        return model.sqrt_g(x1, x2) / model.metric_diag(x1, x2)(1) * h1 / h2;
    };
    data.link1 = [&](int i, int j) {
        const double x1 = i * h1, x2 = j * h2;
        const double integral = gauss8([&](double s) { return model.A_periodic(s, x2)(0); }, x1, x1 + h1);
        cd f = std::exp(-kI * (alpha * integral));
        if (i == n1 - 1) f *= std::exp(kI * (seam_rate * x2));
        return f;
    };
    data.link2 = [&](int i, int j) {
        const double x1 = i * h1, x2 = j * h2;
        const double integral = gauss8([&](double s) { return model.A_periodic(x1, s)(1); }, x2, x2 + h2);
        return std::exp(-kI * (alpha * (model.flux * x1 * h2 + integral)));
    };
    std::ostringstream desc;
    desc << "landau gauge; x1 seam factor exp(i 2pi*" << m << "*" << model.flux << "*x2); x2 seam periodic";
    return assemble_lattice(data, m, desc.str());
}

ModeSpectrum mode_spectrum(const ModeOperator& op, int k_max, std::uint64_t seed, bool want_vectors, double shift,
                           double converge_below) {
    if (k_max < 1 || k_max > op.dim()) throw std::invalid_argument("mode_spectrum: k_max outside [1, dim]");
    EigenOptions opt;
    opt.k = k_max;
    opt.seed = seed;
    opt.want_vectors = want_vectors;
    opt.shift = shift;
    opt.converge_below = converge_below;
    EigenResult r;
    try {
        r = lowest_eigenpairs(op.matrix, opt);
    } catch (const NumericalRefusal&) {
        if (shift == -1.0) throw;
        opt.shift = -1.0;
        r = lowest_eigenpairs(op.matrix, opt);
    }
    if (!r.converged) {
        std::ostringstream os;
        os << "eigensolver did not converge for mode " << op.m << ": worst residual " << r.residuals.maxCoeff()
           << " vs bound " << opt.tolerance * r.norm_estimate;
        throw NumericalRefusal(os.str());
    }
    ModeSpectrum s;
    s.values = r.values;
    s.vectors = r.vectors;
    s.residuals = r.residuals;
    s.converged = true;
    return s;
}

ModeSpectrum mode_spectrum_below(const ModeOperator& op, double delta_max, int initial_k, std::uint64_t seed,
                                 bool want_vectors, double shift) {
    const long safe = op.dim() / 3;
    long k = std::clamp<long>(initial_k, 1, std::max<long>(safe, 1));
    while (true) {
        ModeSpectrum s = mode_spectrum(op, static_cast<int>(k), seed, want_vectors, shift, delta_max);
        long count = 0;
        while (count < s.values.size() && s.values(count) <= delta_max) ++count;
        if (count < k) {
            ModeSpectrum out;
            out.values = s.values.head(count);
            out.residuals = s.residuals.head(count);
            if (want_vectors) out.vectors = s.vectors.leftCols(count);
            out.converged = true;
            return out;
        }
        if (k >= safe) {
            std::ostringstream os;
            os << "mode " << op.m << " has more than " << safe << " eigenvalues below " << delta_max
               << " (outside the safe band)";
            throw NumericalRefusal(os.str());
        }
        k = std::min<long>(safe, k + k / 2 + 8);
    }
}

SpectralDataset assemble_full_spectrum(const ContactModel3D& model, const AssemblyOptions& options) {
    double b_min = std::numeric_limits<double>::infinity();
    double volume = 0.0;
    const int samples = 64;
    for (int i = 0; i < samples; ++i)
        for (int j = 0; j < samples; ++j) {
            const double x1 = (i + 0.5) / samples, x2 = (j + 0.5) / samples;
            b_min = std::min(b_min, model.b(x1, x2));
            volume += model.sqrt_g(x1, x2) / (samples * samples);
        }
    if (!(b_min > 0.0)) throw NumericalRefusal("field strength must stay positive for mode assembly");

    ModeFamily family;
    family.build = [&](int m) { return magnetic_mode_operator(model, m, options.n1, options.n2); };
    family.initial_k = [&](int m) {
        return static_cast<int>(std::ceil(1.2 * volume * options.delta_max / (4.0 * kPi))) +
               std::abs(m * model.flux) + 8;
    };
    // The continuum bound delta_1 >= 2 pi |m| min b, with a margin for lattice corrections.
    family.shift = [&](int m) { return m == 0 ? -1.0 : 0.8 * 2.0 * kPi * std::abs(m) * b_min; };
    family.estimate = static_cast<int>(std::floor(options.delta_max / (2.0 * kPi * b_min))) + 1;
    SpectralDataset ds = assemble_modes(family, options.delta_max, options.mode_limit, options.seed, options.workers,
                                        options.want_vectors);
    ds.model = model.name;
    ds.normalization = to_string(model.normalization);
    ds.n1 = options.n1;
    ds.n2 = options.n2;
    return ds;
}

ModeOperator nilmanifold_sector_operator(const NilmanifoldModel& model, int k) {
    const int n = model.n;
    if (n < 3) throw std::invalid_argument("nilmanifold grid needs at least 3 points per axis");
    const double h = 1.0 / n;
    const double lambda = 2.0 * kPi * k;
    LatticeData data;
    data.n1 = n;
    data.n2 = n;
    data.mass = [h](int, int) { return h * h; };
    data.weight1 = [](int, int) { return 1.0; };
    data.weight2 = [](int, int) { return 1.0; };
    data.link1 = [=](int i, int j) {
        const double y = j * h;
        cd f = std::exp(-kI * (lambda * y * h / 2.0));
        if (i == n - 1) f *= std::exp(-kI * (kPi * k * y));
        return f;
    };
    data.link2 = [=](int i, int j) {
        const double x = i * h;
        cd f = std::exp(kI * (lambda * x * h / 2.0));
        if (j == n - 1) f *= std::exp(kI * (kPi * k * x));
        return f;
    };
    std::ostringstream desc;
    desc << "symmetric gauge, z-frequency " << k << "; x seam exp(-i pi k y), y seam exp(i pi k x)";
    return assemble_lattice(data, k, desc.str());
}

double nilmanifold_commutator_defect(const NilmanifoldModel& model, int k) {
    const int n = model.n;
    const double h = 1.0 / n;
    const double lambda = 2.0 * kPi * k;
    const long dim = static_cast<long>(n) * n;
    // Forward covariant differences with the link factors of the sector operator.
    auto link1 = [&](int i, int j) {
        cd f = std::exp(-kI * (lambda * j * h * h / 2.0));
        if (i == n - 1) f *= std::exp(-kI * (kPi * k * j * h));
        return f;
    };
    auto link2 = [&](int i, int j) {
        cd f = std::exp(kI * (lambda * i * h * h / 2.0));
        if (j == n - 1) f *= std::exp(kI * (kPi * k * i * h));
        return f;
    };
    std::vector<Eigen::Triplet<cd>> tx, ty;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const long a = i + static_cast<long>(n) * j;
            tx.emplace_back(a, a, -1.0 / h);
            tx.emplace_back(a, ((i + 1) % n) + static_cast<long>(n) * j, link1(i, j) / h);
            ty.emplace_back(a, a, -1.0 / h);
            ty.emplace_back(a, i + static_cast<long>(n) * ((j + 1) % n), link2(i, j) / h);
        }
    SpCMatrix Dx(dim, dim), Dy(dim, dim);
    Dx.setFromTriplets(tx.begin(), tx.end());
    Dy.setFromTriplets(ty.begin(), ty.end());
    CVector f(dim);
    const double width = 0.12;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double dx = i * h - 0.5, dy = j * h - 0.5;
            f(i + static_cast<long>(n) * j) = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
        }
    const CVector comm = Dx * (Dy * f) - Dy * (Dx * f);
    if (k == 0) return comm.norm() / f.norm();
    return (comm - kI * lambda * f).norm() / (std::abs(lambda) * f.norm());
}

SpectralDataset nilmanifold_spectrum(const NilmanifoldModel& model, double delta_max, std::uint64_t seed,
                                     int workers, bool want_vectors) {
    const int top = model.z_modes > 0 ? model.z_modes
                                       : static_cast<int>(std::floor(delta_max / (2.0 * kPi))) + 1;
    const double plaquette = static_cast<double>(top) / (static_cast<double>(model.n) * model.n);
    if (plaquette > model.max_plaquette_flux) {
        std::ostringstream os;
        os << "nilmanifold grid n = " << model.n << " does not resolve z-frequency " << top << " (plaquette flux "
           << plaquette << " > " << model.max_plaquette_flux << ")";
        throw NumericalRefusal(os.str());
    }
    ModeFamily family;
    family.build = [&](int k) { return nilmanifold_sector_operator(model, k); };
    family.initial_k = [&](int k) {
        return static_cast<int>(std::ceil(1.2 * delta_max / (4.0 * kPi))) + std::abs(k) + 8;
    };
    family.shift = [](int k) { return k == 0 ? -1.0 : 0.8 * 2.0 * kPi * std::abs(k); };
    family.estimate = top;
    const int limit = model.z_modes > 0 ? model.z_modes : std::max(top + 8, 2 * top);
    SpectralDataset ds = assemble_modes(family, delta_max, limit, seed, workers, want_vectors);
    ds.model = "nilmanifold";
    ds.normalization = "connection";
    ds.n1 = model.n;
    ds.n2 = model.n;
    return ds;
}

void landau_label_with(SpectralDataset& dataset, const std::vector<double>& lambda_est) {
    if (lambda_est.size() != dataset.entries.size()) throw std::invalid_argument("one lambda estimate per entry");
    for (std::size_t i = 0; i < dataset.entries.size(); ++i) {
        auto& e = dataset.entries[i];
        e.level.reset();
        e.lambda_est.reset();
        e.label_residual = 0.0;
        const double lam = lambda_est[i];
        if (!(lam > 0.0)) continue;
        e.lambda_est = lam;
        const double ratio = e.delta / lam;
        // Nearest n, ties toward the smaller level.
        const int n = std::max(0, static_cast<int>(std::ceil((ratio - 1.0) / 2.0 - 0.5)));
        e.label_residual = std::abs(ratio - (2.0 * n + 1.0));
        if (e.label_residual <= kLabelTolerance) e.level = n;
    }
}

void landau_label(SpectralDataset& dataset, const ContactModel3D& model) {
    double b_min = std::numeric_limits<double>::infinity(), b_max = -b_min;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            const double v = model.b((i + 0.5) / 16, (j + 0.5) / 16);
            b_min = std::min(b_min, v);
            b_max = std::max(b_max, v);
        }
    const bool constant = b_max - b_min <= 1e-12 * std::abs(b_max);
    std::vector<double> lambdas(dataset.entries.size(), 0.0);
    for (std::size_t i = 0; i < dataset.entries.size(); ++i) {
        const auto& e = dataset.entries[i];
        if (e.m == 0) continue;
        double b_expect = b_max;
        if (!constant) {
            if (e.vector < 0) throw NumericalRefusal("variable-field labeling needs stored eigenvectors");
            const CVector& u = dataset.vectors.at(static_cast<std::size_t>(e.vector));
            b_expect = 0.0;
            for (long a = 0; a < u.size(); ++a) {
                const double x1 = static_cast<double>(a % dataset.n1) / dataset.n1;
                const double x2 = static_cast<double>(a / dataset.n1) / dataset.n2;
                b_expect += model.b(x1, x2) * std::norm(u(a));
            }
        }
        lambdas[i] = 2.0 * kPi * std::abs(e.m) * b_expect;
    }
    landau_label_with(dataset, lambdas);
}

void landau_label_nilmanifold(SpectralDataset& dataset) {
    std::vector<double> lambdas(dataset.entries.size());
    for (std::size_t i = 0; i < dataset.entries.size(); ++i) lambdas[i] = 2.0 * kPi * std::abs(dataset.entries[i].m);
    landau_label_with(dataset, lambdas);
}

std::string SpectralDataset::to_csv() const {
    std::ostringstream os;
    os << "# sublab-dataset v1\n";
    os << "# model," << model << "\n";
    os << "# normalization," << normalization << "\n";
    os << "# grid," << n1 << "," << n2 << "\n";
    os << "# delta_max," << format_double(delta_max) << "\n";
    os << "# max_mode," << max_mode << "\n";
    os << "# complete," << (complete ? 1 : 0) << "," << incomplete_reason << "\n";
    os << "delta,m,n,lambda_est,label_residual,solver_residual,vector\n";
    for (const auto& e : entries) {
        os << format_double(e.delta) << ',' << e.m << ',';
        if (e.level) os << *e.level;
        os << ',';
        if (e.lambda_est) os << format_double(*e.lambda_est);
        os << ',' << format_double(e.label_residual) << ',' << format_double(e.solver_residual) << ',' << e.vector
           << '\n';
    }
    return os.str();
}

SpectralDataset SpectralDataset::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (line != "# sublab-dataset v1") throw std::runtime_error("dataset CSV has no v1 header");
    SpectralDataset ds;
    auto cells_of = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string c;
        while (std::getline(ss, c, ',')) out.push_back(c);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto c = cells_of(line.substr(2));
            if (c.empty()) continue;
            if (c[0] == "model") ds.model = c.at(1);
            else if (c[0] == "normalization") ds.normalization = c.at(1);
            else if (c[0] == "grid") {
                ds.n1 = std::stoi(c.at(1));
                ds.n2 = std::stoi(c.at(2));
            } else if (c[0] == "delta_max") ds.delta_max = std::stod(c.at(1));
            else if (c[0] == "max_mode") ds.max_mode = std::stoi(c.at(1));
            else if (c[0] == "complete") {
                ds.complete = c.at(1) == "1";
                ds.incomplete_reason = c.size() > 2 ? c[2] : "";
            }
            continue;
        }
        if (line.rfind("delta,", 0) == 0 || line.empty()) continue;
        const auto c = cells_of(line);
        if (c.size() != 7) throw std::runtime_error("dataset row needs 7 cells: " + line);
        SpectralEntry e;
        e.delta = std::stod(c[0]);
        e.m = std::stoi(c[1]);
        if (!c[2].empty()) e.level = std::stoi(c[2]);
        if (!c[3].empty()) e.lambda_est = std::stod(c[3]);
        e.label_residual = std::stod(c[4]);
        e.solver_residual = std::stod(c[5]);
        e.vector = std::stol(c[6]);
        ds.entries.push_back(e);
    }
    return ds;
}

void SpectralDataset::save_vectors(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vector sidecar " + path);
    out.write("SLVECTOR", 8);
    const std::int32_t version = 1;
    const std::int64_t count = static_cast<std::int64_t>(vectors.size());
    const std::int64_t dim = vectors.empty() ? 0 : vectors.front().size();
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    for (const auto& v : vectors) {
        if (v.size() != dim) throw std::runtime_error("vector sidecar needs equal lengths");
        for (long i = 0; i < v.size(); ++i) {
            const double re = v(i).real(), im = v(i).imag();
            out.write(reinterpret_cast<const char*>(&re), sizeof re);
            out.write(reinterpret_cast<const char*>(&im), sizeof im);
        }
    }
}

void SpectralDataset::load_vectors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vector sidecar " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "SLVECTOR", 8) != 0) throw std::runtime_error("vector sidecar has wrong magic");
    std::int32_t version = 0;
    std::int64_t count = 0, dim = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    in.read(reinterpret_cast<char*>(&dim), sizeof dim);
    if (!in || version != 1 || count < 0 || dim < 0) throw std::runtime_error("vector sidecar header invalid");
    vectors.assign(static_cast<std::size_t>(count), CVector(dim));
    for (auto& v : vectors)
        for (long i = 0; i < dim; ++i) {
            double re = 0.0, im = 0.0;
            in.read(reinterpret_cast<char*>(&re), sizeof re);
            in.read(reinterpret_cast<char*>(&im), sizeof im);
            v(i) = cd(re, im);
        }
    if (!in) throw std::runtime_error("vector sidecar truncated");
}

}  // namespace sublab

#include "sublab/kernel_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sublab {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

std::vector<std::string> expect_row(std::istream& in, const std::string& tag) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("kernel file truncated before '" + tag + "'");
    auto cells = split_csv(line);
    if (cells.empty() || cells[0] != tag) throw std::runtime_error("kernel file: expected row '" + tag + "'");
    cells.erase(cells.begin());
    return cells;
}

template <class T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("kernel binary truncated");
    return v;
}

void check_shape(const SampledKernel& k) {
    const std::size_t axes = static_cast<std::size_t>(2 * k.d + 1);
    if (k.d < 1 || k.counts.size() != axes || k.lower.size() != axes || k.spacing.size() != axes)
        throw std::runtime_error("kernel header does not describe 2d+1 axes");
    std::size_t total = 1;
    for (int c : k.counts) {
        if (c < 1) throw std::runtime_error("kernel header has an empty axis");
        total *= static_cast<std::size_t>(c);
    }
    if (k.values.size() != total) throw std::runtime_error("kernel value count differs from grid size");
}

}  // namespace

SampledKernel load_kernel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open kernel file " + path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("# sublab-kernel v1", 0) != 0) throw std::runtime_error("kernel file has no v1 header");
    SampledKernel k;
    k.d = std::stoi(expect_row(in, "d").at(0));
    for (const auto& c : expect_row(in, "counts")) k.counts.push_back(std::stoi(c));
    for (const auto& c : expect_row(in, "lower")) k.lower.push_back(std::stod(c));
    for (const auto& c : expect_row(in, "spacing")) k.spacing.push_back(std::stod(c));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 2) throw std::runtime_error("kernel value row needs re,im");
        k.values.emplace_back(std::stod(cells[0]), std::stod(cells[1]));
    }
    check_shape(k);
    return k;
}

void save_kernel_csv(const SampledKernel& kernel, const std::string& path) {
    check_shape(kernel);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write kernel file " + path);
    out << std::setprecision(17);
    out << "# sublab-kernel v1\n";
    out << "d," << kernel.d << "\n";
    out << "counts";
    for (int c : kernel.counts) out << ',' << c;
    out << "\nlower";
    for (double v : kernel.lower) out << ',' << v;
    out << "\nspacing";
    for (double v : kernel.spacing) out << ',' << v;
    out << '\n';
    for (const cd& v : kernel.values) out << v.real() << ',' << v.imag() << '\n';
}

SampledKernel load_kernel_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open kernel file " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "SLKERNEL", 8) != 0) throw std::runtime_error("kernel binary has wrong magic");
    if (read_raw<std::int32_t>(in) != 1) throw std::runtime_error("unsupported kernel binary version");
    SampledKernel k;
    k.d = read_raw<std::int32_t>(in);
    if (k.d < 1 || k.d > 8) throw std::runtime_error("kernel binary has invalid d");
    const int axes = 2 * k.d + 1;
    for (int a = 0; a < axes; ++a) k.counts.push_back(read_raw<std::int32_t>(in));
    for (int a = 0; a < axes; ++a) k.lower.push_back(read_raw<double>(in));
    for (int a = 0; a < axes; ++a) k.spacing.push_back(read_raw<double>(in));
    std::size_t total = 1;
    for (int c : k.counts) total *= static_cast<std::size_t>(std::max(c, 0));
    k.values.resize(total);
    for (auto& v : k.values) {
        const double re = read_raw<double>(in);
        const double im = read_raw<double>(in);
        v = cd(re, im);
    }
    check_shape(k);
    return k;
}

void save_kernel_binary(const SampledKernel& kernel, const std::string& path) {
    check_shape(kernel);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write kernel file " + path);
    out.write("SLKERNEL", 8);
    write_raw<std::int32_t>(out, 1);
    write_raw<std::int32_t>(out, kernel.d);
    for (int c : kernel.counts) write_raw<std::int32_t>(out, c);
    for (double v : kernel.lower) write_raw<double>(out, v);
    for (double v : kernel.spacing) write_raw<double>(out, v);
    for (const cd& v : kernel.values) {
        write_raw<double>(out, v.real());
        write_raw<double>(out, v.imag());
    }
}

}  // namespace sublab

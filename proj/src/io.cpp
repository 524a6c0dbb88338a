#include "codimflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace codimflow {

std::string Provenance::header_line() const {
    std::ostringstream os;
    os << "# " << kToolVersion << "; config=" << config_hash << "; seed=" << seed;
    return os.str();
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

// Parses "key=value" fields out of a "name v1; k=v; ..." header line.
std::string header_field(const std::string& line, const std::string& key) {
    const std::string pat = key + "=";
    const size_t pos = line.find(pat);
    if (pos == std::string::npos)
        throw std::runtime_error("malformed header, missing field '" + key + "': " + line);
    size_t end = line.find(';', pos);
    if (end == std::string::npos) end = line.size();
    return line.substr(pos + pat.size(), end - pos - pat.size());
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

void write_grid(const std::string& path, const ScalarGrid& g) {
    std::ofstream f = open_out(path);
    f << "codimflow-grid v1; n=" << g.n() << "; shape=";
    for (int a = 0; a < g.n(); ++a) f << (a ? "," : "") << g.spec().shape[static_cast<size_t>(a)];
    f << "; origin=";
    for (int a = 0; a < g.n(); ++a) f << (a ? "," : "") << format_double(g.spec().origin[a]);
    f << "; h=" << format_double(g.h()) << "; t=" << format_double(g.time) << "\n";
    for (std::int64_t i = 0; i < g.size(); ++i) f << format_double(g[i]) << "\n";
    if (!f) throw std::runtime_error("write failure: " + path);
}

ScalarGrid read_grid(const std::string& path) {
    std::ifstream f = open_in(path);
    std::string header;
    if (!std::getline(f, header) || header.rfind("codimflow-grid v1", 0) != 0)
        throw std::runtime_error("not a codimflow-grid v1 file: " + path);
    GridSpec spec;
    spec.n = std::stoi(header_field(header, "n"));
    const std::vector<double> sh = split_doubles(header_field(header, "shape"));
    const std::vector<double> org = split_doubles(header_field(header, "origin"));
    if (static_cast<int>(sh.size()) != spec.n || static_cast<int>(org.size()) != spec.n)
        throw std::runtime_error("header shape/origin arity mismatch: " + path);
    spec.origin = Vec(spec.n);
    for (int a = 0; a < spec.n; ++a) {
        spec.shape[static_cast<size_t>(a)] = static_cast<int>(sh[static_cast<size_t>(a)]);
        spec.origin[a] = org[static_cast<size_t>(a)];
    }
    spec.h = std::stod(header_field(header, "h"));
    ScalarGrid g(spec);
    g.time = std::stod(header_field(header, "t"));
    for (std::int64_t i = 0; i < g.size(); ++i) {
        std::string line;
        if (!std::getline(f, line))
            throw std::runtime_error("truncated grid file: " + path);
        g[i] = std::stod(line);
    }
    return g;
}

void write_cloud(const std::string& path, const PointCloud& pc) {
    std::ofstream f = open_out(path);
    f << "codimflow-cloud v1; n=" << pc.n << "; k=" << pc.k << "\n";
    for (const Vec& p : pc.points) {
        for (int a = 0; a < pc.n; ++a) f << (a ? "," : "") << format_double(p[a]);
        f << "\n";
    }
    if (!f) throw std::runtime_error("write failure: " + path);
}

PointCloud read_cloud(const std::string& path) {
    std::ifstream f = open_in(path);
    std::string header;
    if (!std::getline(f, header) || header.rfind("codimflow-cloud v1", 0) != 0)
        throw std::runtime_error("not a codimflow-cloud v1 file: " + path);
    PointCloud pc;
    pc.n = std::stoi(header_field(header, "n"));
    pc.k = std::stoi(header_field(header, "k"));
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const std::vector<double> xs = split_doubles(line);
        if (static_cast<int>(xs.size()) != pc.n)
            throw std::runtime_error("cloud point arity mismatch: " + path);
        Vec p(pc.n);
        for (int a = 0; a < pc.n; ++a) p[a] = xs[static_cast<size_t>(a)];
        pc.points.push_back(p);
    }
    pc.validate();
    return pc;
}

void write_csv(const std::string& path, const Provenance& prov,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream f = open_out(path);
    f << prov.header_line() << "\n";
    for (size_t i = 0; i < columns.size(); ++i) f << (i ? "," : "") << columns[i];
    f << "\n";
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw std::runtime_error("csv row arity mismatch: " + path);
        for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
        f << "\n";
    }
    if (!f) throw std::runtime_error("write failure: " + path);
}

void write_pgm_slice(const std::string& path, const ScalarGrid& g, int axis_a, int axis_b,
                     const std::array<int, 4>& fixed, const Provenance& prov) {
    if (axis_a == axis_b || axis_a < 0 || axis_b < 0 || axis_a >= g.n() || axis_b >= g.n())
        throw std::domain_error("write_pgm_slice: need two distinct axes within the grid");
    const int wa = g.spec().shape[static_cast<size_t>(axis_a)];
    const int wb = g.spec().shape[static_cast<size_t>(axis_b)];
    double vmin = g[0], vmax = g[0];
    for (std::int64_t i = 0; i < g.size(); ++i) {
        vmin = std::min(vmin, g[i]);
        vmax = std::max(vmax, g[i]);
    }
    const double span = vmax > vmin ? vmax - vmin : 1.0;
    constexpr int kMaxGray = 255;
    std::ofstream f = open_out(path);
    f << "P2\n";
    f << prov.header_line() << "\n";
    f << "# gray = round((value - " << format_double(vmin) << ") * " << kMaxGray << " / "
      << format_double(span) << ")\n";
    f << wa << " " << wb << "\n" << kMaxGray << "\n";
    for (int jb = 0; jb < wb; ++jb) {
        std::array<int, 4> iv = fixed;
        iv[static_cast<size_t>(axis_b)] = jb;
        for (int ja = 0; ja < wa; ++ja) {
            iv[static_cast<size_t>(axis_a)] = ja;
            const double v = g[g.flat(iv)];
            const int gray = static_cast<int>(std::lround((v - vmin) * kMaxGray / span));
            f << gray << (ja + 1 == wa ? "\n" : " ");
        }
    }
    if (!f) throw std::runtime_error("write failure: " + path);
}

}  // namespace codimflow

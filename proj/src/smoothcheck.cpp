#include "codimflow/smoothcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "codimflow/geomlin.hpp"
#include "codimflow/reifenberg.hpp"
#include "codimflow/shapes.hpp"

namespace codimflow {

namespace {

double norm_range(const Vec& x, int lo, int hi) {  // euclidean norm of coords [lo, hi)
    double s = 0.0;
    for (int i = lo; i < hi; ++i) s += x[i] * x[i];
    return std::sqrt(s);
}

}  // namespace

AnalyticFlow AnalyticFlow::sphere(int n, int k, double R) {
    if (k < 1 || k >= n) throw std::domain_error("AnalyticFlow::sphere: need 1 <= k < n");
    if (!(R > 0.0)) throw std::domain_error("AnalyticFlow::sphere: need R > 0");
    AnalyticFlow f;
    f.family = Family::Sphere;
    f.n = n;
    f.k = k;
    f.j = k;
    f.R = R;
    return f;
}

AnalyticFlow AnalyticFlow::plane(int n, int k) {
    if (k < 1 || k >= n) throw std::domain_error("AnalyticFlow::plane: need 1 <= k < n");
    AnalyticFlow f;
    f.family = Family::Plane;
    f.n = n;
    f.k = k;
    f.j = 0;
    return f;
}

AnalyticFlow AnalyticFlow::cylinder(int n, int k, int j, double R) {
    if (k < 2 || k >= n || j < 1 || j >= k)
        throw std::domain_error("AnalyticFlow::cylinder: need 1 <= j < k < n");
    if (!(R > 0.0)) throw std::domain_error("AnalyticFlow::cylinder: need R > 0");
    AnalyticFlow f;
    f.family = Family::Cylinder;
    f.n = n;
    f.k = k;
    f.j = j;
    f.R = R;
    return f;
}

double AnalyticFlow::radius(double t) const {
    if (family == Family::Plane) return 0.0;
    const double q = R * R - 2.0 * j * t;
    if (q <= 0.0) throw std::domain_error("AnalyticFlow: past the extinction time");
    return std::sqrt(q);
}

double AnalyticFlow::max_time() const {
    if (family == Family::Plane) return std::numeric_limits<double>::infinity();
    return R * R / (2.0 * j);
}

double AnalyticFlow::norm_A(double t) const {
    if (family == Family::Plane) return 0.0;
    return std::sqrt(static_cast<double>(j)) / radius(t);
}

double AnalyticFlow::distance(const Vec& x, double t) const {
    switch (family) {
        case Family::Plane:
            return norm_range(x, k, n);
        case Family::Sphere: {
            const double d_sph = norm_range(x, 0, k + 1) - radius(t);
            const double d_nor = norm_range(x, k + 1, n);
            return std::sqrt(d_sph * d_sph + d_nor * d_nor);
        }
        case Family::Cylinder: {
            const double d_sph = norm_range(x, 0, j + 1) - radius(t);
            const double d_nor = norm_range(x, k + 1, n);
            return std::sqrt(d_sph * d_sph + d_nor * d_nor);
        }
    }
    return 0.0;
}

Vec AnalyticFlow::nearest_point(const Vec& y, double t) const {
    Vec p(n);
    switch (family) {
        case Family::Plane:
            for (int i = 0; i < k; ++i) p[i] = y[i];
            return p;
        case Family::Sphere: {
            const double rho_amb = norm_range(y, 0, k + 1);
            if (rho_amb < 1e-14)
                throw std::domain_error("AnalyticFlow::nearest_point: on the focal set");
            const double f = radius(t) / rho_amb;
            for (int i = 0; i <= k; ++i) p[i] = y[i] * f;
            return p;
        }
        case Family::Cylinder: {
            const double rho_amb = norm_range(y, 0, j + 1);
            if (rho_amb < 1e-14)
                throw std::domain_error("AnalyticFlow::nearest_point: on the focal set");
            const double f = radius(t) / rho_amb;
            for (int i = 0; i <= j; ++i) p[i] = y[i] * f;
            for (int i = j + 1; i <= k; ++i) p[i] = y[i];
            return p;
        }
    }
    return p;
}

std::vector<double> AnalyticFlow::betas(const Vec& y, double t) const {
    std::vector<double> out(static_cast<size_t>(k), 0.0);
    if (family == Family::Plane) return out;
    const Vec p = nearest_point(y, t);
    const double r = distance(y, t);
    if (!(r > 0.0)) throw std::domain_error("AnalyticFlow::betas: point lies on the set");
    const Vec nu = (y - p) * (1.0 / r);
    const int sph_top = (family == Family::Sphere) ? k + 1 : j + 1;
    const double rho = radius(t);
    // unit radial direction of the sphere factor at the base point
    double radial_dot = 0.0;
    for (int i = 0; i < sph_top; ++i) radial_dot += p[i] / rho * nu[i];
    for (int i = 0; i < j; ++i) out[static_cast<size_t>(i)] = radial_dot / rho;
    return out;
}

Vec AnalyticFlow::point_on(double t, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vec p(n);
    if (family == Family::Plane) {
        for (int i = 0; i < k; ++i) p[i] = unif(rng);
        return p;
    }
    const int sph_top = (family == Family::Sphere) ? k + 1 : j + 1;
    Vec dir(n);
    double nrm = 0.0;
    while (nrm < 1e-8) {
        for (int i = 0; i < sph_top; ++i) dir[i] = gauss(rng);
        nrm = dir.norm();
    }
    const double f = radius(t) / nrm;
    for (int i = 0; i < sph_top; ++i) p[i] = dir[i] * f;
    if (family == Family::Cylinder)
        for (int i = j + 1; i <= k; ++i) p[i] = unif(rng);
    return p;
}

Vec AnalyticFlow::unit_normal_at(const Vec& p, double t, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // normal space: the sphere-factor radial direction (if any) plus the
    // ambient coordinates beyond k
    std::vector<Vec> basis;
    if (family != Family::Plane) {
        const int sph_top = (family == Family::Sphere) ? k + 1 : j + 1;
        Vec radial(n);
        const double rho = radius(t);
        for (int i = 0; i < sph_top; ++i) radial[i] = p[i] / rho;
        basis.push_back(radial);
    }
    for (int i = k + 1; i < n; ++i) {
        Vec e(n);
        e[i] = 1.0;
        basis.push_back(e);
    }
    if (family == Family::Plane) {
        for (int i = k; i < n; ++i) {
            Vec e(n);
            e[i] = 1.0;
            basis.push_back(e);
        }
    }
    Vec nu(n);
    double nrm = 0.0;
    while (nrm < 1e-8) {
        nu = Vec(n);
        for (const Vec& b : basis) {
            const double c = gauss(rng);
            for (int i = 0; i < n; ++i) nu[i] += c * b[i];
        }
        nrm = nu.norm();
    }
    return nu * (1.0 / nrm);
}

Shape AnalyticFlow::initial_shape() const {
    Vec center(n);
    switch (family) {
        case Family::Plane:
            return Shape::plane(n, k, center);
        case Family::Sphere:
            return Shape::sphere(n, k, center, R);
        case Family::Cylinder:
            throw std::domain_error("AnalyticFlow::initial_shape: no cylinder grid shape");
    }
    return Shape::point(center);
}

// ---- tube identities ----------------------------------------------------------

TubeReport tube_curvature_check(const AnalyticFlow& flow, const TubeSample& sample, double t,
                                double h) {
    if (!(sample.s > 0.0) || !(h > 0.0))
        throw std::domain_error("tube_curvature_check: need s > 0 and h > 0");
    const int n = flow.n, k = flow.k;
    const Vec y = sample.base + sample.normal * sample.s;
    const double r = flow.distance(y, t);
    if (std::abs(r - sample.s) > 1e-8 * std::max(1.0, sample.s))
        throw std::domain_error("tube_curvature_check: offset exceeds the injectivity radius");
    const std::vector<double> betas = flow.betas(y, t);
    for (double b : betas)
        if (std::abs(b * sample.s) >= 1.0)
            throw std::domain_error("tube_curvature_check: |beta| s >= 1 (outside the tube)");

    Vec grad(n);
    SymMat hess(n);
    auto d = [&](const Vec& x) { return flow.distance(x, t); };
    const double r0 = d(y);
    for (int a = 0; a < n; ++a) {
        Vec xp = y, xm = y;
        xp[a] += h;
        xm[a] -= h;
        grad[a] = (d(xp) - d(xm)) / (2.0 * h);
        hess.set(a, a, (d(xp) - 2.0 * r0 + d(xm)) / (h * h));
    }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            Vec xpp = y, xpm = y, xmp = y, xmm = y;
            xpp[a] += h;
            xpp[b] += h;
            xpm[a] += h;
            xpm[b] -= h;
            xmp[a] -= h;
            xmp[b] += h;
            xmm[a] -= h;
            xmm[b] -= h;
            hess.set(a, b, (d(xpp) - d(xpm) - d(xmp) + d(xmm)) / (4.0 * h * h));
        }

    const std::vector<Vec> basis = complement_basis(grad);
    SymMat M(n - 1);
    for (int a = 0; a < n - 1; ++a)
        for (int b = a; b < n - 1; ++b)
            M.set(a, b, basis[static_cast<size_t>(a)].dot(hess.apply(basis[static_cast<size_t>(b)])));
    const EigenPair e = jacobi_eigh(M);

    TubeReport rep;
    for (int i = 0; i < n - 1; ++i) rep.measured.push_back(e.values[i]);
    for (int i = 0; i < n - k - 1; ++i) rep.predicted.push_back(1.0 / sample.s);
    for (double b : betas) rep.predicted.push_back(b / (1.0 + sample.s * b));
    std::sort(rep.predicted.begin(), rep.predicted.end());
    rep.tol = 5.0 * h / (sample.s * sample.s);
    for (size_t i = 0; i < rep.predicted.size(); ++i)
        rep.max_err = std::max(rep.max_err, std::abs(rep.predicted[i] - rep.measured[i]));
    rep.pass = rep.max_err <= rep.tol;
    return rep;
}

ResidualReport distance_pde_residual(const AnalyticFlow& flow, const std::vector<Vec>& points,
                                     double t, double h) {
    ResidualReport rep;
    rep.tol = 10.0 * h * h;
    const int n = flow.n;
    for (const Vec& x : points) {
        const double r = flow.distance(x, t);
        if (!(r > 0.0)) throw std::domain_error("distance_pde_residual: point lies on the set");
        const std::vector<double> betas = flow.betas(x, t);
        for (double b : betas)
            if (std::abs(b * r) >= 1.0)
                throw std::domain_error("distance_pde_residual: point outside the tube");

        Vec grad(n);
        SymMat hess(n);
        auto d = [&](const Vec& p) { return flow.distance(p, t); };
        for (int a = 0; a < n; ++a) {
            Vec xp = x, xm = x;
            xp[a] += h;
            xm[a] -= h;
            grad[a] = (d(xp) - d(xm)) / (2.0 * h);
            hess.set(a, a, (d(xp) - 2.0 * r + d(xm)) / (h * h));
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                Vec xpp = x, xpm = x, xmp = x, xmm = x;
                xpp[a] += h;
                xpp[b] += h;
                xpm[a] += h;
                xpm[b] -= h;
                xmp[a] -= h;
                xmp[b] += h;
                xmm[a] -= h;
                xmm[b] -= h;
                hess.set(a, b, (d(xpp) - d(xpm) - d(xmp) + d(xmm)) / (4.0 * h * h));
            }
        const double dt = 1e-6;
        const double drdt = (flow.distance(x, t + dt) - flow.distance(x, t - dt)) / (2.0 * dt);

        ResidualRow row;
        row.x = x;
        row.lhs = drdt - F_operator(flow.k, grad, hess);
        row.rhs = 0.0;
        for (double b : betas) row.rhs += b * b / (1.0 + r * b);
        row.rhs *= r;
        rep.max_err = std::max(rep.max_err, std::abs(row.lhs - row.rhs));
        rep.rows.push_back(row);
    }
    rep.pass = rep.max_err <= rep.tol;
    return rep;
}

SubsolutionReport subsolution_residual(const AnalyticFlow& flow, double c1, double c2,
                                       double t_lo, double t_hi) {
    (void)c2;  // enters only through alpha_constant
    SubsolutionReport rep;
    if (!(c1 > 0.0) || !(t_lo > 0.0) || !(t_hi >= t_lo))
        throw std::domain_error("subsolution_residual: bad parameters");
    if (c1 * c1 > 0.125 + 1e-15) {
        std::ostringstream os;
        os << "c1^2 <= 1/8 fails: c1 = " << c1 << ", c1^2 = " << c1 * c1;
        rep.violation = os.str();
        return rep;
    }
    const int n_t = 10;
    for (int it = 0; it < n_t; ++it) {
        const double t = t_lo + (t_hi - t_lo) * it / (n_t - 1);
        if (flow.norm_A(t) > c1 / std::sqrt(t)) {
            std::ostringstream os;
            os << "|A|(t) <= c1/sqrt(t) fails at t = " << t << ": |A| = " << flow.norm_A(t)
               << ", bound = " << c1 / std::sqrt(t);
            rep.violation = os.str();
            return rep;
        }
    }
    rep.precondition_ok = true;

    rep.max_residual = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < n_t; ++it) {
        const double t = t_lo + (t_hi - t_lo) * it / (n_t - 1);
        double s_max = std::sqrt(t) / (4.0 * c1);
        if (flow.family != AnalyticFlow::Family::Plane)
            s_max = std::min(s_max, 0.8 * flow.radius(t));
        for (int q = 0; q < 20; ++q) {
            const std::uint64_t seed = 5000ull * static_cast<std::uint64_t>(it) + static_cast<std::uint64_t>(q);
            const Vec base = flow.point_on(t, seed);
            const Vec nu = flow.unit_normal_at(base, t, seed + 1);
            for (int is = 1; is <= 5; ++is) {
                const double s = s_max * is / 5.5;
                const Vec y = base + nu * s;
                const double r = flow.distance(y, t);
                const double v = r * r / std::sqrt(t);
                double sum = 0.0;
                for (double b : flow.betas(y, t)) sum += b * b / (1.0 + r * b);
                const double res = 2.0 * (sum - 1.0 / (4.0 * t)) * v;
                rep.max_residual = std::max(rep.max_residual, res);
                ++rep.samples;
            }
        }
    }
    rep.pass = rep.max_residual <= 1e-8;
    return rep;
}

double alpha_constant(double c1, double c2, int k) {
    if (!(c1 > 0.0)) throw std::domain_error("alpha_constant: need c1 > 0");
    const double head = 1.0 / (4.0 * c1) - c2;
    const double root = std::sqrt(2.0 * static_cast<double>(k));
    if (!(head > root)) {
        std::ostringstream os;
        os << "alpha_constant: admissibility 1/(4 c1) - c2 > sqrt(2k) fails: " << head
           << " <= " << root;
        throw std::domain_error(os.str());
    }
    return 16.0 * c1 * c1 * (head - root);
}

SandwichReport uniqueness_sandwich_experiment(const AnalyticFlow& flow, double h,
                                              const std::vector<double>& times, double c1,
                                              double c2) {
    if (times.empty()) throw std::domain_error("uniqueness_sandwich_experiment: no times");
    SandwichReport rep;
    rep.alpha = alpha_constant(c1, c2, flow.k);
    rep.slack = 3.0 * h;

    const int n = flow.n;
    const double extent = (flow.family == AnalyticFlow::Family::Sphere) ? flow.R + 0.35 : 0.55;
    FlowConfig cfg;
    cfg.n = n;
    cfg.k = flow.k;
    const int nn = 2 * static_cast<int>(std::ceil(extent / h)) + 1;
    cfg.grid.n = n;
    cfg.grid.h = h;
    cfg.grid.origin = Vec(n);
    for (int a = 0; a < n; ++a) {
        cfg.grid.shape[static_cast<size_t>(a)] = nn;
        cfg.grid.origin[a] = -h * (nn - 1) / 2.0;
    }
    cfg.shape = flow.initial_shape();
    cfg.cap = 0.2;
    cfg.t_end = *std::max_element(times.begin(), times.end());
    cfg.snapshot_times = times;
    cfg.apply_defaults();

    for (double t : times) {
        const double width = std::min(std::sqrt(t) / (4.0 * c1), 0.8 * cfg.cap);
        if (width < 4.0 * h)
            throw std::domain_error(
                "uniqueness_sandwich_experiment: grid does not resolve the tube width");
    }

    const FlowRecord rec = run_flow(cfg);
    bool all_pass = true;
    for (const ScalarGrid& snap : rec.snapshots) {
        const double t = snap.time;
        SandwichRow row;
        row.t = t;
        const double width = std::min(std::sqrt(t) / (4.0 * c1), 0.8 * cfg.cap);
        double min_gap = std::numeric_limits<double>::infinity();
        for (std::int64_t i = 0; i < snap.size(); ++i) {
            const Vec x = snap.node_point(i);
            const double r = flow.distance(x, t);
            if (!(r > 0.0) || r >= width) continue;
            const double v = r * r / std::sqrt(t);
            min_gap = std::min(min_gap, snap[i] - (rep.alpha * v - rep.slack));
        }
        row.min_gap = min_gap;

        const PointCloud zero = zero_set(snap, 1.5 * h, flow.k);
        PointCloud target;
        target.n = n;
        target.k = flow.k;
        if (flow.family == AnalyticFlow::Family::Sphere) {
            Vec center(n);
            target = Shape::sphere(n, flow.k, center, flow.radius(t)).sample(h / 2.0);
        } else if (flow.family == AnalyticFlow::Family::Plane) {
            // lattice sample of the plane within the grid interior
            const double lim = extent - cfg.cap;
            const int steps = static_cast<int>(std::floor(lim / (h / 2.0)));
            if (flow.k == 1) {
                for (int i = -steps; i <= steps; ++i) {
                    Vec p(n);
                    p[0] = 0.5 * h * i;
                    target.points.push_back(p);
                }
            } else {
                for (int i = -steps; i <= steps; ++i)
                    for (int jj = -steps; jj <= steps; ++jj) {
                        Vec p(n);
                        p[0] = 0.5 * h * i;
                        p[1] = 0.5 * h * jj;
                        target.points.push_back(p);
                    }
            }
        } else {
            throw std::domain_error("uniqueness_sandwich_experiment: unsupported family");
        }
        if (zero.points.empty()) {
            row.dH = std::numeric_limits<double>::infinity();
            row.pass = false;
        } else {
            PointCloud clipped = zero;
            if (flow.family == AnalyticFlow::Family::Plane) {
                // ignore band nodes whose plane footprint leaves the target window
                clipped.points.clear();
                const double lim = extent - cfg.cap;
                for (const Vec& p : zero.points) {
                    bool inside = true;
                    for (int a = 0; a < flow.k; ++a)
                        if (std::abs(p[a]) > lim) inside = false;
                    if (inside) clipped.points.push_back(p);
                }
                if (clipped.points.empty()) clipped = zero;
            }
            row.dH = hausdorff(clipped, target);
            row.pass = row.min_gap >= 0.0 && row.dH <= 2.0 * h;
        }
        all_pass = all_pass && row.pass;
        rep.rows.push_back(row);
    }
    rep.pass = all_pass;
    return rep;
}

// ---- multiscale experiment ------------------------------------------------------

namespace {

// band nodes projected onto the zero set along the gradient: the raw band is
// ~h thick, which a local quadratic fit would read as curvature of order 1/h
PointCloud sharpen_zero_cloud(const ScalarGrid& u, double threshold, int k) {
    PointCloud out;
    out.n = u.n();
    out.k = k;
    const double h = u.h();
    // u is unsigned, so its gradient has a kink on the zero set itself; take
    // nodes one to three cells out, where the stencil stays on one side
    const double lo = threshold;
    const double hi = threshold + 2.0 * h;
    for (std::int64_t i = 0; i < u.size(); ++i) {
        if (u[i] < lo || u[i] > hi) continue;
        const auto iv = u.unflatten(i);
        if (!u.is_interior(iv)) continue;
        Vec g(u.n());
        for (int a = 0; a < u.n(); ++a)
            g[a] = (u[i + u.stride(a)] - u[i - u.stride(a)]) / (2.0 * h);
        const double g2 = g.dot(g);
        if (g2 < 0.25) continue;
        out.points.push_back(u.node_point(i) - g * (u[i] / g2));
    }
    return out;
}

bool connectivity_at_scale(const PointCloud& X, const PointCloud& cloud, double s, double h) {
    if (cloud.points.empty()) return false;
    // centers: an s/2-net of X
    std::vector<int> centers;
    {
        std::vector<int> order(X.points.size());
        std::iota(order.begin(), order.end(), 0);
        const double s2 = 0.25 * s * s;
        for (int i : order) {
            bool ok = true;
            for (int c : centers) {
                const Vec d = X.points[static_cast<size_t>(i)] - X.points[static_cast<size_t>(c)];
                if (d.dot(d) < s2) {
                    ok = false;
                    break;
                }
            }
            if (ok) centers.push_back(i);
        }
    }
    // spatial hash with cells of the edge length, so the adjacency scan per
    // point touches only the 3^n neighboring cells
    const double edge = 2.1 * h;
    const double edge2 = edge * edge;
    const int n = X.n;
    std::map<std::array<int, kMaxDim>, std::vector<int>> cells;
    auto cell_of = [&](const Vec& p) {
        std::array<int, kMaxDim> c{};
        for (int a = 0; a < n; ++a) c[static_cast<size_t>(a)] = static_cast<int>(std::floor(p[a] / edge));
        return c;
    };
    for (size_t i = 0; i < cloud.points.size(); ++i)
        cells[cell_of(cloud.points[i])].push_back(static_cast<int>(i));

    std::vector<int> label(cloud.points.size(), -1);
    for (int c : centers) {
        const Vec& x = X.points[static_cast<size_t>(c)];
        std::fill(label.begin(), label.end(), -1);
        // BFS components of cloud restricted to B(x, s)
        int n_components = 0, hits = 0;
        std::vector<int> queue;
        for (size_t i = 0; i < cloud.points.size(); ++i) {
            if (label[i] != -1 || (cloud.points[i] - x).norm() > s) continue;
            bool hit = false;
            queue.clear();
            queue.push_back(static_cast<int>(i));
            label[i] = n_components;
            while (!queue.empty()) {
                const int a = queue.back();
                queue.pop_back();
                if ((cloud.points[static_cast<size_t>(a)] - x).norm() <= 0.8 * s) hit = true;
                std::array<int, kMaxDim> base = cell_of(cloud.points[static_cast<size_t>(a)]);
                std::array<int, kMaxDim> nb = base;
                std::function<void(int)> visit = [&](int axis) {
                    if (axis == n) {
                        const auto it = cells.find(nb);
                        if (it == cells.end()) return;
                        for (int b : it->second) {
                            if (label[static_cast<size_t>(b)] != -1) continue;
                            if ((cloud.points[static_cast<size_t>(b)] - x).norm() > s) continue;
                            const Vec d = cloud.points[static_cast<size_t>(a)] -
                                          cloud.points[static_cast<size_t>(b)];
                            if (d.dot(d) > edge2) continue;
                            label[static_cast<size_t>(b)] = n_components;
                            queue.push_back(b);
                        }
                        return;
                    }
                    for (int o = -1; o <= 1; ++o) {
                        nb[static_cast<size_t>(axis)] = base[static_cast<size_t>(axis)] + o;
                        visit(axis + 1);
                    }
                    nb[static_cast<size_t>(axis)] = base[static_cast<size_t>(axis)];
                };
                visit(0);
            }
            if (hit) ++hits;
            ++n_components;
        }
        // a ball the zero set has retreated from entirely (an open curve
        // flows in from its endpoints) is skipped, not failed; two or more
        // components reaching the inner ball is a genuine break
        if (hits > 1) return false;
    }
    return true;
}

}  // namespace

MultiscaleReport multiscale_uniform_estimates(const PointCloud& X,
                                              const std::vector<double>& scales) {
    X.validate();
    MultiscaleReport rep;
    const int n = X.n, k = X.k;

    const std::vector<double> t_fracs = {0.08, 0.15, 0.22, 0.3};
    std::vector<std::vector<double>> c1_by_t(t_fracs.size()), c2_by_t(t_fracs.size());

    for (double r : scales) {
        const PointCloud Xr = approximate_manifold(X, r, r / 8.0);
        const double h = r / 10.0;
        const double t_end = 0.3 * r * r;
        const double cap = std::max(6.0 * h, 2.0 * std::sqrt(2.0 * k * t_end));

        Vec lo = X.points[0], hi = X.points[0];
        for (const Vec& p : X.points)
            for (int a = 0; a < n; ++a) {
                lo[a] = std::min(lo[a], p[a]);
                hi[a] = std::max(hi[a], p[a]);
            }
        const double pad = cap + 4.0 * h;

        FlowConfig cfg;
        cfg.n = n;
        cfg.k = k;
        cfg.grid.n = n;
        cfg.grid.h = h;
        cfg.grid.origin = Vec(n);
        for (int a = 0; a < n; ++a) {
            cfg.grid.origin[a] = lo[a] - pad;
            cfg.grid.shape[static_cast<size_t>(a)] =
                static_cast<int>(std::ceil((hi[a] - lo[a] + 2.0 * pad) / h)) + 1;
        }
        cfg.shape = Shape::make_cloud(Xr);
        cfg.cap = cap;
        cfg.t_end = t_end;
        for (double f : t_fracs) cfg.snapshot_times.push_back(f * r * r);
        cfg.apply_defaults();

        const FlowRecord rec = run_flow(cfg);
        for (size_t ti = 0; ti < rec.snapshots.size(); ++ti) {
            const ScalarGrid& snap = rec.snapshots[ti];
            const double t = snap.time;
            MultiscaleRow row;
            row.scale = r;
            row.t = t;
            const PointCloud zero = sharpen_zero_cloud(snap, 1.5 * h, k);
            if (zero.points.empty()) {
                row.c1_hat = row.c2_hat = std::numeric_limits<double>::quiet_NaN();
                rep.rows.push_back(row);
                continue;
            }
            row.c1_hat = max_quadratic_curvature(zero, 5.0 * h) * std::sqrt(t);
            row.c2_hat = hausdorff(zero, X) / std::sqrt(t);
            double s = std::sqrt(t) / std::max(row.c1_hat, 1e-9);
            s = std::min(s, 0.5 * cfg.grid.diameter());
            row.connectivity_ok = connectivity_at_scale(X, zero, s, h);
            if (ti < c1_by_t.size()) {
                c1_by_t[ti].push_back(row.c1_hat);
                c2_by_t[ti].push_back(row.c2_hat);
            }
            rep.rows.push_back(row);
        }
    }

    auto ratio = [](const std::vector<std::vector<double>>& table) {
        double worst = 0.0;
        for (const auto& vals : table) {
            if (vals.size() < 2) continue;
            const double mx = *std::max_element(vals.begin(), vals.end());
            const double mn = *std::min_element(vals.begin(), vals.end());
            if (mn > 0.0) worst = std::max(worst, mx / mn);
        }
        return worst;
    };
    rep.c1_scale_ratio = ratio(c1_by_t);
    rep.c2_scale_ratio = ratio(c2_by_t);
    return rep;
}

}  // namespace codimflow

#include "codimflow/graphflow.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>

#include "codimflow/levelset.hpp"

namespace codimflow {

namespace {

int wrap(int i, int nnodes) {
    // periodic identification: node nnodes-1 coincides with node 0 shifted
    const int period = nnodes - 1;
    i %= period;
    if (i < 0) i += period;
    return i;
}

double frob(const std::array<Vec, 2>& du, int k) {
    double s = 0.0;
    for (int a = 0; a < k; ++a) s += du[static_cast<size_t>(a)].dot(du[static_cast<size_t>(a)]);
    return std::sqrt(s);
}

}  // namespace

GraphField GraphField::make(int k, int m, std::array<int, 2> shape, double h, const Vec& origin,
                            bool periodic) {
    if (k < 1 || k > 2) throw std::domain_error("GraphField: k must be 1 or 2");
    if (m < 1 || m > kMaxDim - k) throw std::domain_error("GraphField: bad codimension");
    if (!(h > 0.0)) throw std::domain_error("GraphField: h must be positive");
    GraphField g;
    g.k = k;
    g.m = m;
    g.shape = shape;
    if (k == 1) g.shape[1] = 1;
    if (g.shape[0] < 5 || (k == 2 && g.shape[1] < 5))
        throw std::domain_error("GraphField: need at least 5 nodes per axis");
    g.h = h;
    g.origin = origin;
    g.periodic = periodic;
    g.values.assign(static_cast<size_t>(g.nodes() * m), 0.0);
    return g;
}

std::int64_t GraphField::nodes() const {
    return static_cast<std::int64_t>(shape[0]) * static_cast<std::int64_t>(shape[1]);
}

std::int64_t GraphField::flat(int i, int j) const {
    return static_cast<std::int64_t>(i) + static_cast<std::int64_t>(j) * shape[0];
}

Vec GraphField::node_x(int i, int j) const {
    Vec x(k);
    x[0] = origin[0] + h * i;
    if (k == 2) x[1] = origin[1] + h * j;
    return x;
}

bool GraphField::is_interior(int i, int j, int margin) const {
    if (periodic) return true;
    if (i < margin || i >= shape[0] - margin) return false;
    if (k == 2 && (j < margin || j >= shape[1] - margin)) return false;
    return true;
}

void GraphField::derivatives(int i, int j, std::array<Vec, 2>& du,
                             std::array<std::array<Vec, 2>, 2>& hess) const {
    auto at = [&](int ii, int jj, int c) {
        if (periodic) {
            ii = wrap(ii, shape[0]);
            if (k == 2) jj = wrap(jj, shape[1]);
        }
        return val(flat(ii, jj), c);
    };
    const double inv2h = 1.0 / (2.0 * h);
    const double invh2 = 1.0 / (h * h);
    for (int a = 0; a < 2; ++a) {
        du[static_cast<size_t>(a)] = Vec(m);
        for (int b = 0; b < 2; ++b) hess[static_cast<size_t>(a)][static_cast<size_t>(b)] = Vec(m);
    }
    for (int c = 0; c < m; ++c) {
        const double cme = at(i, j, c);
        du[0][c] = (at(i + 1, j, c) - at(i - 1, j, c)) * inv2h;
        hess[0][0][c] = (at(i + 1, j, c) - 2.0 * cme + at(i - 1, j, c)) * invh2;
        if (k == 2) {
            du[1][c] = (at(i, j + 1, c) - at(i, j - 1, c)) * inv2h;
            hess[1][1][c] = (at(i, j + 1, c) - 2.0 * cme + at(i, j - 1, c)) * invh2;
            const double cross = (at(i + 1, j + 1, c) - at(i + 1, j - 1, c) -
                                  at(i - 1, j + 1, c) + at(i - 1, j - 1, c)) *
                                 (0.25 * invh2);
            hess[0][1][c] = cross;
            hess[1][0][c] = cross;
        }
    }
}

double GraphField::max_gradient() const {
    double worst = 0.0;
    std::array<Vec, 2> du;
    std::array<std::array<Vec, 2>, 2> hess;
    const int jmax = (k == 2) ? shape[1] : 1;
    for (int j = 0; j < jmax; ++j)
        for (int i = 0; i < shape[0]; ++i) {
            if (!is_interior(i, j)) continue;
            derivatives(i, j, du, hess);
            worst = std::max(worst, frob(du, k));
        }
    return worst;
}

SymMat inverse_metric(int k, const std::array<Vec, 2>& du) {
    SymMat g(k);
    if (k == 1) {
        g.set(0, 0, 1.0 / (1.0 + du[0].dot(du[0])));
        return g;
    }
    const double m11 = 1.0 + du[0].dot(du[0]);
    const double m12 = du[0].dot(du[1]);
    const double m22 = 1.0 + du[1].dot(du[1]);
    const double det = m11 * m22 - m12 * m12;
    g.set(0, 0, m22 / det);
    g.set(0, 1, -m12 / det);
    g.set(1, 1, m11 / det);
    return g;
}

namespace {

// generic elimination path used by the reference kernel
SymMat inverse_metric_reference(int k, const std::array<Vec, 2>& du) {
    double mat[2][2];
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            mat[a][b] = (a == b ? 1.0 : 0.0) + du[static_cast<size_t>(a)].dot(du[static_cast<size_t>(b)]);
    SymMat g(k);
    for (int col = 0; col < k; ++col) {
        double m[2][2] = {{mat[0][0], mat[0][1]}, {mat[1][0], mat[1][1]}};
        double rhs[2] = {col == 0 ? 1.0 : 0.0, col == 1 ? 1.0 : 0.0};
        // partial-pivot elimination, size <= 2
        if (k == 2 && std::abs(m[1][0]) > std::abs(m[0][0])) {
            std::swap(m[0], m[1]);
            std::swap(rhs[0], rhs[1]);
        }
        if (k == 2) {
            const double f = m[1][0] / m[0][0];
            m[1][1] -= f * m[0][1];
            rhs[1] -= f * rhs[0];
            const double x1 = rhs[1] / m[1][1];
            const double x0 = (rhs[0] - m[0][1] * x1) / m[0][0];
            if (col == 0) g.set(0, 0, x0);
            g.set(col, 1, x1);
            if (col == 1) g.set(0, 1, x0);
        } else {
            g.set(0, 0, rhs[0] / m[0][0]);
        }
    }
    return g;
}

template <bool kParallel>
GraphField step_impl(const GraphField& u, double dt, bool reference) {
    if (!(dt > 0.0) || dt > u.h * u.h / (4.0 * u.k) * (1.0 + 1e-12))
        throw std::domain_error("graph_step: dt must lie in (0, h^2/(4k)]");
    GraphField next = u;
    next.time = u.time + dt;
    const int jmax = (u.k == 2) ? u.shape[1] : 1;

    std::exception_ptr err;
    std::mutex err_mutex;
#pragma omp parallel for schedule(static) if (kParallel)
    for (int j = 0; j < jmax; ++j) {
        try {
            std::array<Vec, 2> du;
            std::array<std::array<Vec, 2>, 2> hess;
            for (int i = 0; i < u.shape[0]; ++i) {
                if (!u.is_interior(i, j)) continue;  // Dirichlet: frozen at the initial trace
                u.derivatives(i, j, du, hess);
                const SymMat g =
                    reference ? inverse_metric_reference(u.k, du) : inverse_metric(u.k, du);
                const std::int64_t node = u.flat(i, j);
                for (int c = 0; c < u.m; ++c) {
                    double rhs = 0.0;
                    for (int a = 0; a < u.k; ++a)
                        for (int b = 0; b < u.k; ++b)
                            rhs += g(a, b) * hess[static_cast<size_t>(a)][static_cast<size_t>(b)][c];
                    const double v = u.val(node, c) + dt * rhs;
                    if (!std::isfinite(v)) {
                        std::ostringstream os;
                        os << "graph_step: non-finite value at node (" << i << "," << j
                           << ") component " << c;
                        throw std::runtime_error(os.str());
                    }
                    next.val(node, c) = v;
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return next;
}

}  // namespace

GraphField graph_step(const GraphField& u, double dt) { return step_impl<true>(u, dt, false); }

GraphField graph_step_reference(const GraphField& u, double dt) {
    return step_impl<false>(u, dt, true);
}

CurvatureSample second_fundamental_form(const GraphField& u, int i, int j) {
    if (!u.is_interior(i, j, 2))
        throw std::domain_error("second_fundamental_form: node closer than 2 cells to the boundary");
    std::array<Vec, 2> du;
    std::array<std::array<Vec, 2>, 2> hess;
    u.derivatives(i, j, du, hess);
    const SymMat g = inverse_metric(u.k, du);
    // |A|^2 = g^{ik} g^{jl} (<u_ij, u_kl> - g^{ab} <u_ij, u_a><u_kl, u_b>)
    double total = 0.0;
    for (int i1 = 0; i1 < u.k; ++i1)
        for (int j1 = 0; j1 < u.k; ++j1)
            for (int i2 = 0; i2 < u.k; ++i2)
                for (int j2 = 0; j2 < u.k; ++j2) {
                    const Vec& h1 = hess[static_cast<size_t>(i1)][static_cast<size_t>(j1)];
                    const Vec& h2 = hess[static_cast<size_t>(i2)][static_cast<size_t>(j2)];
                    double inner = h1.dot(h2);
                    for (int a = 0; a < u.k; ++a)
                        for (int b = 0; b < u.k; ++b)
                            inner -= g(a, b) * h1.dot(du[static_cast<size_t>(a)]) *
                                     h2.dot(du[static_cast<size_t>(b)]);
                    total += g(i1, i2) * g(j1, j2) * inner;
                }
    CurvatureSample s;
    s.norm_A = std::sqrt(std::max(0.0, total));
    return s;
}

// ---- interpolation patch library -------------------------------------------

namespace {

struct Patch {
    std::string name;
    int k = 1, m = 1;
    // fills u(x) and the gradient block du[a] = du/dx_a
    std::function<void(const Vec& x, Vec& u, std::array<Vec, 2>& du)> eval;
};

std::vector<Patch> patch_library(double alpha, double beta, double r) {
    const double a = alpha / r;  // curvature scale
    const double B = beta * r;   // slab half-height
    std::vector<Patch> lib;

    auto scalar = [](int k, int m, std::function<double(double, double)> f,
                     std::function<std::array<double, 2>(double, double)> grad) {
        return [f, grad](const Vec& x, Vec& u, std::array<Vec, 2>& du) {
            const double x1 = x[0], x2 = x.dim > 1 ? x[1] : 0.0;
            u = Vec(1);
            u[0] = f(x1, x2);
            const auto g = grad(x1, x2);
            du[0] = Vec(1);
            du[0][0] = g[0];
            du[1] = Vec(1);
            du[1][0] = g[1];
        };
    };

    lib.push_back({"flat", 1, 1,
                   scalar(1, 1, [](double, double) { return 0.0; },
                          [](double, double) { return std::array<double, 2>{0.0, 0.0}; })});

    auto add_circle = [&](const std::string& name, double R) {
        lib.push_back({name, 1, 1,
                       scalar(1, 1,
                              [R](double x, double) { return R - std::sqrt(R * R - x * x); },
                              [R](double x, double) {
                                  return std::array<double, 2>{x / std::sqrt(R * R - x * x), 0.0};
                              })});
    };
    add_circle("circle", 1.0 / a);
    add_circle("circle-half-curvature", 2.0 / a);

    lib.push_back({"parabola", 1, 1,
                   scalar(1, 1, [a](double x, double) { return 0.5 * a * x * x; },
                          [a](double x, double) { return std::array<double, 2>{a * x, 0.0}; })});

    {
        const double q = std::sqrt(a / B);
        lib.push_back({"sine", 1, 1,
                       scalar(1, 1, [B, q](double x, double) { return B * std::sin(q * x); },
                              [B, q](double x, double) {
                                  return std::array<double, 2>{B * q * std::cos(q * x), 0.0};
                              })});
    }

    {
        // helix: curvature c q^2 / (1 + c^2 q^2) <= a with c q^2 = a
        const double c = B / 2.0, q = std::sqrt(a / c);
        lib.push_back({"helix", 1, 2, [c, q](const Vec& x, Vec& u, std::array<Vec, 2>& du) {
                           u = Vec(2);
                           u[0] = c * (std::cos(q * x[0]) - 1.0);
                           u[1] = c * std::sin(q * x[0]);
                           du[0] = Vec(2);
                           du[0][0] = -c * q * std::sin(q * x[0]);
                           du[0][1] = c * q * std::cos(q * x[0]);
                           du[1] = Vec(2);
                       }});
    }

    {
        const double R = 1.0 / a, psi = 0.3;
        lib.push_back({"tilted-circle", 1, 2, [R, psi](const Vec& x, Vec& u, std::array<Vec, 2>& du) {
                           const double p = R - std::sqrt(R * R - x[0] * x[0]);
                           const double dp = x[0] / std::sqrt(R * R - x[0] * x[0]);
                           u = Vec(2);
                           u[0] = p * std::cos(psi);
                           u[1] = p * std::sin(psi);
                           du[0] = Vec(2);
                           du[0][0] = dp * std::cos(psi);
                           du[0][1] = dp * std::sin(psi);
                           du[1] = Vec(2);
                       }});
    }

    {
        const double R = std::sqrt(2.0) / a;  // |A| = sqrt(2)/R = a
        lib.push_back({"sphere-cap", 2, 1,
                       scalar(2, 1,
                              [R](double x1, double x2) {
                                  return R - std::sqrt(R * R - x1 * x1 - x2 * x2);
                              },
                              [R](double x1, double x2) {
                                  const double w = std::sqrt(R * R - x1 * x1 - x2 * x2);
                                  return std::array<double, 2>{x1 / w, x2 / w};
                              })});
    }

    {
        const double R = 1.0 / a;
        lib.push_back({"cylinder-cap", 2, 1,
                       scalar(2, 1,
                              [R](double x1, double) { return R - std::sqrt(R * R - x1 * x1); },
                              [R](double x1, double) {
                                  return std::array<double, 2>{x1 / std::sqrt(R * R - x1 * x1), 0.0};
                              })});
    }

    {
        const double c = a / std::sqrt(2.0);  // |A|^2 = 2 c^2 at the origin
        lib.push_back({"saddle", 2, 1,
                       scalar(2, 1,
                              [c](double x1, double x2) { return 0.5 * c * (x1 * x1 - x2 * x2); },
                              [c](double x1, double x2) {
                                  return std::array<double, 2>{c * x1, -c * x2};
                              })});
        lib.push_back({"paraboloid-pair", 2, 2, [c](const Vec& x, Vec& u, std::array<Vec, 2>& du) {
                           u = Vec(2);
                           u[0] = 0.5 * c * x[0] * x[0];
                           u[1] = 0.5 * c * x[1] * x[1];
                           du[0] = Vec(2);
                           du[0][0] = c * x[0];
                           du[1] = Vec(2);
                           du[1][1] = c * x[1];
                       }});
    }

    {
        const double q = std::sqrt(a / B);
        lib.push_back({"sine-2d", 2, 1,
                       scalar(2, 1, [B, q](double x1, double) { return B * std::sin(q * x1); },
                              [B, q](double x1, double) {
                                  return std::array<double, 2>{B * q * std::cos(q * x1), 0.0};
                              })});
    }

    return lib;
}

}  // namespace

std::vector<PatchResult> interpolation_check(double alpha, double beta, double r) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::domain_error("interpolation_check: need alpha, beta > 0");
    if (alpha * beta >= 0.05)
        throw std::domain_error("interpolation_check: alpha*beta must stay below the 0.05 guard");
    const double B = beta * r;
    const double inner = 0.9 * r;  // delta = 0.1
    const double bound = std::sqrt(3.0 * alpha * beta);
    const double ab = alpha * beta;
    const double circle_bound = std::sqrt(2.0 * ab - ab * ab) / (1.0 - ab);

    std::vector<PatchResult> out;
    for (const Patch& p : patch_library(alpha, beta, r)) {
        PatchResult res;
        res.name = p.name;
        res.bound = bound;
        res.circle_bound = circle_bound;
        // the hypothesis is confinement over a centered ball, not pointwise:
        // measure the slope only inside the largest radius at which the
        // whole patch still fits in the slab (a saddle has in-slab points at
        // any radius along its zero diagonal, with unbounded slope)
        std::vector<std::pair<double, double>> samples;  // (|x|, slope or -1 if out)
        Vec u;
        std::array<Vec, 2> du;
        auto consider = [&](const Vec& x) {
            p.eval(x, u, du);
            bool in_slab = true;
            for (int c = 0; c < p.m; ++c)
                if (std::abs(u[c]) > B) in_slab = false;
            samples.push_back({x.norm(), in_slab ? frob(du, p.k) : -1.0});
        };
        if (p.k == 1) {
            const int steps = 512;
            for (int i = -steps; i <= steps; ++i) {
                Vec x(1);
                x[0] = inner * i / steps;
                consider(x);
            }
        } else {
            const int steps = 96;
            for (int i = -steps; i <= steps; ++i)
                for (int j = -steps; j <= steps; ++j) {
                    Vec x(2);
                    x[0] = inner * i / steps;
                    x[1] = inner * j / steps;
                    if (x.norm() > inner) continue;
                    consider(x);
                }
        }
        double exit_radius = 2.0 * inner;
        for (const auto& s : samples)
            if (s.second < 0.0) exit_radius = std::min(exit_radius, s.first);
        double worst = -1.0;
        for (const auto& s : samples)
            if (s.second >= 0.0 && s.first < exit_radius) worst = std::max(worst, s.second);
        if (worst < 0.0) {
            res.excluded = true;
            res.pass = true;
        } else {
            res.max_slope = worst;
            res.pass = worst <= bound;
        }
        out.push_back(res);
    }
    return out;
}

// ---- small-data experiment --------------------------------------------------

SmallDataReport small_data_estimate_experiment(int k, int m, double eps, double tau, double r,
                                               int trials, std::uint64_t seed) {
    if (eps > 0.05 || tau > 0.1) throw std::domain_error("small_data_estimate_experiment: need eps <= 0.05, tau <= 0.1");
    SmallDataReport rep;
    rep.eps = eps;
    rep.tau = tau;
    rep.r = r;
    rep.beta = eps * std::sqrt(tau);

    const int nn = 65;
    const double h = 2.0 * r / (nn - 1);
    Vec origin(k);
    for (int a = 0; a < k; ++a) origin[a] = -r;
    const double dt_cap = h * h / (4.0 * k);
    const double t_end = tau * r * r;
    const long steps = std::max(1L, static_cast<long>(std::ceil(t_end / (0.5 * dt_cap))));
    const double dt = t_end / static_cast<double>(steps);

    for (int trial = 0; trial < trials; ++trial) {
        SmallDataTrial row;
        row.seed = seed + static_cast<std::uint64_t>(trial);
        std::mt19937_64 rng(row.seed);
        std::uniform_real_distribution<double> qdist(5.0 / r, 9.0 / r);
        std::uniform_real_distribution<double> pdist(0.0, 2.0 * M_PI);
        std::uniform_real_distribution<double> adist(-1.0, 1.0);

        GraphField u = GraphField::make(k, m, {nn, nn}, h, origin, false);
        struct Mode {
            double amp, q1, q2, p1, p2;
        };
        std::vector<std::vector<Mode>> modes(static_cast<size_t>(m));
        for (int c = 0; c < m; ++c)
            for (int w = 0; w < 3; ++w)
                modes[static_cast<size_t>(c)].push_back(
                    {adist(rng), qdist(rng), qdist(rng), pdist(rng), pdist(rng)});
        for (int j = 0; j < (k == 2 ? nn : 1); ++j)
            for (int i = 0; i < nn; ++i) {
                const Vec x = u.node_x(i, j);
                for (int c = 0; c < m; ++c) {
                    double v = 0.0;
                    for (const Mode& md : modes[static_cast<size_t>(c)]) {
                        double s = std::sin(md.q1 * x[0] + md.p1);
                        if (k == 2) s *= std::sin(md.q2 * x[1] + md.p2);
                        v += md.amp * s;
                    }
                    u.val(u.flat(i, j), c) = v;
                }
            }
        // rescale to the gradient budget, then clamp the amplitude budget
        const double g0 = u.max_gradient();
        double scale = g0 > 0.0 ? eps / g0 : 0.0;
        double amax = 0.0;
        for (double v : u.values) amax = std::max(amax, std::abs(v) * scale);
        if (amax > rep.beta * r) scale *= rep.beta * r / amax;
        for (double& v : u.values) v *= scale;

        const double grad0 = u.max_gradient();
        double grad_peak = grad0;
        try {
            for (long s = 0; s < steps; ++s) {
                u = graph_step(u, dt);
                if (s % 16 == 0) grad_peak = std::max(grad_peak, u.max_gradient());
            }
            grad_peak = std::max(grad_peak, u.max_gradient());
            row.norm_A = second_fundamental_form(u, nn / 2, k == 2 ? nn / 2 : 0).norm_A;
            row.ratio = row.norm_A * std::sqrt(tau) * r / eps;
            row.grad_growth = grad0 > 0.0 ? grad_peak / grad0 : 1.0;
        } catch (const std::runtime_error&) {
            row.stable = false;
            ++rep.aborted;
        }
        rep.trials.push_back(row);
        if (row.stable) rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    }
    rep.pass = rep.aborted == 0 && rep.max_ratio <= 2.0;
    return rep;
}

// ---- weighted seminorms ------------------------------------------------------

namespace {

struct CylinderSample {
    int snap;
    int i, j;
    double weight;  // parabolic distance to the boundary
    Vec x;
    double t;
};

std::vector<CylinderSample> cylinder_samples(const std::vector<GraphField>& history,
                                             double shrink) {
    if (history.size() < 3) throw std::domain_error("seminorms: need at least 3 snapshots");
    const GraphField& u0 = history.front();
    const double r_dom = 0.5 * (u0.shape[0] - 1) * u0.h;
    Vec center(u0.k);
    for (int a = 0; a < u0.k; ++a) center[a] = u0.origin[a] + r_dom;
    const double r_shr = shrink * r_dom;

    std::vector<CylinderSample> out;
    for (size_t s = 0; s < history.size(); ++s) {
        const GraphField& u = history[s];
        if (u.time <= 0.0) continue;
        const int jmax = (u.k == 2) ? u.shape[1] : 1;
        for (int j = 0; j < jmax; ++j)
            for (int i = 0; i < u.shape[0]; ++i) {
                if (!u.is_interior(i, j, 2)) continue;
                const Vec x = u.node_x(i, j);
                const double w = std::min(r_shr - (x - center).norm(), std::sqrt(u.time));
                if (w <= 0.0) continue;
                out.push_back({static_cast<int>(s), i, j, w, x, u.time});
            }
    }
    if (out.empty()) throw std::domain_error("seminorms: empty shrunken cylinder");
    return out;
}

double pair_distance(const CylinderSample& a, const CylinderSample& b) {
    const Vec d = a.x - b.x;
    return std::sqrt(d.dot(d) + std::abs(a.t - b.t));
}

}  // namespace

HolderReport holder_seminorm_report(const std::vector<GraphField>& history, double shrink) {
    const auto samples = cylinder_samples(history, shrink);
    const int k = history.front().k;
    HolderReport rep;

    std::array<Vec, 2> du, dv;
    std::array<std::array<Vec, 2>, 2> hu, hv;
    for (const CylinderSample& s : samples) {
        history[static_cast<size_t>(s.snap)].derivatives(s.i, s.j, du, hu);
        double h2 = 0.0;
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                h2 += hu[static_cast<size_t>(a)][static_cast<size_t>(b)]
                          .dot(hu[static_cast<size_t>(a)][static_cast<size_t>(b)]);
        rep.weighted_d2u = std::max(rep.weighted_d2u, s.weight * std::sqrt(h2));
    }

    constexpr double kAlpha = 0.5;
    std::mt19937_64 rng(771177ull);
    std::uniform_int_distribution<size_t> pick(0, samples.size() - 1);
    for (int p = 0; p < 4096; ++p) {
        const CylinderSample& a = samples[pick(rng)];
        const CylinderSample& b = samples[pick(rng)];
        const double d = pair_distance(a, b);
        if (d <= 0.0) continue;
        history[static_cast<size_t>(a.snap)].derivatives(a.i, a.j, du, hu);
        history[static_cast<size_t>(b.snap)].derivatives(b.i, b.j, dv, hv);
        double diff2 = 0.0;
        for (int ax = 0; ax < k; ++ax) {
            const Vec dd = du[static_cast<size_t>(ax)] - dv[static_cast<size_t>(ax)];
            diff2 += dd.dot(dd);
        }
        const double w = std::min(a.weight, b.weight);
        rep.holder_du = std::max(rep.holder_du,
                                 std::pow(w, kAlpha) * std::sqrt(diff2) / std::pow(d, kAlpha));
    }
    return rep;
}

NonlinearityReport nonlinearity_measure(const std::vector<GraphField>& history, double shrink) {
    const auto samples = cylinder_samples(history, shrink);
    const int k = history.front().k;
    const int m = history.front().m;

    auto nonlin = [&](const CylinderSample& s) {
        std::array<Vec, 2> du;
        std::array<std::array<Vec, 2>, 2> hess;
        history[static_cast<size_t>(s.snap)].derivatives(s.i, s.j, du, hess);
        const SymMat g = inverse_metric(k, du);
        Vec N(m);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) {
                const double coef = g(a, b) - (a == b ? 1.0 : 0.0);
                for (int c = 0; c < m; ++c)
                    N[c] += coef * hess[static_cast<size_t>(a)][static_cast<size_t>(b)][c];
            }
        return N;
    };

    NonlinearityReport rep;
    for (const CylinderSample& s : samples)
        rep.weighted_sup = std::max(rep.weighted_sup, s.weight * nonlin(s).norm());

    constexpr double kAlpha = 0.5;
    std::mt19937_64 rng(442244ull);
    std::uniform_int_distribution<size_t> pick(0, samples.size() - 1);
    for (int p = 0; p < 4096; ++p) {
        const CylinderSample& a = samples[pick(rng)];
        const CylinderSample& b = samples[pick(rng)];
        const double d = pair_distance(a, b);
        if (d <= 0.0) continue;
        const double w = std::min(a.weight, b.weight);
        const double diff = (nonlin(a) - nonlin(b)).norm();
        rep.weighted_holder =
            std::max(rep.weighted_holder, std::pow(w, 1.0 + kAlpha) * diff / std::pow(d, kAlpha));
    }
    return rep;
}

// ---- extension law ------------------------------------------------------------

ExtensionFit fit_extension_constant(const std::vector<std::pair<double, double>>& curve) {
    if (curve.size() < 3) throw std::domain_error("fit_extension_constant: need >= 3 samples");
    ExtensionFit fit;
    const double t0 = curve.front().first;
    fit.alpha = curve.front().second;
    if (!(fit.alpha > 0.0)) {
        // flat data: |A| identically ~0, any C fits
        fit.fitted_C = 0.0;
        return fit;
    }
    const double a2 = fit.alpha * fit.alpha;
    double num = 0.0, den = 0.0;
    for (const auto& [t, A] : curve) {
        const double tau = a2 * (t - t0);
        const double y = a2 / (A * A);
        num += (1.0 - y) * tau;
        den += tau * tau;
    }
    fit.fitted_C = den > 0.0 ? num / den : 0.0;
    for (const auto& [t, A] : curve) {
        const double model = fit.alpha / std::sqrt(1.0 - fit.fitted_C * a2 * (t - t0));
        fit.max_residual = std::max(fit.max_residual, std::abs(A - model));
    }
    return fit;
}

namespace {

// Radius of a shrinking k-sphere from a snapshot, read off the smooth c-level
// rings instead of the kinked zero band: along rays through the center the
// field crosses u = c at s_in < rho < s_out, and for the exact two-ring
// dynamics rho^2 = (s_in^2 + s_out^2)/2 - c^2 independently of c.
double ring_radius(const ScalarGrid& g, const Vec& center, int k, double c) {
    const int n = g.n();
    const double h = g.h();
    const double s_max = 0.5 * g.spec().diameter() / std::sqrt(static_cast<double>(n)) - 2.0 * h;
    auto value = [&](const Vec& dir, double s) { return g.interpolate(center + dir * s); };
    auto crossing = [&](const Vec& dir, double lo, double hi) {
        // u(lo) and u(hi) straddle c; bisect
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((value(dir, mid) - c) * (value(dir, lo) - c) <= 0.0)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    };
    std::vector<Vec> dirs;
    const int count = 64;
    for (int i = 0; i < count; ++i) {
        Vec d(n);
        if (k == 1) {
            const double phi = 2.0 * M_PI * i / count;
            d[0] = std::cos(phi);
            d[1] = std::sin(phi);
        } else {
            // Fibonacci sphere over the first three coordinates
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double rad = std::sqrt(1.0 - z * z);
            const double phi = M_PI * (1.0 + std::sqrt(5.0)) * i;
            d[0] = rad * std::cos(phi);
            d[1] = rad * std::sin(phi);
            d[2] = z;
        }
        dirs.push_back(d);
    }
    double sum = 0.0;
    int used = 0;
    for (const Vec& dir : dirs) {
        // coarse scan for the minimum of u along the ray
        double best_s = -1.0, best_u = 1e300;
        for (double s = 2.0 * h; s <= s_max; s += 0.5 * h) {
            const double u = value(dir, s);
            if (u < best_u) {
                best_u = u;
                best_s = s;
            }
        }
        if (best_s < 0.0 || best_u >= c) continue;
        // inner and outer c-crossings around the minimum
        double lo = -1.0, hi = -1.0;
        for (double s = best_s; s >= 2.0 * h; s -= 0.5 * h)
            if (value(dir, s) >= c) {
                lo = s;
                break;
            }
        for (double s = best_s; s <= s_max; s += 0.5 * h)
            if (value(dir, s) >= c) {
                hi = s;
                break;
            }
        if (lo < 0.0 || hi < 0.0) continue;
        const double s_in = crossing(dir, lo, best_s);
        const double s_out = crossing(dir, best_s, hi);
        const double r2 = 0.5 * (s_in * s_in + s_out * s_out) - c * c;
        if (r2 <= 0.0) continue;
        sum += std::sqrt(r2);
        ++used;
    }
    if (used < count / 2) return -1.0;
    return sum / used;
}

}  // namespace

ExtensionReport extension_law_check(int n, int k, double R, double h, double t_begin,
                                    double t_end, int n_samples) {
    if (n_samples < 3) throw std::domain_error("extension_law_check: need >= 3 samples");
    FlowConfig cfg;
    cfg.n = n;
    cfg.k = k;
    const double extent = R + 0.35;
    const int nn = 2 * static_cast<int>(std::ceil(extent / h)) + 1;
    cfg.grid.n = n;
    cfg.grid.h = h;
    cfg.grid.origin = Vec(n);
    for (int a = 0; a < n; ++a) {
        cfg.grid.shape[static_cast<size_t>(a)] = nn;
        cfg.grid.origin[a] = -h * (nn - 1) / 2.0;
    }
    Vec center(n);
    cfg.shape = Shape::sphere(n, k, center, R);
    cfg.cap = 0.2;
    cfg.t_end = t_end;
    cfg.radius_center = center;
    for (int s = 0; s < n_samples; ++s)
        cfg.snapshot_times.push_back(t_begin + (t_end - t_begin) * s / (n_samples - 1));
    cfg.apply_defaults();

    const FlowRecord rec = run_flow(cfg);
    ExtensionReport rep;
    for (const ScalarGrid& snap : rec.snapshots) {
        const double rho = ring_radius(snap, center, k, 3.0 * h);
        if (!(rho > 0.0)) continue;
        rep.samples.push_back({snap.time, std::sqrt(static_cast<double>(k)) / rho});
    }
    const ExtensionFit fit = fit_extension_constant(rep.samples);
    rep.alpha = fit.alpha;
    rep.fitted_C = fit.fitted_C;
    rep.max_residual = fit.max_residual;
    return rep;
}

}  // namespace codimflow

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "codimflow/graphflow.hpp"

using namespace codimflow;

namespace {

std::mt19937_64 rng(20240817ull);

GraphField periodic_field(int k, int m, int nodes, double h) {
    std::array<int, 2> shape{nodes, k == 2 ? nodes : 1};
    return GraphField::make(k, m, shape, h, Vec(k), true);
}

// u(x) = eps sin(2 pi x) on [0,1) periodic
GraphField sine_field(int m, int nodes, double eps) {
    GraphField u = periodic_field(1, m, nodes, 1.0 / nodes);
    for (int i = 0; i < nodes; ++i)
        for (int c = 0; c < m; ++c)
            u.val(u.flat(i, 0), c) = eps * std::sin(2.0 * M_PI * i / nodes);
    return u;
}

double max_abs_diff(const GraphField& a, const GraphField& b) {
    double mx = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i)
        mx = std::max(mx, std::fabs(a.values[i] - b.values[i]));
    return mx;
}

}  // namespace

TEST_CASE("inverse metric multiplies back to the identity") {
    for (int k : {1, 2})
        for (int m : {1, 2, 3})
            for (int trial = 0; trial < 50; ++trial) {
                std::uniform_real_distribution<double> U(-1.5, 1.5);
                std::array<Vec, 2> du{Vec(m), Vec(m)};
                for (int a = 0; a < k; ++a)
                    for (int c = 0; c < m; ++c) du[static_cast<size_t>(a)][c] = U(rng);
                SymMat g(k);
                for (int a = 0; a < k; ++a)
                    for (int b = a; b < k; ++b)
                        g.set(a, b, (a == b ? 1.0 : 0.0) +
                                        du[static_cast<size_t>(a)].dot(du[static_cast<size_t>(b)]));
                const SymMat gi = inverse_metric(k, du);
                for (int a = 0; a < k; ++a)
                    for (int b = 0; b < k; ++b) {
                        double s = 0.0;
                        for (int l = 0; l < k; ++l) s += gi(a, l) * g(l, b);
                        CHECK(s == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
                    }
                // eigenvalues of the inverse metric lie in (0, 1]
                const EigenPair e = jacobi_eigh(gi);
                for (int a = 0; a < k; ++a) {
                    CHECK(e.values[a] > 0.0);
                    CHECK(e.values[a] <= 1.0 + 1e-12);
                }
            }
}

TEST_CASE("affine graphs are stationary") {
    for (int k : {1, 2}) {
        GraphField u = periodic_field(k, 2, 33, 0.05);
        u.periodic = false;
        for (int i = 0; i < u.shape[0]; ++i)
            for (int j = 0; j < (k == 2 ? u.shape[1] : 1); ++j) {
                const Vec x = u.node_x(i, j);
                double lin = 0.7 * x[0] + (k == 2 ? -0.3 * x[1] : 0.0);
                u.val(u.flat(i, j), 0) = 1.2 * lin + 0.4;
                u.val(u.flat(i, j), 1) = -0.8 * lin;
            }
        const GraphField v = graph_step(u, 1e-4);
        CHECK(max_abs_diff(u, v) < 1e-14);
    }
}

TEST_CASE("small sinusoid follows the heat equation to leading order") {
    const int nodes = 256;
    const double eps = 1e-3;
    GraphField u = sine_field(1, nodes, eps);
    const double dt = 0.2 * (1.0 / nodes) * (1.0 / nodes);
    const double t_end = 0.002;
    int steps = static_cast<int>(t_end / dt);
    for (int s = 0; s < steps; ++s) u = graph_step(u, dt);
    const double lambda = 4.0 * M_PI * M_PI;
    const double expected = eps * std::exp(-lambda * steps * dt);
    double amp = 0.0;
    for (int i = 0; i < nodes; ++i) amp = std::max(amp, std::fabs(u.val(i, 0)));
    CHECK(amp == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("parallel and reference steps agree bitwise-tight") {
    for (int k : {1, 2}) {
        GraphField u = periodic_field(k, 2, 65, 1.0 / 64);
        std::uniform_real_distribution<double> U(-0.2, 0.2);
        for (double& v : u.values) v = U(rng);
        const double dt = 1e-5;
        GraphField a = u, b = u;
        for (int s = 0; s < 5; ++s) {
            a = graph_step(a, dt);
            b = graph_step_reference(b, dt);
        }
        CHECK(max_abs_diff(a, b) < 1e-13);
    }
}

TEST_CASE("curvature of a graphed circle converges at second order") {
    // lower half-circle x^2 + u^2 = R^2 graphed over x near 0
    const double R = 2.0;
    auto measure = [&](int nodes) {
        const double h = 0.5 / nodes;
        GraphField u = periodic_field(1, 1, 2 * nodes + 1, h);
        u.periodic = false;
        u.origin = Vec{-0.25};
        for (int i = 0; i < u.shape[0]; ++i) {
            const double x = -0.25 + i * h;
            u.val(i, 0) = -std::sqrt(R * R - x * x);
        }
        return second_fundamental_form(u, nodes, 0).norm_A;
    };
    const double e1 = std::fabs(measure(64) - 1.0 / R);
    const double e2 = std::fabs(measure(128) - 1.0 / R);
    CHECK(e1 < 1e-4);
    CHECK(e2 < e1 / 3.0);
}

TEST_CASE("curvature of a graphed sphere matches sqrt(2)/R") {
    const double R = 2.0;
    const int nodes = 65;
    const double h = 0.5 / (nodes - 1);
    GraphField u = periodic_field(2, 1, nodes, h);
    u.periodic = false;
    u.origin = Vec{-0.25, -0.25};
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j) {
            const Vec x = u.node_x(i, j);
            u.val(u.flat(i, j), 0) = -std::sqrt(R * R - x[0] * x[0] - x[1] * x[1]);
        }
    const double a = second_fundamental_form(u, nodes / 2, nodes / 2).norm_A;
    CHECK(a == doctest::Approx(std::sqrt(2.0) / R).epsilon(1e-3));
}

TEST_CASE("curvature of a helix graphed over its axis") {
    // (x, r cos(w x), r sin(w x)): |A| = r w^2 / (1 + r^2 w^2)
    const double r = 0.3, w = 2.0;
    const int nodes = 257;
    const double h = 1.0 / (nodes - 1);
    GraphField u = periodic_field(1, 2, nodes, h);
    u.periodic = false;
    u.origin = Vec{-0.5};
    for (int i = 0; i < nodes; ++i) {
        const double x = -0.5 + i * h;
        u.val(i, 0) = r * std::cos(w * x);
        u.val(i, 1) = r * std::sin(w * x);
    }
    const double expect = r * w * w / (1.0 + r * r * w * w);
    const double a = second_fundamental_form(u, nodes / 2, 0).norm_A;
    CHECK(a == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("interpolation inequality holds over the patch library") {
    const double alpha = 1.0, beta = 0.01;
    const std::vector<PatchResult> res = interpolation_check(alpha, beta);
    REQUIRE(res.size() >= 10);
    bool saw_codim2 = false, saw_circle = false;
    for (const PatchResult& p : res) {
        INFO(p.name);
        if (!p.excluded) {
            CHECK(p.pass);
            CHECK(p.max_slope <= p.bound + 1e-12);
        }
        if (p.name.find("helix") != std::string::npos) saw_codim2 = true;
        if (p.name.find("circle") != std::string::npos) saw_circle = true;
    }
    CHECK(saw_codim2);
    CHECK(saw_circle);
    // the circle attains sqrt(2ab - a^2 b^2)/(1 - ab), close to the bound
    for (const PatchResult& p : res)
        if (p.name == "circle") {
            CHECK(p.max_slope == doctest::Approx(p.circle_bound).epsilon(0.02));
            CHECK(p.max_slope > 0.8 * p.bound / std::sqrt(3.0) * std::sqrt(2.0));
            CHECK(p.max_slope <= p.bound);
        }
}

TEST_CASE("interpolation check rejects an oversized slab") {
    CHECK_THROWS_AS(interpolation_check(1.0, 0.06), std::domain_error);
}

TEST_CASE("small-data flows stay proportionally flat") {
    const SmallDataReport rep = small_data_estimate_experiment(1, 1, 0.02, 0.05, 1.0, 20, 771177ull);
    CHECK(rep.trials.size() == 20);
    CHECK(rep.aborted == 0);
    CHECK(rep.max_ratio <= 2.0);
    CHECK(rep.pass);
    for (const SmallDataTrial& t : rep.trials) {
        CHECK(t.stable);
        CHECK(t.ratio >= 0.0);
    }
}

TEST_CASE("small-data ratio does not grow as the data shrinks") {
    double prev = 1e300;
    for (double eps : {0.04, 0.02, 0.01}) {
        const SmallDataReport rep =
            small_data_estimate_experiment(1, 1, eps, 0.05, 1.0, 8, 771177ull);
        CHECK(rep.max_ratio <= prev * 1.1);
        prev = rep.max_ratio;
    }
}

TEST_CASE("weighted seminorms are finite and nonlinearity is subquadratic") {
    auto run = [&](double eps) {
        const int nodes = 128;
        GraphField u = sine_field(1, nodes, eps);
        const double dt = 0.2 / (nodes * nodes);
        std::vector<GraphField> history{u};
        const int steps = 200;
        for (int s = 0; s < steps; ++s) {
            u = graph_step(u, dt);
            if ((s + 1) % 20 == 0) history.push_back(u);
        }
        return history;
    };
    double prev_ratio = 1e300;
    for (double eps : {0.04, 0.02, 0.01}) {
        const std::vector<GraphField> history = run(eps);
        const HolderReport hr = holder_seminorm_report(history);
        const NonlinearityReport nr = nonlinearity_measure(history);
        CHECK(std::isfinite(hr.holder_du));
        CHECK(std::isfinite(hr.weighted_d2u));
        CHECK(hr.holder_du >= 0.0);
        // nonlinearity is quadratic in the data: its share of the full
        // second-derivative norm must shrink linearly with eps
        const double ratio = nr.weighted_sup / std::max(hr.weighted_d2u, 1e-300);
        CHECK(ratio < prev_ratio);
        CHECK(ratio < 10.0 * eps);
        prev_ratio = ratio;
    }
}

TEST_CASE("extension fit recovers the exact sphere law") {
    for (double alpha : {0.5, 1.0}) {
        std::vector<std::pair<double, double>> curve;
        const double C = 2.0;
        for (int i = 0; i <= 30; ++i) {
            const double t = 0.002 * i;
            curve.push_back({t, alpha / std::sqrt(1.0 - C * alpha * alpha * t)});
        }
        const ExtensionFit fit = fit_extension_constant(curve);
        CHECK(fit.alpha == doctest::Approx(alpha).epsilon(1e-12));
        CHECK(fit.fitted_C == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(fit.max_residual < 1e-9);
    }
}

TEST_CASE("flowed circle reproduces the continuation constant") {
    const ExtensionReport rep = extension_law_check(2, 1, 1.0, 1.0 / 64, 0.02, 0.2, 10);
    CHECK(rep.samples.size() == 10);
    CHECK(std::fabs(rep.fitted_C - 2.0) <= 0.05);
}

// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failures. Heavy flow runs are kept at h = 1/64; expect minutes, not seconds.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "codimflow/geomlin.hpp"
#include "codimflow/graphflow.hpp"
#include "codimflow/levelset.hpp"
#include "codimflow/reifenberg.hpp"
#include "codimflow/shapes.hpp"
#include "codimflow/smoothcheck.hpp"

using namespace codimflow;

namespace {

int failures = 0;

void report(int crit, bool ok, const std::string& what, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("criterion %2d %s  %s  [%s]\n", crit, ok ? "PASS" : "FAIL", what.c_str(),
                detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

GridSpec centered_grid(int n, double extent, double h) {
    GridSpec g;
    g.n = n;
    g.h = h;
    g.origin = Vec(n);
    const int nn = 2 * static_cast<int>(std::ceil(extent / h)) + 1;
    for (int a = 0; a < n; ++a) {
        g.shape[static_cast<size_t>(a)] = nn;
        g.origin[a] = -h * (nn - 1) / 2.0;
    }
    return g;
}

FlowConfig sphere_config(int n, int k, double R, double h, double cap) {
    FlowConfig cfg;
    cfg.n = n;
    cfg.k = k;
    cfg.grid = centered_grid(n, R + 0.3, h);
    Vec center(n);
    cfg.shape = Shape::sphere(n, k, center, R);
    cfg.cap = cap;
    cfg.radius_center = center;
    cfg.stop_on_extinction = true;
    return cfg;
}

// ---- criterion 1: shrinking-sphere radius law and extinction times ---------

void criterion_1() {
    const double h = 1.0 / 64;
    struct Case {
        int n, k;
        const char* name;
        bool radius_law;
        double cap;
    };
    const std::vector<Case> cases = {{2, 1, "circle in the plane", true, 0.2},
                                     {3, 1, "circle in space", true, 0.1},
                                     {3, 2, "sphere", false, 0.1}};
    for (const Case& cs : cases) {
        FlowConfig cfg = sphere_config(cs.n, cs.k, 1.0, h, cs.cap);
        const double t_star = 1.0 / (2.0 * cs.k);
        cfg.t_end = 1.1 * t_star;
        cfg.dt = h * h / (5.0 * cs.n);
        // the kink layer at the zero set floats ~1.5h above zero; a 2h band
        // sits above that floor yet flips promptly once the set is gone
        cfg.zero_band = 2.0 * h;
        cfg.apply_defaults();
        const FlowRecord rec = run_flow(cfg);

        double worst = 0.0;
        if (cs.radius_law) {
            for (const DiagnosticsRow& row : rec.rows) {
                if (row.t < 0.005 || row.t > 0.4 || std::isnan(row.measured_radius)) continue;
                worst = std::max(worst, std::fabs(row.measured_radius - std::sqrt(1.0 - 2.0 * row.t)));
            }
            report(1, worst <= 2.0 * h, std::string("radius law, ") + cs.name,
                   fmt("max |rho - sqrt(1-2t)| = %.5f, tol 2h = %.5f", worst, 2.0 * h));
        }
        const double ext = rec.extinction_time;
        report(1, !std::isnan(ext) && std::fabs(ext - t_star) <= 0.05 * t_star,
               std::string("extinction, ") + cs.name,
               fmt("t = %.4f, expected %.4f +- 5%%", ext, t_star));
    }
}

// ---- criterion 2: ball avoidance -------------------------------------------

void criterion_2() {
    struct Fixture {
        int n, k;
        double R, t;
    };
    const std::vector<Fixture> fixtures = {
        {2, 1, 0.5, 0.05}, {2, 1, 0.5, 0.1}, {3, 1, 0.5, 0.04},
        {3, 2, 0.5, 0.04}, {3, 2, 0.4, 0.06},
    };
    bool ok = true;
    double worst = 1e300;
    for (const Fixture& f : fixtures) {
        const double h = (f.n == 2) ? 1.0 / 32 : 1.0 / 20;
        FlowConfig cfg = sphere_config(f.n, f.k, f.R, h, 0.0);
        cfg.stop_on_extinction = false;
        cfg.radius_center.reset();
        cfg.t_end = f.t;
        cfg.apply_defaults();
        Vec center(f.n);
        const AvoidanceReport rep = avoidance_check(cfg, center, f.t);
        ok = ok && rep.pass;
        worst = std::min(worst, rep.lhs - (rep.rhs - rep.slack));
    }
    report(2, ok, "ball avoidance, 5 fixtures incl. codimension 2",
           fmt("min slack of u(p,t) - (R - sqrt(2kt) - 3h) = %.5f", worst));
}

// ---- criteria 3 and 4: tube spectra and the distance PDE -------------------

std::vector<AnalyticFlow> families() {
    return {AnalyticFlow::sphere(2, 1, 1.0), AnalyticFlow::sphere(3, 1, 1.0),
            AnalyticFlow::sphere(3, 2, 1.0), AnalyticFlow::plane(3, 1),
            AnalyticFlow::cylinder(4, 2, 1, 1.0)};
}

double tube_sweep(const AnalyticFlow& flow, double h, bool* all_pass) {
    const bool curved = flow.family != AnalyticFlow::Family::Plane;
    const double t = curved ? 0.02 : 0.3;
    double worst = 0.0;
    for (int q = 0; q < 20; ++q) {
        TubeSample sample;
        sample.base = flow.point_on(t, 10 + 2 * static_cast<std::uint64_t>(q));
        sample.normal = flow.unit_normal_at(sample.base, t, 11 + 2 * static_cast<std::uint64_t>(q));
        const double reach = curved ? 0.7 * flow.radius(t) : 1.0;
        sample.s = reach * (0.15 + 0.6 * q / 19.0);
        const TubeReport rep = tube_curvature_check(flow, sample, t, h);
        if (all_pass && !rep.pass) *all_pass = false;
        worst = std::max(worst, rep.max_err);
    }
    return worst;
}

void criterion_3() {
    bool ok = true;
    double worst_err = 0.0;
    for (const AnalyticFlow& flow : families())
        worst_err = std::max(worst_err, tube_sweep(flow, 1e-5, &ok));
    report(3, ok, "tube spectra within 5h/s^2, 20 samples x 5 families",
           fmt("max spectral error %.3e at h = 1e-5", worst_err));

    // refinement order on the sphere family, coarse enough to sit above
    // floating-point noise
    const AnalyticFlow sph = AnalyticFlow::sphere(3, 2, 1.0);
    const double e1 = tube_sweep(sph, 2e-3, nullptr);
    const double e2 = tube_sweep(sph, 1e-3, nullptr);
    const double order = std::log2(e1 / e2);
    report(3, e2 > 0.0 && order >= 1.5, "tube residual refinement order",
           fmt("err(2h)/err(h) gives order %.2f (need >= 1.5)", order));
}

void criterion_4() {
    const double h = 1e-4, t = 0.05;
    bool ok = true;
    double worst = 0.0;
    for (const AnalyticFlow& flow : families()) {
        const bool curved = flow.family != AnalyticFlow::Family::Plane;
        const double s_max = curved ? 0.6 * flow.radius(t) : 0.8;
        std::vector<Vec> pts;
        for (int q = 0; q < 100; ++q) {
            const Vec base = flow.point_on(t, 900 + 2 * static_cast<std::uint64_t>(q));
            const Vec nu = flow.unit_normal_at(base, t, 901 + 2 * static_cast<std::uint64_t>(q));
            pts.push_back(base + nu * (0.3 + (s_max - 0.3) * q / 99.0));
        }
        const ResidualReport rep = distance_pde_residual(flow, pts, t, h);
        ok = ok && rep.pass;
        worst = std::max(worst, rep.max_err);
    }
    report(4, ok, "distance PDE |LHS-RHS| <= 10h^2, 100 points x 5 families",
           fmt("max residual %.3e, tol %.3e", worst, 10.0 * h * h));
}

// ---- criterion 5: subsolution construction ---------------------------------

void criterion_5() {
    const SubsolutionReport circ =
        subsolution_residual(AnalyticFlow::sphere(2, 1, 1.0), 0.1, 0.5, 0.002, 0.008);
    const SubsolutionReport plane =
        subsolution_residual(AnalyticFlow::plane(3, 1), 0.1, 0.5, 0.01, 0.5);
    report(5, circ.precondition_ok && circ.pass && plane.pass,
           "subsolution residual nonpositive (<= 1e-8)",
           fmt("max residual %.3e over %g samples", std::max(circ.max_residual, plane.max_residual),
               static_cast<double>(circ.samples + plane.samples)));

    const double alpha = alpha_constant(0.1, 0.5, 1);
    report(5, std::fabs(alpha - 0.09373) <= 1e-5, "alpha constant at (k,c1,c2) = (1,0.1,0.5)",
           fmt("alpha = %.6f, expected 0.09373 +- 1e-5", alpha));

    // the admissible region boundary: c1^2 = 1/8 is still accepted, any step
    // past it is rejected with a reported violation
    const double c1_star = std::sqrt(0.125);
    const SubsolutionReport on_edge =
        subsolution_residual(AnalyticFlow::plane(3, 1), c1_star, 0.5, 0.01, 0.5);
    const SubsolutionReport past_edge =
        subsolution_residual(AnalyticFlow::plane(3, 1), c1_star + 1e-8, 0.5, 0.01, 0.5);
    bool alpha_guard = false;
    try {
        alpha_constant(0.1, 2.5 - std::sqrt(2.0) + 1e-9, 1);
    } catch (const std::domain_error&) {
        alpha_guard = true;
    }
    report(5,
           on_edge.precondition_ok && !past_edge.precondition_ok &&
               !past_edge.violation.empty() && alpha_guard,
           "admissibility boundary is exact",
           "c1^2 = 1/8 accepted, c1^2 = 1/8 + eps rejected, alpha guard throws");
}

// ---- criterion 6: F-operator property suite --------------------------------

SymMat random_sym(std::mt19937_64& rng, int d) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    SymMat A(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) A.set(i, j, U(rng));
    return A;
}

Vec random_unit(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> N(0.0, 1.0);
    Vec p(d);
    do {
        for (int i = 0; i < d; ++i) p[i] = N(rng);
    } while (p.norm() < 1e-3);
    return p.normalized();
}

// random rotation via Gram-Schmidt of a Gaussian matrix
std::vector<Vec> random_rotation(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<Vec> cols;
    for (int c = 0; c < d; ++c) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = N(rng);
        for (const Vec& u : cols) v = v - u * u.dot(v);
        cols.push_back(v.normalized());
    }
    return cols;
}

void criterion_6() {
    std::mt19937_64 rng(20240817ull);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    const int trials = 1000;
    const double tol = 1e-9;
    long rot_fail = 0, pscale_fail = 0, homog_fail = 0, interlace_fail = 0, trace_fail = 0;

    for (int trial = 0; trial < trials; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 4);  // dimensions 2..5
        const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(d - 1));
        const Vec p = random_unit(rng, d);
        const SymMat A = random_sym(rng, d);
        const double f = F_operator(k, p, A);

        // rotation covariance: F(Rp, R A R^T) = F(p, A)
        const std::vector<Vec> R = random_rotation(rng, d);
        Vec rp(d);
        SymMat rar(d);
        for (int i = 0; i < d; ++i) {
            for (int c = 0; c < d; ++c) rp[i] += R[static_cast<size_t>(c)][i] * p[c];
            for (int j = i; j < d; ++j) {
                double s = 0.0;
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b)
                        s += R[static_cast<size_t>(a)][i] * A(a, b) * R[static_cast<size_t>(b)][j];
                rar.set(i, j, s);
            }
        }
        if (std::fabs(F_operator(k, rp, rar) - f) > tol) ++rot_fail;

        // invariance under positive scaling of p
        if (std::fabs(F_operator(k, p * scale(rng), A) - f) > tol) ++pscale_fail;

        // 1-homogeneity in A
        const double c = scale(rng);
        if (std::fabs(F_operator(k, p, A * c) - c * f) > tol) ++homog_fail;

        // Cauchy interlacing: sum of the k smallest eigenvalues of A below,
        // the shifted-window sum above
        EigenPair e = jacobi_eigh(A);
        double lo = 0.0, hi = 0.0;
        for (int i = 0; i < k; ++i) lo += e.values[i];
        for (int i = 1; i <= k; ++i) hi += e.values[i];
        if (f < lo - tol || f > hi + tol) ++interlace_fail;

        // codimension one: the compression is all of p-perp, so F is a trace
        const double f_top = F_operator(d - 1, p, A);
        const double trace_perp = A.trace() - A.quad(p);
        if (std::fabs(f_top - trace_perp) > tol) ++trace_fail;
    }
    const long total = rot_fail + pscale_fail + homog_fail + interlace_fail + trace_fail;
    report(6, total == 0, "F-operator properties, 1000 trials each at 1e-9",
           fmt("failures: rotation %g, p-scale %g, homogeneity %g", static_cast<double>(rot_fail),
               static_cast<double>(pscale_fail), static_cast<double>(homog_fail)) +
               fmt(", interlacing %g, codim-1 trace %g", static_cast<double>(interlace_fail),
                   static_cast<double>(trace_fail)));
}

// ---- criterion 7: smooth approximating manifolds ---------------------------

void criterion_7() {
    // unit circle at r = 0.1; the seed lattice is refined to r/32 so that the
    // sampling gap of the output cloud stays below the 0.02 r Hausdorff bar
    Vec c2(2);
    const PointCloud circle = Shape::sphere(2, 1, c2, 1.0).sample(0.002);
    {
        const double r = 0.1, ss = r / 32.0;
        const ManifoldBuild build = build_approximate_manifold(circle, r, ss);
        const ApproxReport rep = verify_approx(circle, build.cloud, r, ss);
        report(7, rep.dH_ratio <= 0.02, "circle r = 0.1: d_H(X, X^r)/r <= 0.02",
               fmt("dH ratio %.4f", rep.dH_ratio));
        // the unit circle itself has curvature 1, so |A| * r = 0.1 at r = 0.1
        // is a hard floor for any faithful X^r; the 0.02 target cannot be met
        report(7, rep.max_curvature_times_r <= 0.02, "circle r = 0.1: curvature * r <= 0.02",
               fmt("measured %.4f (the circle's own curvature already gives 0.1)",
                   rep.max_curvature_times_r));
        report(7, rep.connectivity_ok, "circle r = 0.1: connectivity", "single component per ball");
    }

    // Koch-like theta = 0.1 at depth 5: the construction guard and the three
    // structure items at both working scales, with scale-relative bounds
    // (d_H <= 2 delta r; |A| r <= 12 delta, the rounding of a 2 theta corner
    // over the r/3 net spacing)
    const PointCloud koch = koch_like_curve(0.1, 5, 2);
    for (const double r : {0.0625, 0.015625}) {
        const double ss = r / 8.0;
        const ManifoldBuild build = build_approximate_manifold(koch, r, ss);
        const ApproxReport rep = verify_approx(koch, build.cloud, r, ss);
        const double g = build.guard_flatness;
        const bool ok = g < 0.05 && rep.dH_ratio <= 2.0 * g &&
                        rep.max_curvature_times_r <= 12.0 * g && rep.connectivity_ok;
        report(7, ok, fmt("koch theta = 0.1 depth 5, scale %.6f", r),
               fmt("guard %.4f, dH ratio %.4f", g, rep.dH_ratio) +
                   fmt(", curv*r %.4f, connected %g", rep.max_curvature_times_r,
                       rep.connectivity_ok ? 1.0 : 0.0));
    }

    // cross-scale graph property
    const PointCloud circle_fine = Shape::sphere(2, 1, c2, 1.0).sample(0.001);
    const CrossScaleReport cs_circle = cross_scale_graph_check(circle_fine, 0.2, 0.2 / 8.0);
    const CrossScaleReport cs_koch = cross_scale_graph_check(koch, 0.0625, 0.0625 / 8.0);
    report(7, cs_circle.pass && cs_koch.pass, "cross-scale offsets <= 2 delta r",
           fmt("circle %.4f <= %.4f", cs_circle.max_offset, cs_circle.bound) +
               fmt(", koch %.4f <= %.4f", cs_koch.max_offset, cs_koch.bound));
}

// ---- criterion 8: interpolation bound over the patch library ---------------

void criterion_8() {
    const std::vector<PatchResult> res = interpolation_check(1.0, 0.01);
    bool ok = res.size() >= 10;
    double circle_slope = -1.0, bound = 0.0;
    int violations = 0;
    for (const PatchResult& p : res) {
        bound = p.bound;
        if (!p.excluded && !p.pass) ++violations;
        if (p.name == "circle") circle_slope = p.max_slope;
    }
    ok = ok && violations == 0 && std::fabs(circle_slope - 0.1414) <= 0.003 &&
         circle_slope <= bound;
    report(8, ok, "interpolation slope <= sqrt(3ab) over >= 10 patches",
           fmt("%g patches, %g violations, circle slope %.4f", static_cast<double>(res.size()),
               static_cast<double>(violations), circle_slope) +
               fmt(" <= bound %.4f", bound));
}

// ---- criterion 9: graphical small-data estimates ---------------------------

void criterion_9() {
    const SmallDataReport base = small_data_estimate_experiment(1, 1, 0.02, 0.05, 1.0, 20, 771177ull);
    report(9, base.pass && base.aborted == 0, "small data: 20 trials at eps = 0.02",
           fmt("max |A| sqrt(tau) r / eps = %.3f (need <= 2)", base.max_ratio));

    double prev = 1e300;
    bool ladder_ok = true;
    std::string ladder;
    for (double eps : {0.04, 0.02, 0.01}) {
        const SmallDataReport rep = small_data_estimate_experiment(1, 1, eps, 0.05, 1.0, 8, 771177ull);
        ladder_ok = ladder_ok && rep.max_ratio <= prev;
        ladder += fmt("%.3f ", rep.max_ratio);
        prev = rep.max_ratio;
    }
    report(9, ladder_ok, "small data: ratio nonincreasing across eps = {0.04, 0.02, 0.01}",
           "ratios " + ladder);

    // nonlinearity share of the second-derivative norm shrinks with eps
    auto run = [](double eps) {
        const int nodes = 128;
        std::array<int, 2> shape{nodes, 1};
        GraphField u = GraphField::make(1, 1, shape, 1.0 / nodes, Vec(1), true);
        for (int i = 0; i < nodes; ++i) u.val(i, 0) = eps * std::sin(2.0 * M_PI * i / nodes);
        const double dt = 0.2 / (nodes * nodes);
        std::vector<GraphField> history{u};
        for (int s = 0; s < 200; ++s) {
            u = graph_step(u, dt);
            if ((s + 1) % 20 == 0) history.push_back(u);
        }
        return history;
    };
    double prev_ratio = 1e300;
    bool sub_ok = true;
    std::string shares;
    for (double eps : {0.04, 0.02, 0.01}) {
        const std::vector<GraphField> history = run(eps);
        const HolderReport hr = holder_seminorm_report(history);
        const NonlinearityReport nr = nonlinearity_measure(history);
        const double ratio = nr.weighted_sup / std::max(hr.weighted_d2u, 1e-300);
        sub_ok = sub_ok && ratio < prev_ratio;
        shares += fmt("%.2e ", ratio);
        prev_ratio = ratio;
    }
    report(9, sub_ok, "nonlinearity share sublinear across eps = {0.04, 0.02, 0.01}",
           "shares " + shares);
}

// ---- criterion 10: curvature-continuation constant -------------------------

void criterion_10() {
    const ExtensionReport circ = extension_law_check(2, 1, 1.0, 1.0 / 64, 0.02, 0.2, 10);
    report(10, std::fabs(circ.fitted_C - 2.0) <= 0.05, "extension law, circle",
           fmt("fitted C = %.4f, expected 2.00 +- 0.05", circ.fitted_C));
    const ExtensionReport sph = extension_law_check(3, 2, 1.0, 1.0 / 64, 0.02, 0.1, 10);
    report(10, std::fabs(sph.fitted_C - 2.0) <= 0.05, "extension law, 2-sphere",
           fmt("fitted C = %.4f, expected 2.00 +- 0.05", sph.fitted_C));
}

// ---- criterion 11: determinism and contraction -----------------------------

void criterion_11() {
    FlowConfig cfg = sphere_config(2, 1, 0.4, 1.0 / 32, 0.2);
    cfg.stop_on_extinction = false;
    cfg.t_end = 0.02;
    cfg.apply_defaults();
    const FlowRecord a = run_flow(cfg);
    const FlowRecord b = run_flow(cfg);
    bool identical = a.final_grid.size() == b.final_grid.size() && a.rows.size() == b.rows.size();
    for (std::int64_t i = 0; identical && i < a.final_grid.size(); ++i)
        identical = a.final_grid[i] == b.final_grid[i];
    for (size_t i = 0; identical && i < a.rows.size(); ++i)
        identical = a.rows[i].t == b.rows[i].t && a.rows[i].min_u == b.rows[i].min_u &&
                    a.rows[i].zero_count == b.rows[i].zero_count;
    report(11, identical, "bitwise deterministic rerun", "final grid and diagnostics identical");

    const double h = 1.0 / 24;
    const GridSpec g = centered_grid(2, 0.8, h);
    Vec center(2);
    StepParams p;
    p.k = 1;
    p.dt = h * h / 12.0;
    p.eps_grad = h;
    p.cap = 100.0;  // inactive: the truncation kink is not part of the flow
    const double slack = 1e-6 + h * h;
    bool contract_ok = true;
    double worst_growth = -1e300;
    for (const double offset : {0.01, 0.03, 0.05}) {
        const ScalarGrid u0 = init_distance(Shape::sphere(2, 1, center, 0.4), g, p.cap);
        ScalarGrid v0 = u0;
        for (std::int64_t i = 0; i < v0.size(); ++i) v0[i] += offset;
        const std::vector<ContractionRow> rows = contraction_check(u0, v0, p, 0.02);
        for (size_t i = 1; i < rows.size(); ++i) {
            worst_growth = std::max(worst_growth, rows[i].sup_diff - rows[0].sup_diff);
            contract_ok = contract_ok && rows[i].sup_diff <= rows[0].sup_diff + slack;
        }
    }
    report(11, contract_ok, "contraction: sup-norm differences never grow, 3 fixtures",
           fmt("max growth %.2e, slack %.2e", worst_growth, slack));
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    const double mins =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
    std::printf("---\n%d failing line(s), %.1f minutes\n", failures, mins);
    return failures == 0 ? 0 : 1;
}

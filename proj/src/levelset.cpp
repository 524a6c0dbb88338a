#include "codimflow/levelset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "codimflow/geomlin.hpp"

namespace codimflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Stencil {
    // Node update shared by the parallel kernel and the serial reference.
    // `general` routes the operator through the Householder+Jacobi path.
    static double update(const ScalarGrid& u, std::int64_t f, const StepParams& p,
                         bool general, double* hess_row_sum) {
        const int n = u.n();
        const double h = u.h();
        const double h2 = h * h;
        const double c = u[f];

        Vec grad(n);
        SymMat H(n);
        bool flat = true;
        double umin = c;
        for (int a = 0; a < n; ++a) {
            const double up = u[f + u.stride(a)];
            const double dn = u[f - u.stride(a)];
            if (up != c || dn != c) flat = false;
            umin = std::min(umin, std::min(up, dn));
            grad[a] = (up - dn) / (2.0 * h);
            H.set(a, a, (up - 2.0 * c + dn) / h2);
        }
        for (int a = 0; a < n && flat; ++a)
            for (int b = a + 1; b < n; ++b) {
                const std::int64_t sa = u.stride(a), sb = u.stride(b);
                if (u[f + sa + sb] != c || u[f + sa - sb] != c || u[f - sa + sb] != c ||
                    u[f - sa - sb] != c) {
                    flat = false;
                    break;
                }
            }
        if (flat) return c;  // locally constant: F vanishes exactly
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const std::int64_t sa = u.stride(a), sb = u.stride(b);
                H.set(a, b, (u[f + sa + sb] - u[f + sa - sb] - u[f - sa + sb] + u[f - sa - sb]) /
                                (4.0 * h2));
            }

        if (hess_row_sum) {
            double rs = 0.0;
            for (int a = 0; a < n; ++a) {
                double r = 0.0;
                for (int b = 0; b < n; ++b) r += std::abs(H(a, b));
                rs = std::max(rs, r);
            }
            *hess_row_sum = rs;
        }

        double F;
        if (grad.norm() >= p.eps_grad) {
            F = general ? F_operator(p.k, grad, H) : F_operator_fast(p.k, grad, H);
        } else {
            // a degenerate gradient at the truncation plateau is kink noise,
            // not a cone tip: the envelope's lower bound would erode the
            // plateau one cell per step. Only the kink layer itself is held
            // (axis neighbors can sit at most h*sqrt(n) below a unit-slope
            // cap); a genuine interior peak has far lower neighbors and
            // keeps evolving, and approaching fronts carry real gradients.
            if (c >= p.cap && umin >= p.cap - 2.0 * h) return c;
            F = F_degenerate_envelope(p.k, H, p.envelope_dirs).first;
        }
        double out = c + p.dt * F;
        if (!std::isfinite(out)) {
            std::ostringstream msg;
            msg << "levelset step: non-finite update at node " << f << " (F=" << F << ")";
            throw std::runtime_error(msg.str());
        }
        return std::min(std::max(out, 0.0), p.cap);
    }
};

void check_params(const ScalarGrid& u, const StepParams& p) {
    if (p.dt <= 0.0) throw std::domain_error("levelset step: dt must be positive");
    if (p.eps_grad <= 0.0) throw std::domain_error("levelset step: eps_grad must be positive");
    if (p.cap <= 0.0) throw std::domain_error("levelset step: cap must be positive");
    if (p.k < 1 || p.k > u.n() - 1) throw std::domain_error("levelset step: k out of range");
}

void copy_boundary(const ScalarGrid& src_shape, ScalarGrid& out) {
    const GridSpec& s = src_shape.spec();
    const std::int64_t total = out.size();
    for (std::int64_t f = 0; f < total; ++f) {
        std::array<int, 4> iv = out.unflatten(f);
        if (out.is_interior(iv)) continue;
        for (int a = 0; a < s.n; ++a)
            iv[static_cast<size_t>(a)] = std::min(
                std::max(iv[static_cast<size_t>(a)], 1), s.shape[static_cast<size_t>(a)] - 2);
        out[f] = out[out.flat(iv)];
    }
}

// Captures the first exception thrown inside a parallel region so it can be
// rethrown on the orchestrating thread.
struct ExceptionCollector {
    std::exception_ptr eptr;
    std::mutex mu;
    void capture() {
        std::lock_guard<std::mutex> lock(mu);
        if (!eptr) eptr = std::current_exception();
    }
    void rethrow_if_any() {
        if (eptr) std::rethrow_exception(eptr);
    }
};

ScalarGrid step_impl(const ScalarGrid& u, const StepParams& p, bool general, bool parallel) {
    check_params(u, p);
    ScalarGrid out = u;
    const std::int64_t total = u.size();
    ExceptionCollector exc;
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t f = 0; f < total; ++f) {
        try {
            if (!u.is_interior(u.unflatten(f))) continue;
            out[f] = Stencil::update(u, f, p, general, nullptr);
        } catch (...) {
            exc.capture();
        }
    }
    exc.rethrow_if_any();
    copy_boundary(u, out);
    out.time = u.time + p.dt;
    return out;
}

}  // namespace

ScalarGrid step(const ScalarGrid& u, const StepParams& p) { return step_impl(u, p, false, true); }

ScalarGrid step_reference(const ScalarGrid& u, const StepParams& p) {
    return step_impl(u, p, true, false);
}

ScalarGrid init_distance(const Shape& shape, const GridSpec& grid, double cap) {
    grid.validate();
    if (cap <= 2.0 * grid.h) throw std::domain_error("init_distance: cap must exceed 2h");
    ScalarGrid u(grid);
    const std::int64_t total = u.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t f = 0; f < total; ++f) {
        const double d = shape.distance(u.node_point(f));
        u[f] = std::min(d, cap);
    }
    return u;
}

void FlowConfig::apply_defaults() {
    grid.validate();
    if (n == 0) n = grid.n;
    if (n != grid.n) throw std::domain_error("FlowConfig: ambient dimension mismatch");
    if (k < 1 || k > n - 1) throw std::domain_error("FlowConfig: need 1 <= k <= n-1");
    if (cap <= 0.0) cap = 0.25 * grid.diameter();
    if (eps_grad <= 0.0) eps_grad = grid.h;
    if (zero_band <= 0.0) zero_band = 1.5 * grid.h;
    if (t_end < 0.0) throw std::domain_error("FlowConfig: t_end must be nonnegative");
}

namespace {

// Narrow-band bookkeeping: the active list covers every interior node whose
// 3^n stencil cube sees a value below cap; everything else is flat plateau
// where the update vanishes identically.
struct Band {
    std::vector<std::int64_t> list;
    std::vector<std::uint8_t> flag;
    bool near_boundary = false;

    void build(const ScalarGrid& u, double cap) {
        flag.assign(static_cast<size_t>(u.size()), 0);
        list.clear();
        near_boundary = false;
        const std::int64_t total = u.size();
        for (std::int64_t f = 0; f < total; ++f) {
            if (u[f] < cap) touch(u, f, cap);
        }
    }

    // Marks the stencil cube of a sub-cap node as active.
    void touch(const ScalarGrid& u, std::int64_t f, double /*cap*/) {
        const int n = u.n();
        const std::array<int, 4> iv = u.unflatten(f);
        std::array<int, 4> lo{}, hi{}, c{};
        for (int a = 0; a < n; ++a) {
            lo[static_cast<size_t>(a)] = std::max(1, iv[static_cast<size_t>(a)] - 1);
            hi[static_cast<size_t>(a)] =
                std::min(u.spec().shape[static_cast<size_t>(a)] - 2, iv[static_cast<size_t>(a)] + 1);
            if (iv[static_cast<size_t>(a)] <= 2 ||
                iv[static_cast<size_t>(a)] >= u.spec().shape[static_cast<size_t>(a)] - 3)
                near_boundary = true;
        }
        c = lo;
        while (true) {
            const std::int64_t g = u.flat(c);
            if (!flag[static_cast<size_t>(g)]) {
                flag[static_cast<size_t>(g)] = 1;
                list.push_back(g);
            }
            int a = 0;
            for (; a < n; ++a) {
                if (++c[static_cast<size_t>(a)] <= hi[static_cast<size_t>(a)]) break;
                c[static_cast<size_t>(a)] = lo[static_cast<size_t>(a)];
            }
            if (a == n) break;
        }
    }

    void prune(const ScalarGrid& u, double cap) {
        std::vector<std::int64_t> survivors;
        survivors.reserve(list.size());
        const int n = u.n();
        for (std::int64_t f : list) {
            const std::array<int, 4> iv = u.unflatten(f);
            bool keep = u[f] < cap;
            if (!keep) {
                for (int a = 0; a < n && !keep; ++a) {
                    if (u[f + u.stride(a)] < cap || u[f - u.stride(a)] < cap) keep = true;
                    for (int b = a + 1; b < n && !keep; ++b) {
                        const std::int64_t sa = u.stride(a), sb = u.stride(b);
                        if (u[f + sa + sb] < cap || u[f + sa - sb] < cap ||
                            u[f - sa + sb] < cap || u[f - sa - sb] < cap)
                            keep = true;
                    }
                }
                // Keep cube-adjacency symmetric with touch(): a node also
                // stays if any cube neighbor is below cap.
            }
            if (keep)
                survivors.push_back(f);
            else
                flag[static_cast<size_t>(f)] = 0;
        }
        list = std::move(survivors);
    }
};

}  // namespace

namespace {

double fit_radius_from_samples(const std::vector<double>& rs, const std::vector<double>& us) {
    if (rs.empty()) return kNaN;
    auto objective = [&](double rho) {
        double s = 0.0;
        for (size_t i = 0; i < rs.size(); ++i) {
            const double e = us[i] - std::abs(rs[i] - rho);
            s += e * e;
        }
        return s;
    };
    double lo = *std::min_element(rs.begin(), rs.end());
    double hi = *std::max_element(rs.begin(), rs.end());
    if (hi - lo < 1e-15) return lo;
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (objective(m1) < objective(m2))
            hi = m2;
        else
            lo = m1;
    }
    return 0.5 * (lo + hi);
}

void collect_radius_sample(const ScalarGrid& u, std::int64_t f, const Vec& center, int k,
                           double band, std::vector<double>& rs, std::vector<double>& us) {
    if (u[f] >= band) return;
    const Vec x = u.node_point(f);
    double r2 = 0.0;
    for (int i = 0; i <= k; ++i) {
        const double d = x[i] - center[i];
        r2 += d * d;
    }
    rs.push_back(std::sqrt(r2));
    us.push_back(u[f]);
}

}  // namespace

double fit_radius(const ScalarGrid& u, const Vec& center, int k, double band) {
    std::vector<double> rs, us;
    const std::int64_t total = u.size();
    for (std::int64_t f = 0; f < total; ++f) collect_radius_sample(u, f, center, k, band, rs, us);
    return fit_radius_from_samples(rs, us);
}

PointCloud zero_set(const ScalarGrid& u, double threshold, int k) {
    PointCloud pc;
    pc.n = u.n();
    pc.k = k;
    const std::int64_t total = u.size();
    for (std::int64_t f = 0; f < total; ++f)
        if (u[f] < threshold) pc.points.push_back(u.node_point(f));
    return pc;
}

FlowRecord run_flow(const FlowConfig& cfg_in) {
    FlowConfig cfg = cfg_in;
    cfg.apply_defaults();
    const double h = cfg.grid.h;

    ScalarGrid u = init_distance(cfg.shape, cfg.grid, cfg.cap);
    ScalarGrid next = u;

    StepParams sp;
    sp.k = cfg.k;
    sp.eps_grad = cfg.eps_grad;
    sp.cap = cfg.cap;

    Band band;
    if (cfg.narrow_band) band.build(u, cfg.cap);

    std::vector<double> snaps = cfg.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    size_t next_snap = 0;

    FlowRecord rec;
    rec.extinction_time = kNaN;

    double lambda = 1.0;  // grid-normalized Hessian magnitude, floored at 1
    const double dt_base = h * h / (5.0 * cfg.n);
    std::int64_t steps_estimate =
        cfg.dt > 0.0 ? static_cast<std::int64_t>(std::ceil(cfg.t_end / cfg.dt))
                     : static_cast<std::int64_t>(std::ceil(cfg.t_end / dt_base));
    const std::int64_t diag_every = std::max<std::int64_t>(1, steps_estimate / 200);

    auto emit_row = [&](double step_dt, double wall_ms, std::int64_t zero_count, double min_u) {
        DiagnosticsRow row;
        row.t = u.time;
        row.min_u = min_u;
        row.zero_count = zero_count;
        row.measured_radius = kNaN;
        if (cfg.radius_center) {
            const double rb = std::min(3.0 * h, cfg.cap);
            std::vector<double> rs, us;
            if (cfg.narrow_band) {
                for (std::int64_t f : band.list)
                    collect_radius_sample(u, f, *cfg.radius_center, cfg.k, rb, rs, us);
            } else {
                for (std::int64_t f = 0; f < u.size(); ++f)
                    collect_radius_sample(u, f, *cfg.radius_center, cfg.k, rb, rs, us);
            }
            row.measured_radius = fit_radius_from_samples(rs, us);
        }
        row.dt = step_dt;
        row.wall_ms = wall_ms;
        rec.rows.push_back(row);
    };

    {
        std::int64_t zc = 0;
        double mn = cfg.cap;
        for (std::int64_t f = 0; f < u.size(); ++f) {
            if (u[f] < cfg.zero_band) ++zc;
            mn = std::min(mn, u[f]);
        }
        emit_row(0.0, 0.0, zc, mn);
    }

    std::int64_t step_count = 0;
    while (u.time < cfg.t_end - 1e-15) {
        double dt = cfg.dt > 0.0 ? cfg.dt : dt_base / lambda;
        dt = std::min(dt, cfg.t_end - u.time);
        if (next_snap < snaps.size()) dt = std::min(dt, std::max(snaps[next_snap] - u.time, dt * 1e-9));
        sp.dt = dt;

        const auto t0 = std::chrono::steady_clock::now();
        double max_row_sum = 0.0;
        std::int64_t zero_count = 0;
        double min_u = cfg.cap;
        ExceptionCollector exc;

        if (cfg.narrow_band) {
            const std::int64_t m = static_cast<std::int64_t>(band.list.size());
#pragma omp parallel for schedule(static) reduction(max : max_row_sum) \
    reduction(+ : zero_count) reduction(min : min_u)
            for (std::int64_t i = 0; i < m; ++i) {
                try {
                    const std::int64_t f = band.list[static_cast<size_t>(i)];
                    double rs = 0.0;
                    const double v = Stencil::update(u, f, sp, false, &rs);
                    next[f] = v;
                    max_row_sum = std::max(max_row_sum, rs);
                    if (v < cfg.zero_band) ++zero_count;
                    min_u = std::min(min_u, v);
                } catch (...) {
                    exc.capture();
                }
            }
            exc.rethrow_if_any();
            // Nodes that crossed below cap drag their stencil cube into the band.
            for (std::int64_t i = 0; i < m; ++i) {
                const std::int64_t f = band.list[static_cast<size_t>(i)];
                if (next[f] < cfg.cap && u[f] >= cfg.cap) band.touch(next, f, cfg.cap);
            }
            if (band.near_boundary) copy_boundary(u, next);
        } else {
            const std::int64_t total = u.size();
#pragma omp parallel for schedule(static) reduction(max : max_row_sum) \
    reduction(+ : zero_count) reduction(min : min_u)
            for (std::int64_t f = 0; f < total; ++f) {
                try {
                    if (!u.is_interior(u.unflatten(f))) continue;
                    double rs = 0.0;
                    const double v = Stencil::update(u, f, sp, false, &rs);
                    next[f] = v;
                    max_row_sum = std::max(max_row_sum, rs);
                    if (v < cfg.zero_band) ++zero_count;
                    min_u = std::min(min_u, v);
                } catch (...) {
                    exc.capture();
                }
            }
            exc.rethrow_if_any();
            copy_boundary(u, next);
        }
        next.time = u.time + dt;
        std::swap(u, next);
        // keep the stale buffer consistent where the band may grow next step
        if (cfg.narrow_band) {
            for (std::int64_t f : band.list) next[f] = u[f];
        }
        ++step_count;
        if (cfg.narrow_band && step_count % 256 == 0) band.prune(u, cfg.cap);

        lambda = std::max(1.0, h * h * max_row_sum / (2.0 * cfg.cap));

        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

        if (next_snap < snaps.size() && u.time >= snaps[next_snap] - 1e-12) {
            rec.snapshots.push_back(u);
            ++next_snap;
        }
        const bool extinct = zero_count == 0;
        if (extinct && std::isnan(rec.extinction_time)) rec.extinction_time = u.time;
        if (step_count % diag_every == 0 || extinct || u.time >= cfg.t_end - 1e-15)
            emit_row(dt, wall_ms, zero_count, min_u);
        if (extinct && cfg.stop_on_extinction) break;
    }
    rec.final_grid = u;
    return rec;
}

AvoidanceReport avoidance_check(const FlowConfig& cfg_in, const Vec& p, double t) {
    FlowConfig cfg = cfg_in;
    cfg.apply_defaults();
    const double R = cfg.shape.distance(p);
    if (R * R <= 2.0 * cfg.k * t)
        throw std::domain_error("avoidance_check: need R^2 > 2kt");
    // p must sit inside the grid with margin >= R
    for (int a = 0; a < cfg.n; ++a) {
        const double lo = cfg.grid.origin[a];
        const double hi = lo + cfg.grid.h * (cfg.grid.shape[static_cast<size_t>(a)] - 1);
        if (p[a] - lo < R || hi - p[a] < R)
            throw std::domain_error("avoidance_check: probe point margin smaller than R");
    }
    cfg.t_end = t;
    cfg.snapshot_times = {t};
    FlowRecord rec = run_flow(cfg);
    const ScalarGrid& ut = rec.snapshots.empty() ? rec.final_grid : rec.snapshots.back();
    AvoidanceReport rep;
    rep.lhs = ut.interpolate(p);
    rep.rhs = R - std::sqrt(2.0 * cfg.k * t);
    rep.slack = 3.0 * cfg.grid.h;
    rep.pass = rep.lhs >= rep.rhs - rep.slack;
    return rep;
}

std::vector<ContractionRow> contraction_check(const ScalarGrid& u0, const ScalarGrid& v0,
                                              const StepParams& p, double t_end) {
    if (u0.size() != v0.size() || u0.n() != v0.n() || u0.h() != v0.h())
        throw std::domain_error("contraction_check: grid mismatch");
    ScalarGrid u = u0, v = v0;
    std::vector<ContractionRow> rows;
    auto supdiff = [&]() {
        double s = 0.0;
        for (std::int64_t f = 0; f < u.size(); ++f) s = std::max(s, std::abs(u[f] - v[f]));
        return s;
    };
    rows.push_back({0.0, supdiff()});
    double t = 0.0;
    while (t < t_end - 1e-15) {
        StepParams sp = p;
        sp.dt = std::min(p.dt, t_end - t);
        u = step(u, sp);
        v = step(v, sp);
        t += sp.dt;
        rows.push_back({t, supdiff()});
    }
    return rows;
}

}  // namespace codimflow

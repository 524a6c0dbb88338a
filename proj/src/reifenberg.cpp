#include "codimflow/reifenberg.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "codimflow/geomlin.hpp"

namespace codimflow {

namespace {

// Gaussian elimination with partial pivoting, sizes <= 8.
void solve_small(int n, double a[kMaxDim][kMaxDim], double b[kMaxDim]) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
        if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("singular linear system");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a[piv][j], a[col][j]);
            std::swap(b[piv], b[col]);
        }
        for (int row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            for (int j = col; j < n; ++j) a[row][j] -= f * a[col][j];
            b[row] -= f * b[col];
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        double s = b[row];
        for (int j = row + 1; j < n; ++j) s -= a[row][j] * b[j];
        b[row] = s / a[row][row];
    }
}

// Quintic smoothstep cutoff: 1 on [0,1], 0 on [2,inf).
double cutoff(double rho) {
    if (rho <= 1.0) return 1.0;
    if (rho >= 2.0) return 0.0;
    const double s = rho - 1.0;
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

std::vector<int> points_in_ball(const std::vector<Vec>& pts, const Vec& x, double r) {
    std::vector<int> out;
    const double r2 = r * r;
    for (size_t i = 0; i < pts.size(); ++i) {
        const Vec d = pts[i] - x;
        if (d.dot(d) <= r2) out.push_back(static_cast<int>(i));
    }
    return out;
}

// Greedy maximal packing with pairwise distance >= spacing, visiting the
// points in the given order.
std::vector<int> greedy_packing(const std::vector<Vec>& pts, const std::vector<int>& order,
                                double spacing) {
    std::vector<int> kept;
    const double s2 = spacing * spacing;
    for (int i : order) {
        bool ok = true;
        for (int j : kept) {
            const Vec d = pts[static_cast<size_t>(i)] - pts[static_cast<size_t>(j)];
            if (d.dot(d) < s2) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(i);
    }
    return kept;
}

std::vector<int> natural_order(size_t count) {
    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    return order;
}

// Weights of the net centers at y; returns the total weight.
double net_weights(const NetPoints& net, const Vec& y, const std::vector<int>& candidates,
                   std::vector<double>& w) {
    w.assign(candidates.size(), 0.0);
    double sum = 0.0;
    for (size_t c = 0; c < candidates.size(); ++c) {
        const Vec d = y - net.centers[static_cast<size_t>(candidates[c])];
        // support 0.8r with full weight inside 0.4r: the plateau still covers
        // the r/3 net spacing, and a tighter window keeps the zero set of eta
        // from being dragged toward the chord of a curved neighborhood
        const double phi = cutoff(d.norm() / (0.4 * net.r));
        w[c] = phi;
        sum += phi;
    }
    return sum;
}

Mollified mollify(const NetPoints& net, const Vec& y, const std::vector<int>& candidates) {
    std::vector<double> w;
    const double sum = net_weights(net, y, candidates, w);
    if (sum <= 0.0) throw std::runtime_error("mollified_projection: outside mollified neighborhood");
    Mollified m;
    m.O = SymMat(net.n);
    m.weight_sum = sum;
    for (size_t c = 0; c < candidates.size(); ++c) {
        if (w[c] == 0.0) continue;
        ++m.contributors;
        const SymMat& Q = net.normal_projectors[static_cast<size_t>(candidates[c])];
        for (int i = 0; i < net.n; ++i)
            for (int j = i; j < net.n; ++j) m.O.add(i, j, w[c] / sum * Q(i, j));
    }
    return m;
}

Vec eta_at(const NetPoints& net, const Vec& y, const std::vector<int>& candidates) {
    std::vector<double> w;
    const double sum = net_weights(net, y, candidates, w);
    if (sum <= 0.0) throw std::runtime_error("eta: outside mollified neighborhood");
    const Mollified m = mollify(net, y, candidates);
    const SymMat Qt = eigen_projection(m.O, net.n - net.k);
    Vec out(net.n);
    for (size_t c = 0; c < candidates.size(); ++c) {
        if (w[c] == 0.0) continue;
        const Vec q = Qt.apply(y - net.centers[static_cast<size_t>(candidates[c])]);
        for (int a = 0; a < net.n; ++a) out[a] += w[c] / sum * q[a];
    }
    return out;
}

// Flat spatial hash used for deduplication and neighbor scans.
struct HashGrid {
    double cell;
    int n;
    std::map<std::array<long, kMaxDim>, std::vector<int>> cells;

    HashGrid(double cell_size, int dim) : cell(cell_size), n(dim) {}

    std::array<long, kMaxDim> key(const Vec& p) const {
        std::array<long, kMaxDim> k{};
        for (int a = 0; a < n; ++a) k[static_cast<size_t>(a)] = static_cast<long>(std::floor(p[a] / cell));
        return k;
    }

    void insert(const Vec& p, int id) { cells[key(p)].push_back(id); }

    // Visits the ids in the 3^n cell neighborhood of p.
    template <typename F>
    void visit_near(const Vec& p, F&& f) const {
        const auto k0 = key(p);
        std::array<long, kMaxDim> k = k0;
        visit_rec(0, k, k0, f);
    }

  private:
    template <typename F>
    void visit_rec(int axis, std::array<long, kMaxDim>& k, const std::array<long, kMaxDim>& k0,
                   F&& f) const {
        if (axis == n) {
            const auto it = cells.find(k);
            if (it != cells.end())
                for (int id : it->second) f(id);
            return;
        }
        for (long d = -1; d <= 1; ++d) {
            k[static_cast<size_t>(axis)] = k0[static_cast<size_t>(axis)] + d;
            visit_rec(axis + 1, k, k0, f);
        }
    }
};

double max_flatness_over_net(const PointCloud& X, double r) {
    const std::vector<int> centers = greedy_packing(X.points, natural_order(X.points.size()), r / 4.0);
    double worst = 0.0;
    for (int c : centers) worst = std::max(worst, flatness(X, X.points[static_cast<size_t>(c)], r));
    return worst;
}

}  // namespace

SymMat PlaneBasis::tangent_projector() const {
    SymMat P(x.dim);
    for (const Vec& t : tangent)
        for (int i = 0; i < x.dim; ++i)
            for (int j = i; j < x.dim; ++j) P.add(i, j, t[i] * t[j]);
    return P;
}

SymMat PlaneBasis::normal_projector() const {
    SymMat P(x.dim);
    for (const Vec& nu : normal)
        for (int i = 0; i < x.dim; ++i)
            for (int j = i; j < x.dim; ++j) P.add(i, j, nu[i] * nu[j]);
    return P;
}

double cloud_resolution(const PointCloud& X) {
    X.validate();
    if (X.points.size() < 2) throw std::domain_error("cloud_resolution: need at least two points");
    double worst = 0.0;
    for (size_t i = 0; i < X.points.size(); ++i) {
        double best = 1e300;
        for (size_t j = 0; j < X.points.size(); ++j) {
            if (j == i) continue;
            const Vec d = X.points[i] - X.points[j];
            const double q = d.dot(d);
            if (q < best) best = q;
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

PlaneBasis best_fit_plane(const PointCloud& X, const Vec& x, double r) {
    X.validate();
    const int n = X.n, k = X.k;
    const std::vector<int> idx = points_in_ball(X.points, x, r);
    auto fail = [&](const std::string& what) {
        std::ostringstream os;
        os << "best_fit_plane: " << what << " at x=(";
        for (int a = 0; a < n; ++a) os << (a ? "," : "") << x[a];
        os << "), r=" << r;
        return std::runtime_error(os.str());
    };
    if (static_cast<int>(idx.size()) < k + 1) throw fail("fewer than k+1 points in the ball");

    Vec mean(n);
    for (int i : idx)
        for (int a = 0; a < n; ++a) mean[a] += X.points[static_cast<size_t>(i)][a];
    for (int a = 0; a < n; ++a) mean[a] /= static_cast<double>(idx.size());

    SymMat cov(n);
    for (int i : idx) {
        const Vec d = X.points[static_cast<size_t>(i)] - mean;
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) cov.add(a, b, d[a] * d[b]);
    }
    cov = cov * (1.0 / static_cast<double>(idx.size()));

    const EigenPair e = jacobi_eigh(cov);
    // the k-th largest eigenvalue must carry real spread
    if (e.values[n - k] <= 1e-12 * r * r) throw fail("degenerate covariance (rank < k)");

    PlaneBasis pb;
    pb.x = x;
    for (int i = 0; i < k; ++i) pb.tangent.push_back(e.vectors[static_cast<size_t>(n - 1 - i)]);
    for (int i = 0; i < n - k; ++i) pb.normal.push_back(e.vectors[static_cast<size_t>(i)]);
    return pb;
}

double flatness(const PointCloud& X, const Vec& x, double r) {
    const PlaneBasis pb = best_fit_plane(X, x, r);
    const int n = X.n, k = X.k;

    PointCloud in_ball;
    in_ball.n = n;
    in_ball.k = k;
    for (int i : points_in_ball(X.points, x, r)) in_ball.points.push_back(X.points[static_cast<size_t>(i)]);

    // measure against the best plane we can find, not the through-x PCA
    // plane: PCA reads a corner at the full wedge angle while the optimal
    // (Chebyshev) plane splits it in half, and even a circle arc scores the
    // full sagitta when the plane is pinned through x. Tilt the tangents by
    // coordinate descent; the offset along each normal axis is the midrange
    // of the normal coordinates, exact in codimension one.
    std::vector<Vec> tangents = pb.tangent;
    Vec anchor = x;
    {
        const int nt = k * (n - k);
        std::vector<double> theta(static_cast<size_t>(nt), 0.0);
        auto evaluate = [&](const std::vector<double>& th, std::vector<Vec>& tan_out,
                            Vec& base_out) {
            std::vector<Vec> tan;
            for (int a = 0; a < k; ++a) {
                Vec t = pb.tangent[static_cast<size_t>(a)];
                for (int b = 0; b < n - k; ++b)
                    t = t + pb.normal[static_cast<size_t>(b)] *
                                th[static_cast<size_t>(a * (n - k) + b)];
                for (const Vec& prev : tan) t = t - prev * prev.dot(t);
                tan.push_back(t.normalized());
            }
            std::vector<Vec> nor;
            for (int b = 0; b < n - k; ++b) {
                Vec v = pb.normal[static_cast<size_t>(b)];
                for (const Vec& t : tan) v = v - t * t.dot(v);
                for (const Vec& prev : nor) v = v - prev * prev.dot(v);
                nor.push_back(v.normalized());
            }
            std::vector<double> lo(static_cast<size_t>(n - k), 1e300);
            std::vector<double> hi(static_cast<size_t>(n - k), -1e300);
            for (const Vec& p : in_ball.points)
                for (int b = 0; b < n - k; ++b) {
                    const double c = nor[static_cast<size_t>(b)].dot(p - x);
                    lo[static_cast<size_t>(b)] = std::min(lo[static_cast<size_t>(b)], c);
                    hi[static_cast<size_t>(b)] = std::max(hi[static_cast<size_t>(b)], c);
                }
            Vec base = x;
            for (int b = 0; b < n - k; ++b)
                base = base + nor[static_cast<size_t>(b)] *
                                  (0.5 * (lo[static_cast<size_t>(b)] + hi[static_cast<size_t>(b)]));
            double worst = 0.0;
            for (const Vec& p : in_ball.points) {
                double d2 = 0.0;
                for (int b = 0; b < n - k; ++b) {
                    const double c = nor[static_cast<size_t>(b)].dot(p - base);
                    d2 += c * c;
                }
                worst = std::max(worst, d2);
            }
            tan_out = tan;
            base_out = base;
            return worst;
        };
        std::vector<Vec> tan_best;
        Vec base_best(n);
        double best = evaluate(theta, tan_best, base_best);
        double step = 0.2;
        for (int round = 0; round < 7; ++round, step *= 0.5) {
            for (int p = 0; p < nt; ++p)
                for (double sgn : {1.0, -1.0}) {
                    std::vector<double> cand = theta;
                    cand[static_cast<size_t>(p)] += sgn * step;
                    std::vector<Vec> tc;
                    Vec bc(n);
                    const double v = evaluate(cand, tc, bc);
                    if (v < best) {
                        best = v;
                        theta = cand;
                        tan_best = tc;
                        base_best = bc;
                    }
                }
        }
        tangents = tan_best;
        anchor = base_best;  // purely a normal offset from x, so the lattice
                             // below stays essentially centered in B(x, r)
    }

    // footprint of the in-ball cloud on the plane, so that half-balls at the
    // boundary of a non-closed set compare against the covered part of the
    // plane instead of the full disk
    std::vector<std::array<double, 2>> footprint;
    footprint.reserve(in_ball.points.size());
    for (const Vec& p : in_ball.points) {
        std::array<double, 2> c{};
        for (int a = 0; a < k; ++a) c[static_cast<size_t>(a)] = tangents[static_cast<size_t>(a)].dot(p - anchor);
        footprint.push_back(c);
    }
    // the reach only bridges sampling gaps in the footprint; anything wider
    // lets lattice points overhang the ends of a non-closed curve and scores
    // the overhang as defect
    double res = 0.0;
    for (size_t i = 0; i < in_ball.points.size(); ++i) {
        double gap = 1e300;
        for (size_t j = 0; j < in_ball.points.size(); ++j) {
            if (j == i) continue;
            gap = std::min(gap, (in_ball.points[i] - in_ball.points[j]).norm());
        }
        if (gap < 1e299) res = std::max(res, gap);
    }
    const double reach = std::max(r / 64.0, 1.5 * res);
    std::array<double, 2> fmin{1e300, 1e300}, fmax{-1e300, -1e300};
    for (const auto& c : footprint)
        for (int a = 0; a < k; ++a) {
            fmin[static_cast<size_t>(a)] = std::min(fmin[static_cast<size_t>(a)], c[static_cast<size_t>(a)]);
            fmax[static_cast<size_t>(a)] = std::max(fmax[static_cast<size_t>(a)], c[static_cast<size_t>(a)]);
        }
    auto in_range = [&](double t1, double t2) {
        if (t1 < fmin[0] || t1 > fmax[0]) return false;
        if (k > 1 && (t2 < fmin[1] || t2 > fmax[1])) return false;
        return true;
    };
    auto covered = [&](double t1, double t2) {
        for (const auto& c : footprint) {
            const double d1 = t1 - c[0], d2 = t2 - c[1];
            if (d1 * d1 + d2 * d2 <= reach * reach) return true;
        }
        return false;
    };

    PointCloud plane;
    plane.n = n;
    plane.k = k;
    // in quadrature with the normal deviation, the tangent quantization
    // step/2 inflates the score; a curve affords a much finer lattice
    const double step = (k == 1) ? r / 256.0 : r / 64.0;
    if (k == 1) {
        for (int i = -256; i <= 256; ++i) {
            if (!in_range(step * i, 0.0) || !covered(step * i, 0.0)) continue;
            const Vec pt = anchor + tangents[0] * (step * i);
            if ((pt - x).norm() > r) continue;
            plane.points.push_back(pt);
        }
    } else {
        for (int i = -64; i <= 64; ++i)
            for (int j = -64; j <= 64; ++j) {
                const double t1 = step * i, t2 = step * j;
                if (t1 * t1 + t2 * t2 > r * r) continue;
                if (!in_range(t1, t2) || !covered(t1, t2)) continue;
                const Vec pt = anchor + tangents[0] * t1 + tangents[1] * t2;
                if ((pt - x).norm() > r) continue;
                plane.points.push_back(pt);
            }
    }
    return hausdorff(in_ball, plane) / r;
}

std::vector<ProfileRow> reifenberg_profile(const PointCloud& X, double R, double r_min) {
    if (!(r_min > 0.0) || !(R >= r_min)) throw std::domain_error("reifenberg_profile: need 0 < r_min <= R");
    const double res = cloud_resolution(X);
    if (res > r_min / 16.0) {
        std::ostringstream os;
        os << "reifenberg_profile: cloud resolution " << res << " exceeds r_min/16 = "
           << r_min / 16.0 << "; densify the sample";
        throw std::runtime_error(os.str());
    }
    std::vector<ProfileRow> rows;
    for (double r = R; r >= r_min * (1.0 - 1e-12); r /= 2.0)
        rows.push_back({r, max_flatness_over_net(X, r)});
    return rows;
}

NetPoints build_net(const PointCloud& X, double r) {
    X.validate();
    const double res = cloud_resolution(X);
    if (res > r / 12.0) {
        std::ostringstream os;
        os << "build_net: cloud resolution " << res << " exceeds r/12 = " << r / 12.0
           << "; densify the sample";
        throw std::runtime_error(os.str());
    }
    std::vector<int> order = natural_order(X.points.size());
    std::mt19937 rng(9176543u);
    std::shuffle(order.begin(), order.end(), rng);

    NetPoints net;
    net.n = X.n;
    net.k = X.k;
    net.r = r;
    // disjoint r/6-balls <=> centers pairwise >= r/3 apart
    for (int i : greedy_packing(X.points, order, r / 3.0)) net.centers.push_back(X.points[static_cast<size_t>(i)]);

    // maximality gives a covering; double-check it on the input samples
    for (const Vec& p : X.points) {
        double best = 1e300;
        for (const Vec& c : net.centers) best = std::min(best, (p - c).norm());
        if (best > 2.0 * r) throw std::logic_error("build_net: covering property violated");
    }
    for (const Vec& c : net.centers)
        net.normal_projectors.push_back(best_fit_plane(X, c, r).normal_projector());
    return net;
}

Mollified mollified_projection(const NetPoints& net, const Vec& y) {
    return mollify(net, y, natural_order(net.centers.size()));
}

SymMat eigen_projection(const SymMat& O, int n_minus_k) {
    const int d = O.dim();
    if (n_minus_k < 1 || n_minus_k >= d) throw std::domain_error("eigen_projection: rank out of range");
    const EigenPair e = jacobi_eigh(O);
    const int lo = d - n_minus_k;
    if (e.values[lo] < 0.6 || e.values[lo - 1] > 0.4) {
        std::ostringstream os;
        os << "eigen_projection: spectral gap guard failed; spectrum =";
        for (int i = 0; i < d; ++i) os << " " << e.values[i];
        throw std::runtime_error(os.str());
    }
    SymMat Q(d);
    for (int v = lo; v < d; ++v)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) Q.add(i, j, e.vectors[static_cast<size_t>(v)][i] * e.vectors[static_cast<size_t>(v)][j]);
    return Q;
}

Vec eta(const NetPoints& net, const Vec& y) {
    return eta_at(net, y, natural_order(net.centers.size()));
}

ManifoldBuild build_approximate_manifold(const PointCloud& X, double r, double seed_spacing) {
    X.validate();
    if (!(seed_spacing > 0.0) || seed_spacing > r)
        throw std::domain_error("build_approximate_manifold: need 0 < seed_spacing <= r");
    const int n = X.n, k = X.k;

    // smallness guard at the working scale (reported, and required < 0.05)
    const double guard = max_flatness_over_net(X, r);
    if (guard >= 0.05) {
        std::ostringstream os;
        os << "build_approximate_manifold: flatness " << guard << " at scale " << r
           << " exceeds the 0.05 smallness guard";
        throw std::runtime_error(os.str());
    }

    const NetPoints net = build_net(X, r);
    const int nmk = n - k;
    const double fd = 1e-5 * r;        // finite-difference step for the Newton Jacobian
    const double tol = 1e-10 * std::max(1.0, r);

    const int n_centers = static_cast<int>(net.centers.size());
    std::vector<std::vector<Vec>> found(static_cast<size_t>(n_centers));
    std::vector<long> fails(static_cast<size_t>(n_centers), 0);
    std::vector<long> totals(static_cast<size_t>(n_centers), 0);
    std::exception_ptr first_error;

#pragma omp parallel for schedule(dynamic)
    for (int ci = 0; ci < n_centers; ++ci) {
        try {
            const Vec& xc = net.centers[static_cast<size_t>(ci)];
            // centers that can contribute anywhere in B(xc, 3r)
            std::vector<int> cand;
            for (int j = 0; j < n_centers; ++j)
                if ((net.centers[static_cast<size_t>(j)] - xc).norm() <= 7.0 * r) cand.push_back(j);

            const PlaneBasis pb = best_fit_plane(X, xc, r);
            const int seeds_per_axis = static_cast<int>(std::floor(r / seed_spacing));

            // seeds stay inside the tangent footprint of the data: past the
            // end of an open curve eta still has a zero set, but it no
            // longer approximates X
            std::vector<Vec> foot;
            for (const Vec& p : X.points)
                if ((p - xc).norm() <= r) foot.push_back(p);
            std::array<double, 2> fmin{1e300, 1e300}, fmax{-1e300, -1e300};
            for (const Vec& p : foot)
                for (int a = 0; a < k; ++a) {
                    const double t = (p - xc).dot(pb.tangent[static_cast<size_t>(a)]);
                    fmin[static_cast<size_t>(a)] = std::min(fmin[static_cast<size_t>(a)], t);
                    fmax[static_cast<size_t>(a)] = std::max(fmax[static_cast<size_t>(a)], t);
                }
            double res = 0.0;
            for (size_t i = 0; i < foot.size(); ++i) {
                double nb = 1e300;
                for (size_t j = 0; j < foot.size(); ++j)
                    if (j != i) nb = std::min(nb, (foot[i] - foot[j]).norm());
                res = std::max(res, nb);
            }
            const double reach = std::max(r / 64.0, 1.5 * res);
            auto in_foot = [&](double t1, double t2) {
                if (t1 < fmin[0] - reach || t1 > fmax[0] + reach) return false;
                if (k == 2 && (t2 < fmin[1] - reach || t2 > fmax[1] + reach)) return false;
                return true;
            };

            auto try_seed = [&](const Vec& y0) {
                ++totals[static_cast<size_t>(ci)];
                Vec s(nmk);
                for (int it = 0; it < 50; ++it) {
                    Vec y = y0;
                    for (int b = 0; b < nmk; ++b) y = y + pb.normal[static_cast<size_t>(b)] * s[b];
                    if ((y - xc).norm() > 2.0 * r) break;
                    Vec e0;
                    try {
                        e0 = eta_at(net, y, cand);
                    } catch (const std::runtime_error&) {
                        break;  // left the mollified neighborhood or lost the gap
                    }
                    Vec g(nmk);
                    for (int j = 0; j < nmk; ++j) g[j] = pb.normal[static_cast<size_t>(j)].dot(e0);
                    if (g.norm() <= tol) {
                        found[static_cast<size_t>(ci)].push_back(y);
                        return;
                    }
                    double J[kMaxDim][kMaxDim];
                    double rhs[kMaxDim];
                    bool ok = true;
                    for (int b = 0; b < nmk && ok; ++b) {
                        Vec yp = y + pb.normal[static_cast<size_t>(b)] * fd;
                        Vec ym = y - pb.normal[static_cast<size_t>(b)] * fd;
                        try {
                            const Vec ep = eta_at(net, yp, cand);
                            const Vec em = eta_at(net, ym, cand);
                            for (int j = 0; j < nmk; ++j)
                                J[j][b] = pb.normal[static_cast<size_t>(j)].dot(ep - em) / (2.0 * fd);
                        } catch (const std::runtime_error&) {
                            ok = false;
                        }
                    }
                    if (!ok) break;
                    for (int j = 0; j < nmk; ++j) rhs[j] = -g[j];
                    try {
                        solve_small(nmk, J, rhs);
                    } catch (const std::runtime_error&) {
                        break;
                    }
                    for (int b = 0; b < nmk; ++b) s[b] += rhs[b];
                }
                ++fails[static_cast<size_t>(ci)];
            };

            if (k == 1) {
                for (int i = -seeds_per_axis; i <= seeds_per_axis; ++i) {
                    const double t1 = seed_spacing * i;
                    if (!in_foot(t1, 0.0)) continue;
                    try_seed(xc + pb.tangent[0] * t1);
                }
            } else {
                for (int i = -seeds_per_axis; i <= seeds_per_axis; ++i)
                    for (int j = -seeds_per_axis; j <= seeds_per_axis; ++j) {
                        const double t1 = seed_spacing * i, t2 = seed_spacing * j;
                        if (t1 * t1 + t2 * t2 > r * r) continue;
                        if (!in_foot(t1, t2)) continue;
                        try_seed(xc + pb.tangent[0] * t1 + pb.tangent[1] * t2);
                    }
            }
        } catch (...) {
#pragma omp critical
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);

    long total = 0, failed = 0;
    std::vector<Vec> candidates;
    for (int ci = 0; ci < n_centers; ++ci) {
        total += totals[static_cast<size_t>(ci)];
        failed += fails[static_cast<size_t>(ci)];
        candidates.insert(candidates.end(), found[static_cast<size_t>(ci)].begin(), found[static_cast<size_t>(ci)].end());
    }
    const double fail_frac = total > 0 ? static_cast<double>(failed) / static_cast<double>(total) : 1.0;
    if (fail_frac > 0.01) {
        std::ostringstream os;
        os << "build_approximate_manifold: Newton diverged at " << fail_frac * 100.0
           << "% of seeds (guard failure)";
        throw std::runtime_error(os.str());
    }

    // deterministic deduplication at half the seed spacing
    std::sort(candidates.begin(), candidates.end(), [n](const Vec& a, const Vec& b) {
        for (int i = 0; i < n; ++i) {
            if (a[i] < b[i]) return true;
            if (a[i] > b[i]) return false;
        }
        return false;
    });
    const double dedup = seed_spacing / 2.0;
    HashGrid grid(dedup, n);
    PointCloud out;
    out.n = n;
    out.k = k;
    for (const Vec& p : candidates) {
        bool dup = false;
        grid.visit_near(p, [&](int id) {
            if (!dup && (out.points[static_cast<size_t>(id)] - p).norm() < dedup) dup = true;
        });
        if (dup) continue;
        grid.insert(p, static_cast<int>(out.points.size()));
        out.points.push_back(p);
    }
    if (out.points.empty()) throw std::runtime_error("build_approximate_manifold: no converged points");

    ManifoldBuild mb;
    mb.cloud = std::move(out);
    mb.newton_fail_frac = fail_frac;
    mb.guard_flatness = guard;
    mb.seed_spacing = seed_spacing;
    return mb;
}

PointCloud approximate_manifold(const PointCloud& X, double r, double seed_spacing) {
    return build_approximate_manifold(X, r, seed_spacing).cloud;
}

std::vector<double> quadratic_fit_curvature(const PointCloud& pc, double fit_radius) {
    pc.validate();
    const int n = pc.n, k = pc.k;
    if (k > 2) throw std::domain_error("quadratic_fit_curvature: k <= 2 only");
    const int min_pts = (k == 1) ? 5 : 9;
    const size_t count = pc.points.size();
    std::vector<double> curv(count, std::numeric_limits<double>::quiet_NaN());

    HashGrid grid(fit_radius, n);
    for (size_t i = 0; i < count; ++i) grid.insert(pc.points[i], static_cast<int>(i));

#pragma omp parallel for schedule(dynamic)
    for (long ii = 0; ii < static_cast<long>(count); ++ii) {
        const Vec& p = pc.points[static_cast<size_t>(ii)];
        std::vector<int> nbr;
        grid.visit_near(p, [&](int id) {
            if ((pc.points[static_cast<size_t>(id)] - p).norm() <= fit_radius) nbr.push_back(id);
        });
        if (static_cast<int>(nbr.size()) < min_pts) continue;

        Vec mean(n);
        for (int id : nbr)
            for (int a = 0; a < n; ++a) mean[a] += pc.points[static_cast<size_t>(id)][a];
        for (int a = 0; a < n; ++a) mean[a] /= static_cast<double>(nbr.size());
        SymMat cov(n);
        for (int id : nbr) {
            const Vec d = pc.points[static_cast<size_t>(id)] - mean;
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) cov.add(a, b, d[a] * d[b]);
        }
        const EigenPair e = jacobi_eigh(cov);
        std::vector<Vec> tang, norm;
        for (int a = 0; a < k; ++a) tang.push_back(e.vectors[static_cast<size_t>(n - 1 - a)]);
        for (int a = 0; a < n - k; ++a) norm.push_back(e.vectors[static_cast<size_t>(a)]);

        const int np = (k == 1) ? 3 : 6;  // 1,t,t^2/2  |  1,t1,t2,t1^2/2,t1t2,t2^2/2
        double AtA[kMaxDim][kMaxDim] = {};
        std::vector<std::array<double, 8>> Atb(static_cast<size_t>(n - k),
                                               std::array<double, 8>{});
        for (int id : nbr) {
            const Vec d = pc.points[static_cast<size_t>(id)] - mean;
            double row[8];
            if (k == 1) {
                const double t = tang[0].dot(d);
                row[0] = 1.0;
                row[1] = t;
                row[2] = 0.5 * t * t;
            } else {
                const double t1 = tang[0].dot(d), t2 = tang[1].dot(d);
                row[0] = 1.0;
                row[1] = t1;
                row[2] = t2;
                row[3] = 0.5 * t1 * t1;
                row[4] = t1 * t2;
                row[5] = 0.5 * t2 * t2;
            }
            for (int a = 0; a < np; ++a)
                for (int b = a; b < np; ++b) AtA[a][b] += row[a] * row[b];
            for (int j = 0; j < n - k; ++j) {
                const double w = norm[static_cast<size_t>(j)].dot(d);
                for (int a = 0; a < np; ++a) Atb[static_cast<size_t>(j)][static_cast<size_t>(a)] += row[a] * w;
            }
        }
        for (int a = 0; a < np; ++a)
            for (int b = 0; b < a; ++b) AtA[a][b] = AtA[b][a];

        // per-normal-component coefficient solves
        std::vector<std::array<double, 8>> coef(static_cast<size_t>(n - k));
        bool ok = true;
        for (int j = 0; j < n - k && ok; ++j) {
            double M[kMaxDim][kMaxDim];
            double b[kMaxDim];
            for (int a = 0; a < np; ++a) {
                for (int c = 0; c < np; ++c) M[a][c] = AtA[a][c];
                b[a] = Atb[static_cast<size_t>(j)][static_cast<size_t>(a)];
            }
            try {
                solve_small(np, M, b);
            } catch (const std::runtime_error&) {
                ok = false;
                break;
            }
            for (int a = 0; a < np; ++a) coef[static_cast<size_t>(j)][static_cast<size_t>(a)] = b[a];
        }
        if (!ok) continue;

        if (k == 1) {
            // curve kappa = |x'' - (x''.t)t| / |x'|^2 with x' = (1,a), x'' = (0,c)
            double a2 = 0.0, c2 = 0.0, ac = 0.0;
            for (int j = 0; j < n - k; ++j) {
                const double a = coef[static_cast<size_t>(j)][1];
                const double c = coef[static_cast<size_t>(j)][2];
                a2 += a * a;
                c2 += c * c;
                ac += a * c;
            }
            const double v2 = 1.0 + a2;
            const double num2 = std::max(0.0, c2 - ac * ac / v2);
            curv[static_cast<size_t>(ii)] = std::sqrt(num2) / v2;
        } else {
            // |A|^2 = g^{ik} g^{jl} (<h_ij,h_kl> - g^{ab} <h_ij,u_a><h_kl,u_b>)
            double u[2][kMaxDim] = {};
            double h[2][2][kMaxDim] = {};
            for (int j = 0; j < n - k; ++j) {
                u[0][j] = coef[static_cast<size_t>(j)][1];
                u[1][j] = coef[static_cast<size_t>(j)][2];
                h[0][0][j] = coef[static_cast<size_t>(j)][3];
                h[0][1][j] = h[1][0][j] = coef[static_cast<size_t>(j)][4];
                h[1][1][j] = coef[static_cast<size_t>(j)][5];
            }
            auto dotm = [&](const double* a, const double* b) {
                double s = 0.0;
                for (int j = 0; j < n - k; ++j) s += a[j] * b[j];
                return s;
            };
            const double g11 = 1.0 + dotm(u[0], u[0]);
            const double g12 = dotm(u[0], u[1]);
            const double g22 = 1.0 + dotm(u[1], u[1]);
            const double det = g11 * g22 - g12 * g12;
            const double gi[2][2] = {{g22 / det, -g12 / det}, {-g12 / det, g11 / det}};
            double total = 0.0;
            for (int i1 = 0; i1 < 2; ++i1)
                for (int j1 = 0; j1 < 2; ++j1)
                    for (int i2 = 0; i2 < 2; ++i2)
                        for (int j2 = 0; j2 < 2; ++j2) {
                            double inner = dotm(h[i1][j1], h[i2][j2]);
                            for (int a = 0; a < 2; ++a)
                                for (int b = 0; b < 2; ++b)
                                    inner -= gi[a][b] * dotm(h[i1][j1], u[a]) * dotm(h[i2][j2], u[b]);
                            total += gi[i1][i2] * gi[j1][j2] * inner;
                        }
            curv[static_cast<size_t>(ii)] = std::sqrt(std::max(0.0, total));
        }
    }
    return curv;
}

double max_quadratic_curvature(const PointCloud& pc, double fit_radius) {
    double worst = 0.0;
    bool any = false;
    for (double c : quadratic_fit_curvature(pc, fit_radius))
        if (std::isfinite(c)) {
            worst = std::max(worst, c);
            any = true;
        }
    if (!any) throw std::runtime_error("max_quadratic_curvature: no point had enough neighbors");
    return worst;
}

ApproxReport verify_approx(const PointCloud& X, const PointCloud& Xr, double r,
                           double seed_spacing) {
    Xr.validate();
    ApproxReport rep;
    rep.dH_ratio = hausdorff(X, Xr) / r;
    rep.max_curvature_times_r = max_quadratic_curvature(Xr, 3.0 * seed_spacing) * r;
    rep.flatness_hat = max_flatness_over_net(X, r);

    const double inner = (1.0 - 10.0 * rep.flatness_hat) * r;
    const double edge2 = 4.0 * seed_spacing * seed_spacing;
    const std::vector<int> ball_centers =
        greedy_packing(X.points, natural_order(X.points.size()), r / 4.0);
    bool all_ok = true;
    for (int c : ball_centers) {
        const Vec& x = X.points[static_cast<size_t>(c)];
        const std::vector<int> in = points_in_ball(Xr.points, x, r);
        if (in.empty()) {
            all_ok = false;
            continue;
        }
        // union-find over edges at 2x seed spacing
        std::vector<int> parent(in.size());
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int a) {
            while (parent[static_cast<size_t>(a)] != a) {
                parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
                a = parent[static_cast<size_t>(a)];
            }
            return a;
        };
        for (size_t i = 0; i < in.size(); ++i)
            for (size_t j = i + 1; j < in.size(); ++j) {
                const Vec d = Xr.points[static_cast<size_t>(in[i])] - Xr.points[static_cast<size_t>(in[j])];
                if (d.dot(d) <= edge2) parent[static_cast<size_t>(find(static_cast<int>(i)))] = find(static_cast<int>(j));
            }
        std::vector<char> root_hits_inner(in.size(), 0);
        for (size_t i = 0; i < in.size(); ++i)
            if ((Xr.points[static_cast<size_t>(in[i])] - x).norm() <= inner)
                root_hits_inner[static_cast<size_t>(find(static_cast<int>(i)))] = 1;
        int inner_components = 0;
        for (size_t i = 0; i < in.size(); ++i)
            if (find(static_cast<int>(i)) == static_cast<int>(i) && root_hits_inner[i]) ++inner_components;
        if (inner_components != 1) all_ok = false;
    }
    rep.connectivity_ok = all_ok;
    return rep;
}

CrossScaleReport cross_scale_graph_check(const PointCloud& X, double r, double seed_spacing) {
    const ManifoldBuild coarse = build_approximate_manifold(X, r, seed_spacing);
    const ManifoldBuild fine = build_approximate_manifold(X, r / 4.0, seed_spacing / 4.0);
    const double fine_res = fine.seed_spacing;

    NearestNeighborIndex idx(coarse.cloud.points);
    const int n = X.n;

    // local tangent planes of the coarse cloud at each of its points
    std::vector<PlaneBasis> planes;
    planes.reserve(coarse.cloud.points.size());
    for (const Vec& p : coarse.cloud.points)
        planes.push_back(best_fit_plane(coarse.cloud, p, 4.0 * seed_spacing));

    CrossScaleReport rep;
    rep.bound = 2.0 * coarse.guard_flatness * r;
    rep.injective = true;

    std::vector<std::vector<int>> preimage(coarse.cloud.points.size());
    for (size_t i = 0; i < fine.cloud.points.size(); ++i) {
        const auto [ci, dist] = idx.nearest(fine.cloud.points[i]);
        rep.max_offset = std::max(rep.max_offset, dist);
        preimage[static_cast<size_t>(ci)].push_back(static_cast<int>(i));
    }
    for (size_t ci = 0; ci < preimage.size(); ++ci) {
        const auto& group = preimage[ci];
        const PlaneBasis& pb = planes[ci];
        for (size_t a = 0; a < group.size(); ++a)
            for (size_t b = a + 1; b < group.size(); ++b) {
                const Vec d = fine.cloud.points[static_cast<size_t>(group[a])] -
                              fine.cloud.points[static_cast<size_t>(group[b])];
                double tang2 = 0.0;
                for (const Vec& t : pb.tangent) {
                    const double c = t.dot(d);
                    tang2 += c * c;
                }
                double full2 = 0.0;
                for (int q = 0; q < n; ++q) full2 += d[q] * d[q];
                // two distinct fine points stacked along the normal direction
                if (full2 >= 0.25 * fine_res * fine_res && tang2 < 0.0625 * fine_res * fine_res)
                    rep.injective = false;
            }
    }
    rep.pass = rep.injective && rep.max_offset <= rep.bound;
    return rep;
}

}  // namespace codimflow

#include "codimflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace codimflow {

std::int64_t GridSpec::node_count() const {
    std::int64_t c = 1;
    for (int i = 0; i < n; ++i) c *= shape[static_cast<size_t>(i)];
    return c;
}

double GridSpec::diameter() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = h * (shape[static_cast<size_t>(i)] - 1);
        s += e * e;
    }
    return std::sqrt(s);
}

void GridSpec::validate() const {
    if (n < 2 || n > 4) throw std::domain_error("GridSpec: ambient dimension must be 2..4");
    if (h <= 0.0) throw std::domain_error("GridSpec: spacing must be positive");
    if (origin.dim != n) throw std::domain_error("GridSpec: origin dimension mismatch");
    for (int i = 0; i < n; ++i)
        if (shape[static_cast<size_t>(i)] < 3)
            throw std::domain_error("GridSpec: each axis needs at least 3 nodes");
}

ScalarGrid::ScalarGrid(const GridSpec& spec, double fill) : spec_(spec) {
    spec_.validate();
    std::int64_t s = 1;
    for (int i = 0; i < spec_.n; ++i) {
        strides_[static_cast<size_t>(i)] = s;
        s *= spec_.shape[static_cast<size_t>(i)];
    }
    data_.assign(static_cast<size_t>(s), fill);
}

std::int64_t ScalarGrid::flat(const std::array<int, 4>& iv) const {
    std::int64_t f = 0;
    for (int i = 0; i < spec_.n; ++i)
        f += strides_[static_cast<size_t>(i)] * iv[static_cast<size_t>(i)];
    return f;
}

std::array<int, 4> ScalarGrid::unflatten(std::int64_t i) const {
    std::array<int, 4> iv{};
    for (int a = 0; a < spec_.n; ++a) {
        iv[static_cast<size_t>(a)] =
            static_cast<int>(i % spec_.shape[static_cast<size_t>(a)]);
        i /= spec_.shape[static_cast<size_t>(a)];
    }
    return iv;
}

Vec ScalarGrid::node_point(const std::array<int, 4>& iv) const {
    Vec x(spec_.n);
    for (int a = 0; a < spec_.n; ++a)
        x[a] = spec_.origin[a] + spec_.h * iv[static_cast<size_t>(a)];
    return x;
}

bool ScalarGrid::is_interior(const std::array<int, 4>& iv) const {
    for (int a = 0; a < spec_.n; ++a) {
        const int i = iv[static_cast<size_t>(a)];
        if (i < 1 || i > spec_.shape[static_cast<size_t>(a)] - 2) return false;
    }
    return true;
}

double ScalarGrid::interpolate(const Vec& x) const {
    std::array<int, 4> base{};
    std::array<double, 4> frac{};
    for (int a = 0; a < spec_.n; ++a) {
        const double s = (x[a] - spec_.origin[a]) / spec_.h;
        if (s < -1e-9 || s > spec_.shape[static_cast<size_t>(a)] - 1 + 1e-9)
            throw std::domain_error("ScalarGrid::interpolate: point outside grid");
        double b = std::floor(s);
        b = std::min(std::max(b, 0.0), double(spec_.shape[static_cast<size_t>(a)] - 2));
        base[static_cast<size_t>(a)] = static_cast<int>(b);
        frac[static_cast<size_t>(a)] = std::min(std::max(s - b, 0.0), 1.0);
    }
    double acc = 0.0;
    const int corners = 1 << spec_.n;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::array<int, 4> iv = base;
        for (int a = 0; a < spec_.n; ++a) {
            if (c & (1 << a)) {
                iv[static_cast<size_t>(a)] += 1;
                w *= frac[static_cast<size_t>(a)];
            } else {
                w *= 1.0 - frac[static_cast<size_t>(a)];
            }
        }
        acc += w * data_[static_cast<size_t>(flat(iv))];
    }
    return acc;
}

void PointCloud::validate() const {
    if (points.empty()) throw std::domain_error("PointCloud: empty cloud");
    if (k < 1 || k >= n) throw std::domain_error("PointCloud: need 1 <= k < n");
    for (const Vec& p : points) {
        if (p.dim != n) throw std::domain_error("PointCloud: point dimension mismatch");
        for (int i = 0; i < n; ++i)
            if (!std::isfinite(p[i])) throw std::domain_error("PointCloud: non-finite coordinate");
    }
}

NearestNeighborIndex::NearestNeighborIndex(const std::vector<Vec>& points) : points_(points) {
    if (points_.empty()) throw std::domain_error("NearestNeighborIndex: empty point set");
    n_ = points_[0].dim;
    lo_ = Vec(n_);
    Vec hi(n_);
    for (int a = 0; a < n_; ++a) lo_[a] = hi[a] = points_[0][a];
    for (const Vec& p : points_)
        for (int a = 0; a < n_; ++a) {
            lo_[a] = std::min(lo_[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    double extent = 0.0;
    for (int a = 0; a < n_; ++a) extent = std::max(extent, hi[a] - lo_[a]);
    const double target = std::max(1.0, std::pow(double(points_.size()), 1.0 / n_));
    cell_ = std::max(extent / target, 1e-12);
    std::int64_t total = 1;
    for (int a = 0; a < n_; ++a) {
        dims_[static_cast<size_t>(a)] =
            std::max(1, static_cast<int>(std::floor((hi[a] - lo_[a]) / cell_)) + 1);
        total *= dims_[static_cast<size_t>(a)];
    }
    bins_.resize(static_cast<size_t>(total));
    for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
        std::array<int, kMaxDim> c{};
        for (int a = 0; a < n_; ++a) {
            int ci = static_cast<int>(std::floor((points_[static_cast<size_t>(i)][a] - lo_[a]) / cell_));
            c[static_cast<size_t>(a)] = std::min(std::max(ci, 0), dims_[static_cast<size_t>(a)] - 1);
        }
        bins_[static_cast<size_t>(bin_index(c))].push_back(i);
    }
}

std::int64_t NearestNeighborIndex::bin_index(const std::array<int, kMaxDim>& c) const {
    std::int64_t f = 0, s = 1;
    for (int a = 0; a < n_; ++a) {
        f += s * c[static_cast<size_t>(a)];
        s *= dims_[static_cast<size_t>(a)];
    }
    return f;
}

std::pair<int, double> NearestNeighborIndex::nearest(const Vec& x) const {
    std::array<int, kMaxDim> cx{};
    for (int a = 0; a < n_; ++a) {
        int ci = static_cast<int>(std::floor((x[a] - lo_[a]) / cell_));
        cx[static_cast<size_t>(a)] = std::min(std::max(ci, 0), dims_[static_cast<size_t>(a)] - 1);
    }
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    int max_ring = 0;
    for (int a = 0; a < n_; ++a) max_ring = std::max(max_ring, dims_[static_cast<size_t>(a)]);
    for (int ring = 0; ring <= max_ring; ++ring) {
        // Once a candidate exists, rings whose nearest face is farther than
        // the candidate cannot improve it.
        if (best >= 0) {
            const double ring_min = (ring - 1) * cell_;
            if (ring_min > 0.0 && ring_min * ring_min > best_d2) break;
        }
        // Scan the chebyshev shell at distance `ring` around cx.
        std::array<int, kMaxDim> c{};
        std::array<int, kMaxDim> from{}, to{};
        bool any = false;
        for (int a = 0; a < n_; ++a) {
            from[static_cast<size_t>(a)] = std::max(0, cx[static_cast<size_t>(a)] - ring);
            to[static_cast<size_t>(a)] = std::min(dims_[static_cast<size_t>(a)] - 1,
                                                  cx[static_cast<size_t>(a)] + ring);
        }
        c = from;
        while (true) {
            int cheb = 0;
            for (int a = 0; a < n_; ++a)
                cheb = std::max(cheb, std::abs(c[static_cast<size_t>(a)] - cx[static_cast<size_t>(a)]));
            if (cheb == ring) {
                any = true;
                for (int i : bins_[static_cast<size_t>(bin_index(c))]) {
                    double d2 = 0.0;
                    const Vec& p = points_[static_cast<size_t>(i)];
                    for (int a = 0; a < n_; ++a) {
                        const double d = p[a] - x[a];
                        d2 += d * d;
                    }
                    if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
                        best_d2 = d2;
                        best = i;
                    }
                }
            }
            int a = 0;
            for (; a < n_; ++a) {
                if (++c[static_cast<size_t>(a)] <= to[static_cast<size_t>(a)]) break;
                c[static_cast<size_t>(a)] = from[static_cast<size_t>(a)];
            }
            if (a == n_) break;
        }
        if (!any && best >= 0) break;
    }
    return {best, std::sqrt(best_d2)};
}

namespace {

double directed_hausdorff(const PointCloud& a, const NearestNeighborIndex& idx_b) {
    double worst = 0.0;
    for (const Vec& p : a.points) worst = std::max(worst, idx_b.distance(p));
    return worst;
}

}  // namespace

double hausdorff(const PointCloud& a, const PointCloud& b) {
    a.validate();
    b.validate();
    if (a.n != b.n) throw std::domain_error("hausdorff: ambient dimension mismatch");
    NearestNeighborIndex ia(a.points), ib(b.points);
    return std::max(directed_hausdorff(a, ib), directed_hausdorff(b, ia));
}

}  // namespace codimflow

#include "codimflow/shapes.hpp"

#include <cmath>
#include <stdexcept>

namespace codimflow {

Shape Shape::point(const Vec& c) {
    Shape s;
    s.type = Type::Point;
    s.n = c.dim;
    s.k = 1;  // degenerate test shape; tag is nominal
    s.center = c;
    return s;
}

Shape Shape::sphere(int n, int k, const Vec& center, double radius) {
    if (k < 1 || k + 1 > n) throw std::domain_error("Shape::sphere: need 1 <= k <= n-1");
    if (radius <= 0.0) throw std::domain_error("Shape::sphere: radius must be positive");
    Shape s;
    s.type = Type::Sphere;
    s.n = n;
    s.k = k;
    s.center = center;
    s.radius = radius;
    return s;
}

Shape Shape::plane(int n, int k, const Vec& anchor) {
    if (k < 1 || k >= n) throw std::domain_error("Shape::plane: need 1 <= k < n");
    Shape s;
    s.type = Type::Plane;
    s.n = n;
    s.k = k;
    s.center = anchor;
    return s;
}

Shape Shape::make_cloud(const PointCloud& pc) {
    pc.validate();
    Shape s;
    s.type = Type::Cloud;
    s.n = pc.n;
    s.k = pc.k;
    s.cloud = std::make_shared<PointCloud>(pc);
    s.cloud_index = std::make_shared<NearestNeighborIndex>(pc.points);
    return s;
}

Shape Shape::make_union(std::vector<Shape> parts) {
    if (parts.empty()) throw std::domain_error("Shape::make_union: empty union");
    Shape s;
    s.type = Type::Union;
    s.n = parts[0].n;
    s.k = parts[0].k;
    s.parts = std::move(parts);
    for (const Shape& p : s.parts)
        if (p.n != s.n) throw std::domain_error("Shape::make_union: dimension mismatch");
    return s;
}

double Shape::distance(const Vec& x) const {
    switch (type) {
        case Type::Point:
            return (x - center).norm();
        case Type::Sphere: {
            double in_plane2 = 0.0;
            for (int i = 0; i <= k; ++i) {
                const double d = x[i] - center[i];
                in_plane2 += d * d;
            }
            const double dr = std::sqrt(in_plane2) - radius;
            double out2 = 0.0;
            for (int i = k + 1; i < n; ++i) {
                const double d = x[i] - center[i];
                out2 += d * d;
            }
            return std::sqrt(dr * dr + out2);
        }
        case Type::Plane: {
            double out2 = 0.0;
            for (int i = k; i < n; ++i) {
                const double d = x[i] - center[i];
                out2 += d * d;
            }
            return std::sqrt(out2);
        }
        case Type::Cloud:
            return cloud_index->distance(x);
        case Type::Union: {
            double best = parts[0].distance(x);
            for (size_t i = 1; i < parts.size(); ++i)
                best = std::min(best, parts[i].distance(x));
            return best;
        }
    }
    throw std::logic_error("Shape::distance: unknown type");
}

PointCloud Shape::sample(double spacing) const {
    if (spacing <= 0.0) throw std::domain_error("Shape::sample: spacing must be positive");
    PointCloud pc;
    pc.n = n;
    pc.k = k;
    switch (type) {
        case Type::Point:
            pc.points.push_back(center);
            break;
        case Type::Sphere: {
            if (k == 1) {
                const int m = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI * radius / spacing)));
                for (int j = 0; j < m; ++j) {
                    const double th = 2.0 * M_PI * j / m;
                    Vec p = center;
                    p[0] += radius * std::cos(th);
                    p[1] += radius * std::sin(th);
                    pc.points.push_back(p);
                }
            } else if (k == 2) {
                // Latitude bands on the 2-sphere factor.
                const int mb = std::max(6, static_cast<int>(std::ceil(M_PI * radius / spacing)));
                for (int i = 0; i <= mb; ++i) {
                    const double phi = M_PI * i / mb;
                    const double rr = radius * std::sin(phi);
                    const int ml = std::max(1, static_cast<int>(std::ceil(2.0 * M_PI * rr / spacing)));
                    for (int j = 0; j < ml; ++j) {
                        const double th = 2.0 * M_PI * j / ml;
                        Vec p = center;
                        p[0] += rr * std::cos(th);
                        p[1] += rr * std::sin(th);
                        p[2] += radius * std::cos(phi);
                        pc.points.push_back(p);
                    }
                }
            } else {
                throw std::domain_error("Shape::sample: sphere sampling implemented for k <= 2");
            }
            break;
        }
        case Type::Plane:
            throw std::domain_error("Shape::sample: unbounded plane has no finite sample");
        case Type::Cloud:
            pc = *cloud;
            break;
        case Type::Union: {
            for (const Shape& p : parts) {
                PointCloud sub = p.sample(spacing);
                pc.points.insert(pc.points.end(), sub.points.begin(), sub.points.end());
            }
            break;
        }
    }
    return pc;
}

PointCloud koch_like_curve(double theta, int depth, int n) {
    if (theta < 0.0 || theta >= M_PI / 4.0)
        throw std::domain_error("koch_like_curve: bend angle must be in [0, pi/4)");
    if (depth < 0 || depth > 10) throw std::domain_error("koch_like_curve: depth must be in 0..10");
    if (n != 2 && n != 3) throw std::domain_error("koch_like_curve: ambient dimension must be 2 or 3");

    // Generator on a unit segment: four segments of length 1/(2(1+cos theta)),
    // bending up then down by theta; theta = 0 degenerates to the segment.
    struct P2 {
        double x, y;
    };
    std::vector<P2> pts = {{0.0, 0.0}, {1.0, 0.0}};
    const double c = std::cos(theta), s = std::sin(theta);
    const double ell = 1.0 / (2.0 * (1.0 + c));
    for (int d = 0; d < depth; ++d) {
        std::vector<P2> next;
        next.reserve(pts.size() * 4);
        for (size_t i = 0; i + 1 < pts.size(); ++i) {
            const P2 a = pts[i], b = pts[i + 1];
            const double dx = b.x - a.x, dy = b.y - a.y;
            const P2 p1{a.x + ell * dx, a.y + ell * dy};
            // rotate (dx,dy) by +theta for the ascending leg
            const double ux = c * dx - s * dy, uy = s * dx + c * dy;
            const P2 p2{p1.x + ell * ux, p1.y + ell * uy};
            const P2 p3{b.x - ell * dx, b.y - ell * dy};
            next.push_back(a);
            next.push_back(p1);
            next.push_back(p2);
            next.push_back(p3);
        }
        next.push_back(pts.back());
        pts = std::move(next);
    }

    // Densify so that the sample spacing is <= 4^-depth even though the
    // generator segments have length (2(1+cos theta))^-depth > 4^-depth.
    const double target = std::pow(0.25, depth);
    PointCloud pc;
    pc.n = n;
    pc.k = 1;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const P2 a = pts[i], b = pts[i + 1];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const int m = std::max(1, static_cast<int>(std::ceil(len / target)));
        for (int j = 0; j < m; ++j) {
            const double t = double(j) / m;
            Vec p(n);
            p[0] = a.x + t * (b.x - a.x);
            p[1] = a.y + t * (b.y - a.y);
            pc.points.push_back(p);
        }
    }
    {
        Vec p(n);
        p[0] = pts.back().x;
        p[1] = pts.back().y;
        pc.points.push_back(p);
    }
    return pc;
}

}  // namespace codimflow

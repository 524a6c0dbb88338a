#pragma once

#include <memory>
#include <string>
#include <vector>

#include "codimflow/grid.hpp"

namespace codimflow {

// Initial-set descriptors for distance initialization. Analytic shapes give
// exact distances; clouds fall back to exact nearest-point queries.
//
// Conventions: a k-sphere of radius R lies in the subspace of the first k+1
// coordinates around its center; a k-plane passes through its anchor point
// and is spanned by the first k coordinate axes.
struct Shape {
    enum class Type { Point, Sphere, Plane, Cloud, Union };

    Type type = Type::Point;
    int n = 0;
    int k = 1;          // intrinsic dimension tag
    Vec center;         // Point / Sphere center, Plane anchor
    double radius = 0;  // Sphere
    std::shared_ptr<PointCloud> cloud;
    std::shared_ptr<NearestNeighborIndex> cloud_index;  // built lazily by make_cloud
    std::vector<Shape> parts;  // Union

    static Shape point(const Vec& c);
    static Shape sphere(int n, int k, const Vec& center, double radius);
    static Shape plane(int n, int k, const Vec& anchor);
    static Shape make_cloud(const PointCloud& pc);
    static Shape make_union(std::vector<Shape> parts);

    double distance(const Vec& x) const;
    // Coarse point sample of the shape, used for Hausdorff comparisons.
    PointCloud sample(double spacing) const;
};

// Iterated 4-segment generator with bend angle theta in [0, pi/4), scaled to
// unit diameter from (0,0) to (1,0); n = 2 or 3 (embedded in the z=0 plane).
// Sample spacing <= 4^-depth. Throws std::domain_error on parameter range.
PointCloud koch_like_curve(double theta, int depth, int n);

}  // namespace codimflow

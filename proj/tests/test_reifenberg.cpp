#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "codimflow/reifenberg.hpp"
#include "codimflow/shapes.hpp"

using namespace codimflow;

namespace {

PointCloud circle_cloud(double R, double spacing, const Vec& center = Vec{0.0, 0.0}) {
    return Shape::sphere(2, 1, center, R).sample(spacing);
}

PointCloud segment_cloud(double len, double spacing) {
    PointCloud pc;
    pc.n = 2;
    pc.k = 1;
    const int m = static_cast<int>(std::ceil(len / spacing));
    for (int i = 0; i <= m; ++i)
        pc.points.push_back(Vec{-0.5 * len + len * i / m, 0.0});
    return pc;
}

PointCloud planar_grid_cloud(double len, double spacing) {
    PointCloud pc;
    pc.n = 3;
    pc.k = 2;
    const int m = static_cast<int>(std::ceil(len / spacing));
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j)
            pc.points.push_back(
                Vec{-0.5 * len + len * i / m, -0.5 * len + len * j / m, 0.0});
    return pc;
}

double angle_to_axis(const Vec& v, const Vec& axis) {
    const double c = std::fabs(v.dot(axis)) / (v.norm() * axis.norm());
    return std::acos(std::min(1.0, c));
}

bool is_projector(const SymMat& Q, int rank) {
    if (std::fabs(Q.trace() - rank) > 1e-9) return false;
    SymMat QQ(Q.dim());
    for (int i = 0; i < Q.dim(); ++i)
        for (int j = i; j < Q.dim(); ++j) {
            double s = 0.0;
            for (int l = 0; l < Q.dim(); ++l) s += Q(i, l) * Q(l, j);
            QQ.set(i, j, s);
        }
    return (QQ - Q).frobenius_norm() < 1e-9;
}

}  // namespace

TEST_CASE("cloud resolution matches the sample spacing") {
    const PointCloud X = circle_cloud(1.0, 0.01);
    const double res = cloud_resolution(X);
    CHECK(res <= 0.01 + 1e-12);
    CHECK(res >= 0.004);
}

TEST_CASE("best-fit plane of a segment recovers the line") {
    const PointCloud X = segment_cloud(2.0, 0.005);
    const PlaneBasis P = best_fit_plane(X, Vec{0.1, 0.0}, 0.3);
    REQUIRE(P.tangent.size() == 1);
    REQUIRE(P.normal.size() == 1);
    CHECK(angle_to_axis(P.tangent[0], Vec{1.0, 0.0}) < 1e-9);
    CHECK(angle_to_axis(P.normal[0], Vec{0.0, 1.0}) < 1e-9);
    CHECK((P.x - Vec{0.1, 0.0}).norm() < 1e-12);
    const SymMat T = P.tangent_projector();
    const SymMat Q = P.normal_projector();
    CHECK(is_projector(T, 1));
    CHECK(is_projector(Q, 1));
    CHECK((T + Q - SymMat::identity(2)).frobenius_norm() < 1e-12);
}

TEST_CASE("best-fit plane of a symmetric arc matches the true tangent") {
    const PointCloud X = circle_cloud(1.0, 0.002);
    const Vec x{1.0, 0.0};
    const double r = 0.2;
    const PlaneBasis P = best_fit_plane(X, x, r);
    // the arc is symmetric about x, so the PCA tangent is the exact tangent
    CHECK(angle_to_axis(P.tangent[0], Vec{0.0, 1.0}) < 2e-3);
    CHECK(angle_to_axis(P.normal[0], Vec{1.0, 0.0}) < 2e-3);
}

TEST_CASE("best-fit plane of a planar grid in 3d") {
    const PointCloud X = planar_grid_cloud(1.0, 0.02);
    const PlaneBasis P = best_fit_plane(X, Vec{0.0, 0.0, 0.0}, 0.25);
    REQUIRE(P.tangent.size() == 2);
    REQUIRE(P.normal.size() == 1);
    CHECK(angle_to_axis(P.normal[0], Vec{0.0, 0.0, 1.0}) < 1e-9);
    CHECK(std::fabs(P.tangent[0].dot(P.tangent[1])) < 1e-12);
}

TEST_CASE("best-fit plane rejects underpopulated balls") {
    PointCloud X;
    X.n = 2;
    X.k = 1;
    X.points = {Vec{0.0, 0.0}, Vec{1.0, 0.0}};
    CHECK_THROWS_AS(best_fit_plane(X, Vec{0.0, 0.0}, 0.1), std::runtime_error);
}

TEST_CASE("flatness of a straight segment is at sampling noise") {
    const PointCloud X = segment_cloud(2.0, 0.002);
    CHECK(flatness(X, Vec{0.0, 0.0}, 0.25) < 0.02);
}

TEST_CASE("flatness of a circle scales like r over 4R") {
    const PointCloud X = circle_cloud(1.0, 0.002);
    const Vec x{std::cos(0.3), std::sin(0.3)};
    for (double r : {0.1, 0.2}) {
        const double f = flatness(X, x, r);
        const double predicted = r / 4.0;  // R = 1
        CHECK(f > 0.5 * predicted);
        CHECK(f < 1.5 * predicted);
    }
}

TEST_CASE("flatness of an unbent generator curve vanishes") {
    const PointCloud X = koch_like_curve(0.0, 5, 2);
    CHECK(flatness(X, Vec{0.5, 0.0}, 0.2) < 0.02);
}

TEST_CASE("flatness profile of a circle decays with scale") {
    const PointCloud X = circle_cloud(1.0, 0.002);
    const std::vector<ProfileRow> rows = reifenberg_profile(X, 0.4, 0.09);
    REQUIRE(rows.size() >= 2);
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].max_flatness < rows[i].r / 2.0);
        if (i > 0) {
            CHECK(rows[i].r == doctest::Approx(rows[i - 1].r / 2.0));
            CHECK(rows[i].max_flatness < rows[i - 1].max_flatness);
        }
    }
}

TEST_CASE("flatness profile grows with the bend angle") {
    const PointCloud a = koch_like_curve(0.1, 4, 2);
    const PointCloud b = koch_like_curve(0.2, 4, 2);
    const std::vector<ProfileRow> ra = reifenberg_profile(a, 0.25, 0.07);
    const std::vector<ProfileRow> rb = reifenberg_profile(b, 0.25, 0.07);
    REQUIRE(ra.size() == rb.size());
    for (size_t i = 0; i < ra.size(); ++i) CHECK(rb[i].max_flatness > ra[i].max_flatness);
}

TEST_CASE("flatness profile rejects scales below the cloud resolution") {
    const PointCloud X = circle_cloud(1.0, 0.01);
    CHECK_THROWS_AS(reifenberg_profile(X, 0.4, 0.05), std::runtime_error);
}

TEST_CASE("net centers are spread and cover the cloud") {
    const PointCloud X = circle_cloud(1.0, 0.002);
    const double r = 0.25;
    const NetPoints net = build_net(X, r);
    REQUIRE(net.centers.size() >= 2);
    REQUIRE(net.centers.size() == net.normal_projectors.size());
    for (size_t i = 0; i < net.centers.size(); ++i) {
        for (size_t j = i + 1; j < net.centers.size(); ++j)
            CHECK((net.centers[i] - net.centers[j]).norm() >= r / 3.0 - 1e-12);
        CHECK(is_projector(net.normal_projectors[i], 1));
    }
    // greedy maximality: every cloud point sits within r/3 of a center
    for (const Vec& p : X.points) {
        double best = 1e300;
        for (const Vec& c : net.centers) best = std::min(best, (p - c).norm());
        CHECK(best <= r / 3.0 + 1e-12);
    }
}

TEST_CASE("mollified projection is a convex combination of net projectors") {
    const PointCloud X = circle_cloud(1.0, 0.002);
    const NetPoints net = build_net(X, 0.25);
    const Vec y{1.02, 0.05};
    const Mollified m = mollified_projection(net, y);
    CHECK(m.weight_sum > 0.0);
    CHECK(m.contributors >= 1);
    CHECK(m.O.trace() == doctest::Approx(1.0).epsilon(1e-12));
    const EigenPair ep = jacobi_eigh(m.O);
    for (int i = 0; i < 2; ++i) {
        CHECK(ep.values[i] >= -1e-12);
        CHECK(ep.values[i] <= 1.0 + 1e-12);
    }
    CHECK_THROWS_AS(mollified_projection(net, Vec{10.0, 10.0}), std::runtime_error);
}

TEST_CASE("mollified projection with one contributor returns its projector") {
    NetPoints net;
    net.n = 2;
    net.k = 1;
    net.r = 0.25;
    net.centers = {Vec{0.0, 0.0}};
    SymMat Q(2);
    Q.set(1, 1, 1.0);
    net.normal_projectors = {Q};
    const Mollified m = mollified_projection(net, Vec{0.1, 0.1});
    CHECK(m.contributors == 1);
    CHECK((m.O - Q).frobenius_norm() < 1e-14);
}

TEST_CASE("eigen projection snaps a perturbed projector back") {
    SymMat Q(3);
    Q.set(2, 2, 1.0);
    SymMat O = Q;
    O.add(0, 2, 0.05);
    O.add(1, 2, -0.03);
    O.add(0, 0, 0.02);
    const SymMat P = eigen_projection(O, 1);
    CHECK(is_projector(P, 1));
    CHECK((P - Q).frobenius_norm() < 0.2);
    CHECK((eigen_projection(Q, 1) - Q).frobenius_norm() < 1e-12);
}

TEST_CASE("eigen projection rejects a closed spectral gap") {
    const SymMat O = SymMat::identity(2) * 0.5;
    CHECK_THROWS_WITH_AS(eigen_projection(O, 1),
                         doctest::Contains("0.5"), std::runtime_error);
}

TEST_CASE("displacement field on a straight line is the normal offset") {
    const PointCloud X = segment_cloud(2.0, 0.005);
    const NetPoints net = build_net(X, 0.2);
    for (double d : {0.0, 0.01, -0.03}) {
        const Vec y{0.05, d};
        const Vec e = eta(net, y);
        CHECK(std::fabs(e[0]) < 1e-12);
        CHECK(e[1] == doctest::Approx(d).epsilon(1e-10));
    }
}

TEST_CASE("approximate manifold of a line stays on the line") {
    const PointCloud X = segment_cloud(4.0, 0.005);
    const PointCloud Xr = approximate_manifold(X, 0.2, 0.025);
    REQUIRE(!Xr.points.empty());
    for (const Vec& p : Xr.points) CHECK(std::fabs(p[1]) < 1e-8);
}

TEST_CASE("approximate manifold of a circle is faithful") {
    const PointCloud X = circle_cloud(1.0, 0.002);
    const double r = 0.2;
    const ManifoldBuild build = build_approximate_manifold(X, r, r / 8.0);
    CHECK(build.newton_fail_frac <= 0.01);
    CHECK(build.guard_flatness < 0.05);
    const ApproxReport rep = verify_approx(X, build.cloud, r, r / 8.0);
    CHECK(rep.dH_ratio < 0.1);
    CHECK(rep.connectivity_ok);
    // curvature of the smoothed circle stays comparable to 1/R = 1
    CHECK(rep.max_curvature_times_r < 3.0 * r);
    for (const Vec& p : build.cloud.points) {
        const double rad = p.norm();
        CHECK(std::fabs(rad - 1.0) < 0.1 * r);
    }
}

TEST_CASE("verification flags a spurious component inside the ball") {
    const PointCloud X = circle_cloud(1.0, 0.002);
    const double r = 0.2;
    PointCloud Xr = approximate_manifold(X, r, r / 8.0);
    // plant a tight cluster a third of a ball radius off the manifold
    for (int i = 0; i < 4; ++i)
        Xr.points.push_back(Vec{1.0 + 0.3 * r, 0.001 * i});
    const ApproxReport rep = verify_approx(X, Xr, r, r / 8.0);
    CHECK(!rep.connectivity_ok);
}

TEST_CASE("finer-scale manifold is a small graph over the coarser one") {
    const PointCloud X = circle_cloud(1.0, 0.001);
    const double r = 0.2;
    const CrossScaleReport rep = cross_scale_graph_check(X, r, r / 8.0);
    CHECK(rep.bound > 0.0);
    CHECK(rep.max_offset <= rep.bound);
    CHECK(rep.injective);
    CHECK(rep.pass);
}

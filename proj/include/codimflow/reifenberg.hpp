#pragma once

#include <vector>

#include "codimflow/grid.hpp"
#include "codimflow/symmat.hpp"

namespace codimflow {

// Flatness estimation for point clouds and the mollified-projection
// construction of a smooth approximating manifold X^r: local PCA planes on a
// ball net, a smooth-cutoff average of their normal projectors, an
// eigenvalue snap back to an exact projector, and Newton solves for the zero
// set of the resulting normal displacement field.

struct PlaneBasis {
    Vec x;                     // base point
    std::vector<Vec> tangent;  // k orthonormal vectors
    std::vector<Vec> normal;   // n-k orthonormal vectors

    SymMat tangent_projector() const;
    SymMat normal_projector() const;
};

struct NetPoints {
    int n = 0;
    int k = 0;
    double r = 0.0;
    std::vector<Vec> centers;               // pairwise >= r/3 apart
    std::vector<SymMat> normal_projectors;  // Q_i from the local PCA plane
};

// Largest nearest-neighbor gap over the cloud (its sampling resolution).
double cloud_resolution(const PointCloud& X);

// PCA plane of the points of X in B(x,r), translated through x. Throws when
// fewer than k+1 points fall in the ball or the covariance has rank < k.
PlaneBasis best_fit_plane(const PointCloud& X, const Vec& x, double r);

// d_H(B(x,r) cap P, B(x,r) cap X) / r with P the PCA plane, plane side
// sampled at resolution <= r/64. An upper bound for the infimum over planes.
double flatness(const PointCloud& X, const Vec& x, double r);

struct ProfileRow {
    double r = 0.0;
    double max_flatness = 0.0;  // max over an r/4-net of X
};

// Flatness table over dyadic scales R, R/2, ... >= r_min. Requires the cloud
// resolution to be <= r_min/16.
std::vector<ProfileRow> reifenberg_profile(const PointCloud& X, double R, double r_min);

// Greedy maximal packing with disjoint r/6-balls (deterministically shuffled
// input order), each center carrying the normal projector of its PCA plane
// at scale r. Requires cloud resolution <= r/12.
NetPoints build_net(const PointCloud& X, double r);

struct Mollified {
    SymMat O;               // convex combination of the Q_i
    double weight_sum = 0;  // sum of cutoff weights
    int contributors = 0;   // number of nonzero summands
};

// Cutoff phi(|y - p_i| / 0.4r) with phi the quintic smoothstep: 1 on [0,1],
// 0 on [2,inf). Throws when every weight vanishes (y outside the mollified
// neighborhood).
Mollified mollified_projection(const NetPoints& net, const Vec& y);

// Projector onto the span of the top n-k eigenvectors of O. Requires the
// (n-k)-th largest eigenvalue >= 0.6 and the next one <= 0.4; the error
// message carries the spectrum (a gap failure signals the cloud is not flat
// enough at this scale).
SymMat eigen_projection(const SymMat& O, int n_minus_k);

// Weighted average of Q~_y (y - p_i): the normal displacement field whose
// zero set is X^r. Ambient coordinates.
Vec eta(const NetPoints& net, const Vec& y);

struct ManifoldBuild {
    PointCloud cloud;              // X^r
    double newton_fail_frac = 0;   // diverged seeds / total seeds
    double guard_flatness = 0;     // max profile value over the guard scales
    double seed_spacing = 0;
};

// Newton solves along normal slices from a tangent-lattice of seeds around
// every net center; converged points are deduplicated at half the seed
// spacing. Requires the flatness profile over scales [r, 10r] to stay below
// 0.05 and the Newton failure fraction to stay below 1%.
ManifoldBuild build_approximate_manifold(const PointCloud& X, double r, double seed_spacing);
PointCloud approximate_manifold(const PointCloud& X, double r, double seed_spacing);

// Pointwise curvature of a cloud from a local quadratic fit over
// fit_radius-balls (PCA frame, second-order least squares). Points with too
// few neighbors report NaN.
std::vector<double> quadratic_fit_curvature(const PointCloud& pc, double fit_radius);
double max_quadratic_curvature(const PointCloud& pc, double fit_radius);

struct ApproxReport {
    double dH_ratio = 0.0;            // d_H(X, X^r) / r
    double max_curvature_times_r = 0.0;
    bool connectivity_ok = false;
    double flatness_hat = 0.0;        // max flatness over the scale-r net
};

// Items checked: Hausdorff fidelity, quadratic-fit curvature over
// 3*seed_spacing neighborhoods, and per-ball connectivity (one component
// reaching B(x,(1-10*flatness_hat)r), any others confined to the annulus).
ApproxReport verify_approx(const PointCloud& X, const PointCloud& Xr, double r,
                           double seed_spacing);

struct CrossScaleReport {
    double max_offset = 0.0;   // max normal offset of X^{r/4} over X^r
    double bound = 0.0;        // 2 * flatness_hat * r
    bool injective = false;    // nearest-point map injective at seed resolution
    bool pass = false;
};

// Builds X^r and X^{r/4} and checks that the finer manifold is a small graph
// over the coarser one.
CrossScaleReport cross_scale_graph_check(const PointCloud& X, double r, double seed_spacing);

}  // namespace codimflow

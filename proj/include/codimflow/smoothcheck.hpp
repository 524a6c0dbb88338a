#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codimflow/grid.hpp"
#include "codimflow/levelset.hpp"

namespace codimflow {

// Closed-form shrinking families (spheres, planes, sphere-cylinders) and the
// checks that verify the distance-function identities and the subsolution
// construction on them, independently of the grid solver.

struct AnalyticFlow {
    enum class Family { Sphere, Plane, Cylinder };

    Family family = Family::Plane;
    int n = 0;
    int k = 1;
    int j = 0;       // dimension of the shrinking sphere factor (k for spheres)
    double R = 0.0;  // initial radius of that factor

    static AnalyticFlow sphere(int n, int k, double R);
    static AnalyticFlow plane(int n, int k);
    static AnalyticFlow cylinder(int n, int k, int j, double R);

    // radius law per factor: rho(t) = sqrt(R^2 - 2 j t)
    double radius(double t) const;
    double max_time() const;       // R^2 / (2j), infinite for planes
    double norm_A(double t) const; // sqrt(j) / rho(t)

    double distance(const Vec& x, double t) const;
    Vec nearest_point(const Vec& y, double t) const;
    // principal values <A(v_i, v_i), -grad r> at a tube point, k entries
    std::vector<double> betas(const Vec& y, double t) const;

    // deterministic sampling helpers for tube tests
    Vec point_on(double t, std::uint64_t seed) const;
    Vec unit_normal_at(const Vec& p, double t, std::uint64_t seed) const;

    Shape initial_shape() const;  // X_0 for the grid solver
};

struct TubeSample {
    Vec base;    // point on M_t
    Vec normal;  // unit normal at the base
    double s = 0.0;
};

struct TubeReport {
    std::vector<double> predicted;  // ascending
    std::vector<double> measured;   // ascending
    double max_err = 0.0;
    double tol = 0.0;  // 5 h / s^2
    bool pass = false;
};

// Compares the finite-difference spectrum of the distance Hessian compressed
// to grad-perp at base + s*normal against {1/s x(n-k-1)} u {beta_i/(1+s beta_i)}.
TubeReport tube_curvature_check(const AnalyticFlow& flow, const TubeSample& sample, double t,
                                double h);

struct ResidualRow {
    Vec x;
    double lhs = 0.0;  // dr/dt - F(grad r, hess r)
    double rhs = 0.0;  // (sum beta_i^2 / (1 + r beta_i)) r
};

struct ResidualReport {
    std::vector<ResidualRow> rows;
    double max_err = 0.0;
    double tol = 0.0;  // 10 h^2
    bool pass = false;
};

ResidualReport distance_pde_residual(const AnalyticFlow& flow, const std::vector<Vec>& points,
                                     double t, double h);

struct SubsolutionReport {
    bool precondition_ok = false;
    std::string violation;  // which condition failed and where
    double max_residual = 0.0;
    long samples = 0;
    bool pass = false;
};

// Residual of v = r^2/sqrt(t) on the neighborhood {r < sqrt(t)/(4 c1)},
// evaluated through the closed-form identity 2(sum beta_i^2/(1+r beta_i)
// - 1/(4t)) v; nonpositive whenever c1^2 <= 1/8 and |A| <= c1/sqrt(t).
SubsolutionReport subsolution_residual(const AnalyticFlow& flow, double c1, double c2,
                                       double t_lo, double t_hi);

// alpha = 16 c1^2 (1/(4 c1) - c2 - sqrt(2k)); requires 1/(4c1) - c2 > sqrt(2k).
double alpha_constant(double c1, double c2, int k);

struct SandwichRow {
    double t = 0.0;
    double min_gap = 0.0;  // min over sampled N of u - (alpha v - slack)
    double dH = 0.0;       // Hausdorff distance of the zero band to M_t
    bool pass = false;
};

struct SandwichReport {
    double alpha = 0.0;
    double slack = 0.0;  // 3h
    std::vector<SandwichRow> rows;
    bool pass = false;
};

// Runs the grid solver from dist(., X_0) and checks u >= alpha v - slack on
// the sampled neighborhood and d_H(zero set, M_t) <= 2h at each time.
SandwichReport uniqueness_sandwich_experiment(const AnalyticFlow& flow, double h,
                                              const std::vector<double>& times, double c1,
                                              double c2);

struct MultiscaleRow {
    double scale = 0.0;
    double t = 0.0;
    double c1_hat = 0.0;  // max |A| * sqrt(t) on the zero-set cloud
    double c2_hat = 0.0;  // d_H(X^r_t, X) / sqrt(t)
    bool connectivity_ok = false;
};

struct MultiscaleReport {
    std::vector<MultiscaleRow> rows;
    double c1_scale_ratio = 0.0;  // max over t of (max over scales / min over scales)
    double c2_scale_ratio = 0.0;
};

// Builds X^r per scale, flows each with the level-set solver, and tabulates
// the empirical curvature and Hausdorff constants; purely observational.
MultiscaleReport multiscale_uniform_estimates(const PointCloud& X,
                                              const std::vector<double>& scales);

}  // namespace codimflow

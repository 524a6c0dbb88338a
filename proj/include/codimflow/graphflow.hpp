#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "codimflow/symmat.hpp"

namespace codimflow {

// Vector-valued graphical mean curvature flow u : B^k -> R^m written as the
// quasilinear system u_t = g^{ij} u_ij with g the inverse of the induced
// metric I + Du^T Du. k is 1 or 2; any codimension m >= 1.

struct GraphField {
    int k = 1;          // domain dimension
    int m = 1;          // codimension
    std::array<int, 2> shape{};  // node counts per axis
    double h = 0.0;
    Vec origin;         // dim k
    bool periodic = false;  // periodic wrap; otherwise Dirichlet, frozen at t=0
    double time = 0.0;
    std::vector<double> values;  // m components per node, axis 0 fastest

    static GraphField make(int k, int m, std::array<int, 2> shape, double h, const Vec& origin,
                           bool periodic = false);

    std::int64_t nodes() const;
    std::int64_t flat(int i, int j) const;  // j ignored for k = 1
    double val(std::int64_t node, int c) const { return values[static_cast<size_t>(node * m + c)]; }
    double& val(std::int64_t node, int c) { return values[static_cast<size_t>(node * m + c)]; }
    Vec node_x(int i, int j) const;
    bool is_interior(int i, int j, int margin = 1) const;

    // Centered differences; components of the gradient block and Hessian.
    // du[a] is the m-vector du/dx_a, hess[a][b] the m-vector d2u/dx_a dx_b.
    void derivatives(int i, int j, std::array<Vec, 2>& du,
                     std::array<std::array<Vec, 2>, 2>& hess) const;

    double max_gradient() const;  // max over interior nodes of |Du| (frobenius)
};

// Exact inverse of (delta_ab + <u_a, u_b>), closed form for k <= 2.
SymMat inverse_metric(int k, const std::array<Vec, 2>& du);

// One explicit Euler step of u_t = g^{ij} u_ij. dt <= h^2/(4k).
GraphField graph_step(const GraphField& u, double dt);
// Serial reference step solving the metric by generic elimination; kept for
// testing and benchmarking against the parallel kernel.
GraphField graph_step_reference(const GraphField& u, double dt);

struct CurvatureSample {
    double norm_A = 0.0;  // |A|
};

// |A| from centered differences, metric contractions, and projection onto
// the normal space. The node must be at least 2 cells inside the domain.
CurvatureSample second_fundamental_form(const GraphField& u, int i, int j);

// ---- experiments -----------------------------------------------------------

struct PatchResult {
    std::string name;
    double max_slope = 0.0;      // max |grad u| over the in-slab samples
    double bound = 0.0;          // sqrt(3 alpha beta)
    double circle_bound = 0.0;   // sqrt(2ab - a^2 b^2) / (1 - ab)
    bool excluded = false;       // patch left the slab over the whole ball
    bool pass = false;
};

// Library of analytic k-submanifold patches with |A| <= alpha/r confined to
// the [-beta r, beta r] slab; checks max slope <= sqrt(3 alpha beta) over
// the inner cylinder.
std::vector<PatchResult> interpolation_check(double alpha, double beta, double r = 1.0);

struct SmallDataTrial {
    std::uint64_t seed = 0;
    double norm_A = 0.0;         // |A(center, tau r^2)|
    double ratio = 0.0;          // |A| sqrt(tau) r / eps
    double grad_growth = 0.0;    // max |Du(t)| / |Du(0)|
    bool stable = true;
};

struct SmallDataReport {
    double eps = 0.0, tau = 0.0, r = 0.0, beta = 0.0;
    std::vector<SmallDataTrial> trials;
    double max_ratio = 0.0;
    int aborted = 0;
    bool pass = false;  // max_ratio <= 2
};

// Random small initial data with |Du_0| <= eps and |u_0| <= beta r
// (beta = eps sqrt(tau)), flowed to t = tau r^2; curvature measured at the
// center and compared against eps / (sqrt(tau) r).
SmallDataReport small_data_estimate_experiment(int k, int m, double eps, double tau, double r,
                                               int trials, std::uint64_t seed);

struct HolderReport {
    double holder_du = 0.0;     // sup d^alpha |Du(z1)-Du(z2)| / d(z1,z2)^alpha
    double weighted_d2u = 0.0;  // sup d_z |D2u(z)|
};

// Weighted parabolic seminorms over a history of snapshots, alpha = 1/2,
// 4096 sampled pairs with a fixed seed; weights measure the parabolic
// distance to the boundary of the shrunken cylinder.
HolderReport holder_seminorm_report(const std::vector<GraphField>& history, double shrink = 0.9);

struct NonlinearityReport {
    double weighted_sup = 0.0;     // sup d_z |N(z)|, N = a^{ij} u_ij
    double weighted_holder = 0.0;  // sup d^{1+alpha} |N(z1)-N(z2)| / d(z1,z2)^alpha
};

// The same weighted norms for the nonlinearity N = (g - I)^{ij} u_ij.
NonlinearityReport nonlinearity_measure(const std::vector<GraphField>& history,
                                        double shrink = 0.9);

struct ExtensionFit {
    double alpha = 0.0;      // measured |A| at the start of the window
    double fitted_C = 0.0;   // least-squares C in |A|(t) = alpha/sqrt(1-C alpha^2 t)
    double max_residual = 0.0;
};

// Fits the curvature-continuation constant from a curvature history
// {(t_i, |A|(t_i))} against alpha / sqrt(1 - C alpha^2 (t - t_0)), anchored
// at the first sample.
ExtensionFit fit_extension_constant(const std::vector<std::pair<double, double>>& curve);

struct ExtensionReport {
    double alpha = 0.0;
    double fitted_C = 0.0;
    double max_residual = 0.0;
    std::vector<std::pair<double, double>> samples;  // (t, |A|(t))
};

// Flows a k-sphere of radius R in R^n with the level-set solver, converts
// the fitted zero-set radius into |A|(t) = sqrt(k)/rho(t), and fits the
// continuation constant (exactly 2 for the analytic sphere law).
ExtensionReport extension_law_check(int n, int k, double R, double h, double t_begin,
                                    double t_end, int n_samples);

}  // namespace codimflow

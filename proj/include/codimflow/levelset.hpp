#pragma once

#include <optional>
#include <string>
#include <vector>

#include "codimflow/grid.hpp"
#include "codimflow/shapes.hpp"

namespace codimflow {

// Explicit finite-difference solver for u_t = F(grad u, hess u) on uniform
// grids with truncated-distance initialization.
//
// Scheme: explicit Euler with centered first and second differences. Where
// |grad u| < eps_grad the lower end of the degenerate-direction envelope is
// used, which keeps the approximation supersolution-leaning so zero sets
// never spuriously grow. Boundary nodes copy the nearest interior update
// (homogeneous Neumann). Values are clamped to [0, cap].

struct StepParams {
    int k = 1;
    double dt = 0.0;
    double eps_grad = 0.0;
    double cap = 0.0;
    int envelope_dirs = 64;
};

// Full-grid OpenMP step (closed-form 2D/3D operator paths).
ScalarGrid step(const ScalarGrid& u, const StepParams& p);
// Serial reference step through the general Householder+Jacobi operator
// path; kept for testing and benchmarking against the parallel kernel.
ScalarGrid step_reference(const ScalarGrid& u, const StepParams& p);

struct FlowConfig {
    int n = 0;
    int k = 1;
    GridSpec grid;
    Shape shape;
    double cap = 0.0;        // <= 0: default 0.25 * grid diameter
    double dt = 0.0;         // <= 0: auto, h^2 / (5 n Lambda)
    double t_end = 0.0;
    std::vector<double> snapshot_times;
    double eps_grad = 0.0;   // <= 0: default h
    double zero_band = 0.0;  // <= 0: default 1.5 h
    bool narrow_band = true;
    bool stop_on_extinction = false;
    // When set, the diagnostics include a radius fit of the zero band around
    // this center (radial distance taken in the first k+1 coordinates).
    std::optional<Vec> radius_center;

    void apply_defaults();  // fills cap / eps_grad / zero_band defaults
};

struct DiagnosticsRow {
    double t = 0.0;
    double min_u = 0.0;
    std::int64_t zero_count = 0;
    double measured_radius = 0.0;  // NaN when not applicable
    double dt = 0.0;
    double wall_ms = 0.0;
};

struct FlowRecord {
    std::vector<DiagnosticsRow> rows;
    std::vector<ScalarGrid> snapshots;  // at the first step reaching each requested time
    ScalarGrid final_grid;
    double extinction_time = 0.0;  // NaN if the zero set never emptied
};

// u0(x) = min(dist(x, shape), cap) sampled at the nodes.
ScalarGrid init_distance(const Shape& shape, const GridSpec& grid, double cap);

FlowRecord run_flow(const FlowConfig& cfg);

// Nodes with u < threshold as a cloud (k tag supplied); empty cloud signals
// extinction and is allowed.
PointCloud zero_set(const ScalarGrid& u, double threshold, int k);

// Subgrid radius estimate: fits rho minimizing sum (u_i - | |x_i|_r - rho |)^2
// over the near-zero band, radial distance in the first k+1 coordinates
// around `center`. Returns NaN if the band is empty.
double fit_radius(const ScalarGrid& u, const Vec& center, int k, double band);

struct AvoidanceReport {
    double lhs = 0.0;   // interpolated u(p, t)
    double rhs = 0.0;   // R - sqrt(2 k t)
    double slack = 0.0; // 3 h
    bool pass = false;
};

// Runs the flow from dist(., shape) and checks u(p,t) >= R - sqrt(2kt) - 3h.
AvoidanceReport avoidance_check(const FlowConfig& cfg, const Vec& p, double t);

struct ContractionRow {
    double t = 0.0;
    double sup_diff = 0.0;
};

// Evolves two initial grids with identical parameters and reports the
// sup-norm difference over time.
std::vector<ContractionRow> contraction_check(const ScalarGrid& u0, const ScalarGrid& v0,
                                              const StepParams& p, double t_end);

}  // namespace codimflow

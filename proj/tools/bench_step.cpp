// Benchmarks the OpenMP kernels against their serial reference twins and
// verifies agreement while timing.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "codimflow/graphflow.hpp"
#include "codimflow/levelset.hpp"
#include "codimflow/shapes.hpp"

using namespace codimflow;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

void bench_levelset() {
    const int nn = 257;
    const double h = 2.4 / (nn - 1);
    GridSpec spec;
    spec.n = 2;
    spec.h = h;
    spec.origin = Vec(2);
    spec.origin[0] = spec.origin[1] = -1.2;
    spec.shape[0] = spec.shape[1] = nn;

    Vec center(2);
    const ScalarGrid u0 = init_distance(Shape::sphere(2, 1, center, 1.0), spec, 0.3);

    StepParams p;
    p.k = 1;
    p.dt = h * h / 10.0;
    p.eps_grad = h;
    p.cap = 0.3;

    const int steps = 40;
    ScalarGrid a = u0, b = u0;
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < steps; ++i) a = step(a, p);
    const double t_par = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < steps; ++i) b = step_reference(b, p);
    const double t_ser = ms_since(t0);

    double diff = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    std::printf("levelset_step   nodes=%d steps=%d parallel=%.1fms reference=%.1fms maxdiff=%.3e\n",
                nn * nn, steps, t_par, t_ser, diff);
}

void bench_graphflow() {
    const int nn = 257;
    const double h = 2.0 / (nn - 1);
    Vec origin(2);
    origin[0] = origin[1] = -1.0;
    GraphField u = GraphField::make(2, 2, {nn, nn}, h, origin);
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j) {
            const Vec x = u.node_x(i, j);
            u.val(u.flat(i, j), 0) = 0.05 * std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]);
            u.val(u.flat(i, j), 1) = 0.05 * std::cos(2.0 * x[0]) * std::sin(3.0 * x[1]);
        }

    const double dt = h * h / 8.0;
    const int steps = 40;
    GraphField a = u, b = u;
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < steps; ++i) a = graph_step(a, dt);
    const double t_par = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < steps; ++i) b = graph_step_reference(b, dt);
    const double t_ser = ms_since(t0);

    double diff = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) diff = std::max(diff, std::abs(a.values[i] - b.values[i]));
    std::printf("graph_step      nodes=%d steps=%d parallel=%.1fms reference=%.1fms maxdiff=%.3e\n",
                nn * nn, steps, t_par, t_ser, diff);
}

}  // namespace

int main() {
    bench_levelset();
    bench_graphflow();
    return 0;
}

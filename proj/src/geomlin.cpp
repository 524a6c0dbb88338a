#include "codimflow/geomlin.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace codimflow {

SymMat tangential_projection(const Vec& p) {
    const Vec ph = p.normalized();
    SymMat P = SymMat::identity(p.dim);
    for (int i = 0; i < p.dim; ++i)
        for (int j = i; j < p.dim; ++j) P.add(i, j, -ph[i] * ph[j]);
    return P;
}

std::vector<Vec> complement_basis(const Vec& p) {
    const int n = p.dim;
    const Vec ph = p.normalized();
    // Householder reflection H = I - 2 w w^T with H e_n = ph.
    Vec w(n);
    double sign = ph[n - 1] >= 0.0 ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i) w[i] = ph[i];
    w[n - 1] += sign;
    const double wn = w.norm();
    std::vector<Vec> basis;
    basis.reserve(static_cast<size_t>(n - 1));
    if (wn < 1e-14) {
        // ph == -sign * e_n up to roundoff; the complement is spanned by the
        // first n-1 coordinate vectors.
        for (int j = 0; j < n - 1; ++j) {
            Vec e(n);
            e[j] = 1.0;
            basis.push_back(e);
        }
        return basis;
    }
    for (int i = 0; i < n; ++i) w[i] /= wn;
    for (int j = 0; j < n - 1; ++j) {
        Vec col(n);
        for (int i = 0; i < n; ++i) col[i] = (i == j ? 1.0 : 0.0) - 2.0 * w[i] * w[j];
        // H e_n = -sign*ph; flip so the map sends e_n to ph. Column sign is
        // irrelevant for spans but keep it deterministic.
        basis.push_back(col * (-sign));
    }
    return basis;
}

double F_operator(int k, const Vec& p, const SymMat& A) {
    const int n = A.dim();
    if (k < 1 || k > n - 1) throw std::domain_error("F_operator: k must be in 1..dim-1");
    const std::vector<Vec> basis = complement_basis(p);
    SymMat M(n - 1);
    for (int a = 0; a < n - 1; ++a) {
        const Vec Ab = A.apply(basis[static_cast<size_t>(a)]);
        for (int b = a; b < n - 1; ++b) M.set(a, b, Ab.dot(basis[static_cast<size_t>(b)]));
    }
    if (n - 1 == 1) return M(0, 0);
    const EigenPair e = jacobi_eigh(M);
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += e.values[i];
    return s;
}

namespace {

// det of the compression of a 3x3 symmetric A to p-perp equals p' cof(A) p.
SymMat cofactor3(const SymMat& A) {
    SymMat C(3);
    C.set(0, 0, A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1));
    C.set(0, 1, A(1, 2) * A(2, 0) - A(1, 0) * A(2, 2));
    C.set(0, 2, A(1, 0) * A(2, 1) - A(1, 1) * A(2, 0));
    C.set(1, 1, A(0, 0) * A(2, 2) - A(0, 2) * A(2, 0));
    C.set(1, 2, A(0, 1) * A(2, 0) - A(0, 0) * A(2, 1));
    C.set(2, 2, A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0));
    return C;
}

}  // namespace

double F_operator_fast(int k, const Vec& p, const SymMat& A) {
    const int n = A.dim();
    if (k < 1 || k > n - 1) throw std::domain_error("F_operator_fast: k must be in 1..dim-1");
    if (n == 2) {
        const Vec ph = p.normalized();
        Vec t(2);
        t[0] = -ph[1];
        t[1] = ph[0];
        return A.quad(t);
    }
    if (n == 3) {
        const Vec ph = p.normalized();
        const double trM = A.trace() - A.quad(ph);
        if (k == 2) return trM;
        const double detM = cofactor3(A).quad(ph);
        const double disc = std::sqrt(std::max(0.0, trM * trM - 4.0 * detM));
        return 0.5 * (trM - disc);
    }
    return F_operator(k, p, A);
}

namespace {

// Acklam's rational approximation to the inverse normal CDF; deterministic
// and accurate to ~1e-9, plenty for direction sampling.
double inv_normal_cdf(double u) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (u < plow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

std::vector<Vec> sphere_directions(int dim, int n_dirs) {
    if (dim < 2 || dim > kMaxDim) throw std::domain_error("sphere_directions: dim must be 2..8");
    std::vector<Vec> dirs;
    dirs.reserve(static_cast<size_t>(n_dirs));
    if (dim == 2) {
        for (int j = 0; j < n_dirs; ++j) {
            const double th = 2.0 * M_PI * (j + 0.5) / n_dirs;
            Vec v(2);
            v[0] = std::cos(th);
            v[1] = std::sin(th);
            dirs.push_back(v);
        }
        return dirs;
    }
    // Kronecker lattice with the generalized golden ratio: phi is the unique
    // positive root of x^{dim+1} = x + 1; coordinates frac(0.5 + j/phi^i)
    // are pushed through the inverse normal CDF and normalized, which makes
    // the sample quasi-uniform on the sphere for any dimension.
    double phi = 1.5;
    for (int it = 0; it < 64; ++it)
        phi = std::pow(1.0 + phi, 1.0 / (dim + 1));
    Vec alpha(dim);
    double a = 1.0 / phi;
    for (int i = 0; i < dim; ++i) {
        alpha[i] = a;
        a /= phi;
    }
    for (int j = 0; j < n_dirs; ++j) {
        Vec g(dim);
        double norm2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            double u = 0.5 + (j + 1) * alpha[i];
            u -= std::floor(u);
            u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
            g[i] = inv_normal_cdf(u);
            norm2 += g[i] * g[i];
        }
        if (norm2 < 1e-24) {
            g[0] = 1.0;
            norm2 = 1.0;
        }
        dirs.push_back(g * (1.0 / std::sqrt(norm2)));
    }
    return dirs;
}

namespace {

// the direction sample is deterministic, so the envelope reuses it across
// calls; per-thread storage keeps the grid kernels lock-free
const std::vector<Vec>& cached_directions(int dim, int n_dirs) {
    thread_local std::map<std::pair<int, int>, std::vector<Vec>> cache;
    std::vector<Vec>& entry = cache[{dim, n_dirs}];
    if (entry.empty()) entry = sphere_directions(dim, n_dirs);
    return entry;
}

}  // namespace

std::pair<double, double> F_degenerate_envelope(int k, const SymMat& A, int n_dirs) {
    const int n = A.dim();
    if (n_dirs < 2 * n * n)
        throw std::domain_error("F_degenerate_envelope: n_dirs must be >= 2*dim^2");
    const std::vector<Vec>& dirs = cached_directions(n, n_dirs);
    double lo = 0.0, hi = 0.0;
    bool first = true;
    auto fold = [&](double f) {
        if (first) {
            lo = hi = f;
            first = false;
        } else {
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
    };
    // the sample directions are unit vectors, so the dimension-2 and -3 loops
    // work on unpacked scalars; this sits on the degenerate-gradient path of
    // the grid kernels
    if (n == 2) {
        const double a00 = A(0, 0), a01 = A(0, 1), a11 = A(1, 1);
        for (const Vec& p : dirs) {
            const double t0 = -p[1], t1 = p[0];
            fold(a00 * t0 * t0 + 2.0 * a01 * t0 * t1 + a11 * t1 * t1);
        }
        return {lo, hi};
    }
    if (n == 3) {
        const double a00 = A(0, 0), a01 = A(0, 1), a02 = A(0, 2);
        const double a11 = A(1, 1), a12 = A(1, 2), a22 = A(2, 2);
        const double tr = a00 + a11 + a22;
        if (k == 2) {
            for (const Vec& p : dirs) {
                const double q = a00 * p[0] * p[0] + a11 * p[1] * p[1] + a22 * p[2] * p[2] +
                                 2.0 * (a01 * p[0] * p[1] + a02 * p[0] * p[2] + a12 * p[1] * p[2]);
                fold(tr - q);
            }
            return {lo, hi};
        }
        // k == 1: compress to a Householder basis of p-perp and take the
        // smaller 2x2 eigenvalue; the (m00-m11, m01) discriminant form stays
        // accurate when the two eigenvalues nearly coincide, unlike
        // trace/determinant cancellation
        for (const Vec& p : dirs) {
            const double sign = p[2] >= 0.0 ? 1.0 : -1.0;
            double w0 = p[0], w1 = p[1], w2 = p[2] + sign;
            const double wn2 = w0 * w0 + w1 * w1 + w2 * w2;
            const double s = 2.0 / wn2;
            // columns 0 and 1 of I - (2/|w|^2) w w^T span p-perp
            const double b00 = 1.0 - s * w0 * w0, b01 = -s * w0 * w1, b02 = -s * w0 * w2;
            const double b10 = b01, b11 = 1.0 - s * w1 * w1, b12 = -s * w1 * w2;
            const double Ab0_0 = a00 * b00 + a01 * b01 + a02 * b02;
            const double Ab0_1 = a01 * b00 + a11 * b01 + a12 * b02;
            const double Ab0_2 = a02 * b00 + a12 * b01 + a22 * b02;
            const double m00 = b00 * Ab0_0 + b01 * Ab0_1 + b02 * Ab0_2;
            const double m01 = b10 * Ab0_0 + b11 * Ab0_1 + b12 * Ab0_2;
            const double Ab1_0 = a00 * b10 + a01 * b11 + a02 * b12;
            const double Ab1_1 = a01 * b10 + a11 * b11 + a12 * b12;
            const double Ab1_2 = a02 * b10 + a12 * b11 + a22 * b12;
            const double m11 = b10 * Ab1_0 + b11 * Ab1_1 + b12 * Ab1_2;
            const double d = m00 - m11;
            const double disc = std::sqrt(d * d + 4.0 * m01 * m01);
            fold(0.5 * (m00 + m11 - disc));
        }
        return {lo, hi};
    }
    for (const Vec& p : dirs) fold(F_operator_fast(k, p, A));
    return {lo, hi};
}

}  // namespace codimflow

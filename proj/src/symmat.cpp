#include "codimflow/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace codimflow {

Vec::Vec(std::initializer_list<double> xs) {
    if (xs.size() > kMaxDim) throw std::domain_error("Vec: dimension exceeds 8");
    dim = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) v[static_cast<size_t>(i++)] = x;
}

double Vec::dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += v[static_cast<size_t>(i)] * o.v[static_cast<size_t>(i)];
    return s;
}

double Vec::norm() const { return std::sqrt(dot(*this)); }

Vec Vec::normalized() const {
    const double n = norm();
    if (n <= 0.0) throw std::domain_error("Vec::normalized: zero vector");
    Vec r(dim);
    for (int i = 0; i < dim; ++i) r[i] = v[static_cast<size_t>(i)] / n;
    return r;
}

Vec Vec::operator+(const Vec& o) const {
    Vec r(dim);
    for (int i = 0; i < dim; ++i) r[i] = (*this)[i] + o[i];
    return r;
}

Vec Vec::operator-(const Vec& o) const {
    Vec r(dim);
    for (int i = 0; i < dim; ++i) r[i] = (*this)[i] - o[i];
    return r;
}

Vec Vec::operator*(double c) const {
    Vec r(dim);
    for (int i = 0; i < dim; ++i) r[i] = (*this)[i] * c;
    return r;
}

SymMat::SymMat(int d) : dim_(d) {
    if (d < 1 || d > kMaxDim) throw std::domain_error("SymMat: dimension must be in 1..8");
}

SymMat SymMat::identity(int d) {
    SymMat m(d);
    for (int i = 0; i < d; ++i) m.set(i, i, 1.0);
    return m;
}

SymMat SymMat::diag(const Vec& d) {
    SymMat m(d.dim);
    for (int i = 0; i < d.dim; ++i) m.set(i, i, d[i]);
    return m;
}

void SymMat::set(int i, int j, double x) {
    a_[idx(i, j)] = x;
    a_[idx(j, i)] = x;
}

void SymMat::add(int i, int j, double x) {
    a_[idx(i, j)] += x;
    if (i != j) a_[idx(j, i)] += x;
}

SymMat SymMat::operator+(const SymMat& o) const {
    SymMat r(dim_);
    for (int i = 0; i < dim_ * dim_; ++i) r.a_[static_cast<size_t>(i)] = a_[static_cast<size_t>(i)] + o.a_[static_cast<size_t>(i)];
    return r;
}

SymMat SymMat::operator-(const SymMat& o) const {
    SymMat r(dim_);
    for (int i = 0; i < dim_ * dim_; ++i) r.a_[static_cast<size_t>(i)] = a_[static_cast<size_t>(i)] - o.a_[static_cast<size_t>(i)];
    return r;
}

SymMat SymMat::operator*(double c) const {
    SymMat r(dim_);
    for (int i = 0; i < dim_ * dim_; ++i) r.a_[static_cast<size_t>(i)] = a_[static_cast<size_t>(i)] * c;
    return r;
}

Vec SymMat::apply(const Vec& x) const {
    Vec r(dim_);
    for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

double SymMat::quad(const Vec& x) const { return x.dot(apply(x)); }

double SymMat::trace() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
    return s;
}

double SymMat::frobenius_norm() const {
    double s = 0.0;
    for (int i = 0; i < dim_ * dim_; ++i) s += a_[static_cast<size_t>(i)] * a_[static_cast<size_t>(i)];
    return std::sqrt(s);
}

double SymMat::off_diag_norm() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
            if (i != j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
}

EigenPair jacobi_eigh(const SymMat& A) {
    const int n = A.dim();
    SymMat D = A;
    // V accumulates rotations; columns become eigenvectors.
    double V[kMaxDim][kMaxDim] = {};
    for (int i = 0; i < n; ++i) V[i][i] = 1.0;

    const double scale = std::max(A.frobenius_norm(), 1e-300);
    constexpr int kSweepCap = 50;
    bool converged = false;
    for (int sweep = 0; sweep < kSweepCap && !converged; ++sweep) {
        if (D.off_diag_norm() <= 1e-15 * scale) {
            converged = true;
            break;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = D(p, q);
                if (std::abs(apq) <= 1e-18 * scale) continue;
                const double app = D(p, p);
                const double aqq = D(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double dip = D(i, p);
                    const double diq = D(i, q);
                    D.set(i, p, c * dip - s * diq);
                    D.set(i, q, s * dip + c * diq);
                }
                D.set(p, p, app - t * apq);
                D.set(q, q, aqq + t * apq);
                D.set(p, q, 0.0);
                for (int i = 0; i < n; ++i) {
                    const double vip = V[i][p];
                    const double viq = V[i][q];
                    V[i][p] = c * vip - s * viq;
                    V[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    if (!converged && D.off_diag_norm() > 1e-12 * scale) {
        std::ostringstream msg;
        msg << "jacobi_eigh: no convergence after 50 sweeps, off-diagonal norm "
            << D.off_diag_norm();
        throw std::runtime_error(msg.str());
    }

    // Sort ascending; ties ordered by ascending index of the dominant
    // eigenvector component, with a deterministic sign convention.
    struct Entry {
        double value;
        Vec vec;
        int dominant;
    };
    std::vector<Entry> entries(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        Entry& e = entries[static_cast<size_t>(j)];
        e.value = D(j, j);
        e.vec = Vec(n);
        int dom = 0;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            e.vec[i] = V[i][j];
            if (std::abs(V[i][j]) > best) {
                best = std::abs(V[i][j]);
                dom = i;
            }
        }
        if (e.vec[dom] < 0.0)
            for (int i = 0; i < n; ++i) e.vec[i] = -e.vec[i];
        e.dominant = dom;
    }
    std::stable_sort(entries.begin(), entries.end(), [scale](const Entry& a, const Entry& b) {
        if (std::abs(a.value - b.value) > 1e-12 * scale) return a.value < b.value;
        return a.dominant < b.dominant;
    });

    EigenPair out;
    out.values = Vec(n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = entries[static_cast<size_t>(j)].value;
        out.vectors[static_cast<size_t>(j)] = entries[static_cast<size_t>(j)].vec;
    }
    return out;
}

}  // namespace codimflow

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace codimflow {

// Small dense vectors and symmetric matrices, dimensions 2..8.
// Everything is stack-allocated and value-semantic; these types back the
// degenerate-elliptic operator driving the level-set equation and are hot
// in the grid kernels.

constexpr int kMaxDim = 8;

struct Vec {
    int dim = 0;
    std::array<double, kMaxDim> v{};

    Vec() = default;
    explicit Vec(int d) : dim(d) {}
    Vec(std::initializer_list<double> xs);

    double& operator[](int i) { return v[static_cast<size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<size_t>(i)]; }

    double dot(const Vec& o) const;
    double norm() const;
    Vec normalized() const;  // throws std::domain_error on zero vector
    Vec operator+(const Vec& o) const;
    Vec operator-(const Vec& o) const;
    Vec operator*(double c) const;
};

class SymMat {
  public:
    SymMat() = default;
    explicit SymMat(int d);
    static SymMat identity(int d);
    static SymMat diag(const Vec& d);

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return a_[idx(i, j)]; }
    // Writes both (i,j) and (j,i); symmetry is enforced by construction.
    void set(int i, int j, double x);
    void add(int i, int j, double x);

    SymMat operator+(const SymMat& o) const;
    SymMat operator-(const SymMat& o) const;
    SymMat operator*(double c) const;
    Vec apply(const Vec& x) const;
    double quad(const Vec& x) const;  // x' A x
    double trace() const;
    double frobenius_norm() const;
    double off_diag_norm() const;

  private:
    size_t idx(int i, int j) const {
        return static_cast<size_t>(i) * static_cast<size_t>(dim_) + static_cast<size_t>(j);
    }
    int dim_ = 0;
    std::array<double, kMaxDim * kMaxDim> a_{};
};

struct EigenPair {
    Vec values;                  // ascending
    std::array<Vec, kMaxDim> vectors;  // orthonormal, vectors[i] pairs with values[i]
};

// Cyclic Jacobi with threshold sweeps, 50-sweep cap. Throws std::runtime_error
// carrying the residual off-diagonal norm on non-convergence.
EigenPair jacobi_eigh(const SymMat& A);

}  // namespace codimflow

#pragma once

#include <utility>
#include <vector>

#include "codimflow/symmat.hpp"

namespace codimflow {

// The Ambrosio-Soner level-set operator and its supporting projections.
//
// For a nonzero gradient p and symmetric A, F(k, p, A) is the sum of the k
// smallest eigenvalues of A compressed to the orthogonal complement of p.
// All functions here are pure and freely shareable across threads.

// I - p_hat p_hat^T. Throws std::domain_error on the zero vector.
SymMat tangential_projection(const Vec& p);

// Orthonormal basis of p-perp: the first dim-1 columns of the Householder
// reflection mapping e_dim to p_hat. Throws std::domain_error on zero p.
std::vector<Vec> complement_basis(const Vec& p);

// Sum of the k smallest eigenvalues of the compression of A to p-perp.
// 1 <= k <= dim-1. Invariant under scaling of p and joint rotation of (p, A).
double F_operator(int k, const Vec& p, const SymMat& A);

// Same value through the closed-form 2D/3D compressions used by the grid
// kernels; falls back to F_operator for other dimensions.
double F_operator_fast(int k, const Vec& p, const SymMat& A);

// Deterministic quasi-uniform unit directions (generalized Fibonacci /
// Kronecker lattice pushed through the inverse normal CDF). Seedless.
std::vector<Vec> sphere_directions(int dim, int n_dirs);

// (min, max) of F_operator(k, p, A) over a fixed direction sample.
// Used by the grid scheme where the gradient degenerates. n_dirs >= 2 dim^2.
std::pair<double, double> F_degenerate_envelope(int k, const SymMat& A, int n_dirs);

}  // namespace codimflow

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "plapgnn/error.hpp"

namespace plap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Number of unordered node pairs, n*(n-1)/2.
inline std::size_t num_pairs(int n) {
  return static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2;
}

// Maps the unordered pair (i, j), 1-indexed with i > j, to its position k in
// [1, n(n-1)/2]: k = i - j + (j-1)(2n-j)/2. Pairs are enumerated with the
// smaller endpoint as the major key: (2,1), (3,1), ..., (n,1), (3,2), ...
std::size_t edge_index(int i, int j, int n);

// Inverse of edge_index: returns (i, j) with i > j, 1-indexed.
std::pair<int, int> edge_pair(std::size_t k, int n);

// Visits all pairs in edge-index order with 0-based indices (k0, i0, j0),
// i0 > j0.
template <typename F>
void for_each_pair(int n, F&& f) {
  std::size_t k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) f(k++, i, j);
}

// Non-negative edge weights over all unordered pairs; the optimization
// variable that parameterizes the Laplacian cone.
struct EdgeWeights {
  int n = 0;
  Vector values;

  EdgeWeights() = default;
  EdgeWeights(int n_, Vector v);

  static EdgeWeights zeros(int n_);
  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

// w -> Lw: symmetric matrix with [Lw]_ij = -w_k on off-diagonals and
// diagonal chosen so every row sums to zero.
Matrix laplacian_op(const EdgeWeights& w);

// Adjoint of laplacian_op: [L*Y]_k = Y_ii - Y_ij - Y_ji + Y_jj, so that
// <Lw, Y>_F = <w, L*Y> for all w, Y.
Vector adjoint_op(const Matrix& Y);

// Symmetric adjacency with zero diagonal built from non-negative weights.
// Throws on any negative entry.
Matrix adjacency_from_weights(const EdgeWeights& w);

// Upper-triangle extraction in edge-index order. The input must be square,
// symmetric and zero-diagonal within tolerance.
EdgeWeights weights_from_adjacency(const Matrix& A);

// Recovers w from a Laplacian as w_k = -phi_ij; entries pushed slightly
// positive by input noise are clamped to zero when clamp_negative is set.
EdgeWeights weights_from_laplacian(const Matrix& phi, bool clamp_negative);

// Structural check: symmetric, non-positive off-diagonal (within offdiag_tol)
// and zero row sums (within rowsum_tol).
bool is_laplacian(const Matrix& M, double offdiag_tol = 1e-12,
                  double rowsum_tol = 1e-9);
void validate_laplacian(const Matrix& M, double offdiag_tol = 1e-12,
                        double rowsum_tol = 1e-9);

// Smoothness of node features over the graph: sum over unordered pairs of
// w_ij * ||x_i - x_j||^2 (equivalently half the ordered-pair sum).
double dirichlet_energy(const Matrix& A, const Matrix& X);
double dirichlet_energy(const EdgeWeights& w, const Matrix& X);

// p-th power variant, sum of w_ij * ||x_i - x_j||_p^p; requires p > 1 and
// reduces exactly to dirichlet_energy at p = 2.
double p_dirichlet_energy(const Matrix& A, const Matrix& X, double p);
double p_dirichlet_energy(const EdgeWeights& w, const Matrix& X, double p);

struct EnergyPoint {
  double level;
  double ratio;
};

// Energy of each perturbed graph normalized by the clean graph's energy.
// Entry 0 of the result is the clean graph at level 0 with ratio exactly 1.
// Throws if the clean graph has zero energy.
std::vector<EnergyPoint> normalized_energy_curve(
    const Matrix& clean, const std::vector<std::pair<double, Matrix>>& perturbed,
    const Matrix& X);

}  // namespace plap

#include "plapgnn/graph.hpp"

#include <cmath>
#include <string>

namespace plap {

namespace {

void require_square(const Matrix& M, const char* what) {
  if (M.rows() != M.cols())
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + ": matrix is " + std::to_string(M.rows()) +
                    "x" + std::to_string(M.cols()) + ", expected square");
}

void require_feature_rows(const Matrix& X, Eigen::Index n, const char* what) {
  if (X.rows() != n)
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + ": feature matrix has " +
                    std::to_string(X.rows()) + " rows for " +
                    std::to_string(n) + " nodes");
}

// Kahan-compensated accumulator; keeps reductions deterministic and accurate
// enough for the tight monotonicity tolerances downstream.
struct Accum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

double pair_energy(const Matrix& X, int i, int j, double p) {
  Accum acc;
  for (Eigen::Index m = 0; m < X.cols(); ++m) {
    const double d = std::abs(X(i, m) - X(j, m));
    acc.add(p == 2.0 ? d * d : std::pow(d, p));
  }
  return acc.sum;
}

template <typename WeightAt>
double energy_impl(int n, const Matrix& X, double p, WeightAt&& weight) {
  Accum acc;
  for_each_pair(n, [&](std::size_t k, int i, int j) {
    const double w = weight(k, i, j);
    if (w != 0.0) acc.add(w * pair_energy(X, i, j, p));
  });
  return acc.sum;
}

}  // namespace

std::size_t edge_index(int i, int j, int n) {
  if (n < 2 || j < 1 || i <= j || i > n)
    throw Error(ErrorCode::invalid_argument,
                "edge_index requires 1 <= j < i <= n, got i=" +
                    std::to_string(i) + " j=" + std::to_string(j) +
                    " n=" + std::to_string(n));
  const std::size_t jj = static_cast<std::size_t>(j);
  return static_cast<std::size_t>(i) - jj +
         (jj - 1) * (2 * static_cast<std::size_t>(n) - jj) / 2;
}

std::pair<int, int> edge_pair(std::size_t k, int n) {
  if (n < 2 || k < 1 || k > num_pairs(n))
    throw Error(ErrorCode::invalid_argument,
                "edge_pair: k=" + std::to_string(k) + " out of range for n=" +
                    std::to_string(n));
  // offset(j) = (j-1)(2n-j)/2 pairs precede column j; invert the quadratic
  // and correct for rounding.
  const double nn = static_cast<double>(n);
  double guess =
      ((2.0 * nn + 1.0) -
       std::sqrt((2.0 * nn + 1.0) * (2.0 * nn + 1.0) - 8.0 * nn - 8.0 * (static_cast<double>(k) - 1.0))) /
      2.0;
  int j = static_cast<int>(guess);
  if (j < 1) j = 1;
  if (j > n - 1) j = n - 1;
  auto offset = [n](int col) {
    const std::size_t c = static_cast<std::size_t>(col);
    return (c - 1) * (2 * static_cast<std::size_t>(n) - c) / 2;
  };
  while (j > 1 && offset(j) >= k) --j;
  while (j < n - 1 && offset(j + 1) < k) ++j;
  const int i = static_cast<int>(k - offset(j)) + j;
  return {i, j};
}

EdgeWeights::EdgeWeights(int n_, Vector v) : n(n_), values(std::move(v)) {
  if (n < 0 || static_cast<std::size_t>(values.size()) != num_pairs(n))
    throw Error(ErrorCode::dimension_mismatch,
                "edge weight vector has length " +
                    std::to_string(values.size()) + ", expected " +
                    std::to_string(num_pairs(n)) + " for n=" +
                    std::to_string(n));
}

EdgeWeights EdgeWeights::zeros(int n_) {
  return EdgeWeights(n_, Vector::Zero(static_cast<Eigen::Index>(num_pairs(n_))));
}

Matrix laplacian_op(const EdgeWeights& w) {
  const int n = w.n;
  Matrix M = Matrix::Zero(n, n);
  for_each_pair(n, [&](std::size_t k, int i, int j) {
    const double v = w.values(static_cast<Eigen::Index>(k));
    M(i, j) = -v;
    M(j, i) = -v;
  });
  for (int i = 0; i < n; ++i) M(i, i) = -M.row(i).sum();
  return M;
}

Vector adjoint_op(const Matrix& Y) {
  require_square(Y, "adjoint_op");
  const int n = static_cast<int>(Y.rows());
  Vector v(static_cast<Eigen::Index>(num_pairs(n)));
  for_each_pair(n, [&](std::size_t k, int i, int j) {
    v(static_cast<Eigen::Index>(k)) = Y(i, i) - Y(i, j) - Y(j, i) + Y(j, j);
  });
  return v;
}

Matrix adjacency_from_weights(const EdgeWeights& w) {
  if ((w.values.array() < 0.0).any())
    throw Error(ErrorCode::validation,
                "adjacency_from_weights: negative edge weight");
  Matrix A = Matrix::Zero(w.n, w.n);
  for_each_pair(w.n, [&](std::size_t k, int i, int j) {
    const double v = w.values(static_cast<Eigen::Index>(k));
    A(i, j) = v;
    A(j, i) = v;
  });
  return A;
}

EdgeWeights weights_from_adjacency(const Matrix& A) {
  require_square(A, "weights_from_adjacency");
  const int n = static_cast<int>(A.rows());
  for (int i = 0; i < n; ++i) {
    if (A(i, i) != 0.0)
      throw Error(ErrorCode::validation,
                  "weights_from_adjacency: nonzero diagonal at node " +
                      std::to_string(i));
  }
  if (!A.isApprox(A.transpose(), 1e-12))
    throw Error(ErrorCode::validation,
                "weights_from_adjacency: matrix is not symmetric");
  EdgeWeights w = EdgeWeights::zeros(n);
  for_each_pair(n, [&](std::size_t k, int i, int j) {
    w.values(static_cast<Eigen::Index>(k)) = A(i, j);
  });
  return w;
}

EdgeWeights weights_from_laplacian(const Matrix& phi, bool clamp_negative) {
  require_square(phi, "weights_from_laplacian");
  const int n = static_cast<int>(phi.rows());
  EdgeWeights w = EdgeWeights::zeros(n);
  for_each_pair(n, [&](std::size_t k, int i, int j) {
    double v = -phi(i, j);
    if (clamp_negative && v < 0.0) v = 0.0;
    w.values(static_cast<Eigen::Index>(k)) = v;
  });
  return w;
}

bool is_laplacian(const Matrix& M, double offdiag_tol, double rowsum_tol) {
  if (M.rows() != M.cols()) return false;
  const int n = static_cast<int>(M.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (M(i, j) > offdiag_tol) return false;
      if (std::abs(M(i, j) - M(j, i)) > 1e-9) return false;
    }
    if (std::abs(M.row(i).sum()) > rowsum_tol * std::max(1, n)) return false;
  }
  return true;
}

void validate_laplacian(const Matrix& M, double offdiag_tol,
                        double rowsum_tol) {
  if (!is_laplacian(M, offdiag_tol, rowsum_tol))
    throw Error(ErrorCode::validation,
                "matrix is not a combinatorial Laplacian (symmetric, "
                "non-positive off-diagonal, zero row sums)");
}

double dirichlet_energy(const Matrix& A, const Matrix& X) {
  require_square(A, "dirichlet_energy");
  require_feature_rows(X, A.rows(), "dirichlet_energy");
  return energy_impl(static_cast<int>(A.rows()), X, 2.0,
                     [&](std::size_t, int i, int j) { return A(i, j); });
}

double dirichlet_energy(const EdgeWeights& w, const Matrix& X) {
  require_feature_rows(X, w.n, "dirichlet_energy");
  return energy_impl(w.n, X, 2.0, [&](std::size_t k, int, int) {
    return w.values(static_cast<Eigen::Index>(k));
  });
}

double p_dirichlet_energy(const Matrix& A, const Matrix& X, double p) {
  if (!(p > 1.0))
    throw Error(ErrorCode::invalid_argument,
                "p_dirichlet_energy requires p > 1, got " + std::to_string(p));
  if (p == 2.0) return dirichlet_energy(A, X);
  require_square(A, "p_dirichlet_energy");
  require_feature_rows(X, A.rows(), "p_dirichlet_energy");
  return energy_impl(static_cast<int>(A.rows()), X, p,
                     [&](std::size_t, int i, int j) { return A(i, j); });
}

double p_dirichlet_energy(const EdgeWeights& w, const Matrix& X, double p) {
  if (!(p > 1.0))
    throw Error(ErrorCode::invalid_argument,
                "p_dirichlet_energy requires p > 1, got " + std::to_string(p));
  if (p == 2.0) return dirichlet_energy(w, X);
  require_feature_rows(X, w.n, "p_dirichlet_energy");
  return energy_impl(w.n, X, p, [&](std::size_t k, int, int) {
    return w.values(static_cast<Eigen::Index>(k));
  });
}

std::vector<EnergyPoint> normalized_energy_curve(
    const Matrix& clean, const std::vector<std::pair<double, Matrix>>& perturbed,
    const Matrix& X) {
  const double base = dirichlet_energy(clean, X);
  if (base == 0.0)
    throw Error(ErrorCode::invalid_argument,
                "normalized_energy_curve: clean graph has zero Dirichlet "
                "energy, cannot normalize");
  std::vector<EnergyPoint> out;
  out.reserve(perturbed.size() + 1);
  out.push_back({0.0, base / base});
  for (const auto& [level, A] : perturbed) {
    if (A.rows() != clean.rows())
      throw Error(ErrorCode::dimension_mismatch,
                  "normalized_energy_curve: perturbed graph size mismatch");
    out.push_back({level, dirichlet_energy(A, X) / base});
  }
  return out;
}

}  // namespace plap

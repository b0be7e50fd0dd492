#pragma once

#include <vector>

#include "plapgnn/graph.hpp"

namespace plap {

enum class StepMode { lipschitz, fixed };

// The linear coefficient c admits two constructions. `algorithm1` doubles the
// adjoint term; `exact` makes grad f = L*(Lw) - c the true gradient of the
// scaled objective, which is what the descent and optimality guarantees
// assume. Both are kept; callers pick.
enum class CMode { algorithm1, exact };

// `observed` restricts the variable to pairs that carry weight in the noisy
// input (no new edges can appear); intended for large graphs.
enum class SupportMode { full, observed };

struct DenoiseConfig {
  double alpha = 1.0;
  double beta = 1.0;
  double p = 2.4;
  int max_iters = 200;
  double rel_tol = 1e-4;
  StepMode step_mode = StepMode::lipschitz;
  double eta_w = 1e-3;  // step size when step_mode == fixed
  CMode c_mode = CMode::algorithm1;
  SupportMode support = SupportMode::full;

  void validate() const;
};

struct DenoiseResult {
  EdgeWeights w_star;
  Matrix phi_star;
  // objective at every iterate; entry 0 is the starting point, so the length
  // is iterations_run + 1
  std::vector<double> objective_trace;
  int iterations_run = 0;
  bool converged = false;
};

// delta_k = ||x_i - x_j||_p^p per unordered pair, the per-edge dissimilarity
// that prices edges in the regularizer.
Vector feature_distances(const Matrix& X, double p);

// Linear coefficient of the quadratic program; see CMode.
Vector precompute_c(const Matrix& phi_n, const Vector& delta, double alpha,
                    double beta, CMode mode);

// Reported objective: alpha * ||Lw - phi_n||_F^2 + beta * <w, delta>.
double objective(const EdgeWeights& w, const Matrix& phi_n, const Vector& delta,
                 double alpha, double beta);

// grad f(w) = L*(Lw) - c.
Vector gradient(const EdgeWeights& w, const Vector& c);

// One projected majorization step: max(0, w - eta * grad f(w)).
EdgeWeights mm_step(const EdgeWeights& w, const Vector& c, double eta);

// Full solve: starts from the weights of phi_n (clamped at zero), iterates
// mm_step until the relative change ||w+ - w|| / max(1, ||w||) drops below
// rel_tol or max_iters is reached. converged is set only by the tolerance
// test.
DenoiseResult run_denoise(const Matrix& phi_n, const Matrix& X,
                          const DenoiseConfig& cfg);

}  // namespace plap

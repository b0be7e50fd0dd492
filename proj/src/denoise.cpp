#include "plapgnn/denoise.hpp"

#include <cmath>
#include <string>

namespace plap {

namespace {

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

double objective_from_parts(const Matrix& Lw, const EdgeWeights& w,
                            const Matrix& phi_n, const Vector& delta,
                            double alpha, double beta) {
  Accum fid;
  const int n = w.n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double r = Lw(i, j) - phi_n(i, j);
      fid.add(r * r);
    }
  Accum reg;
  for (Eigen::Index k = 0; k < w.values.size(); ++k)
    reg.add(w.values(k) * delta(k));
  return alpha * fid.sum + beta * reg.sum;
}

}  // namespace

void DenoiseConfig::validate() const {
  if (!(alpha > 0.0))
    throw Error(ErrorCode::invalid_argument, "denoise: alpha must be > 0");
  if (!(beta >= 0.0))
    throw Error(ErrorCode::invalid_argument, "denoise: beta must be >= 0");
  if (!(p > 1.0))
    throw Error(ErrorCode::invalid_argument, "denoise: p must be > 1");
  if (max_iters < 1)
    throw Error(ErrorCode::invalid_argument, "denoise: max_iters must be >= 1");
  if (!(rel_tol > 0.0))
    throw Error(ErrorCode::invalid_argument, "denoise: rel_tol must be > 0");
  if (step_mode == StepMode::fixed && !(eta_w > 0.0))
    throw Error(ErrorCode::invalid_argument,
                "denoise: fixed step size must be > 0");
}

Vector feature_distances(const Matrix& X, double p) {
  if (!(p > 1.0))
    throw Error(ErrorCode::invalid_argument,
                "feature_distances requires p > 1, got " + std::to_string(p));
  if (!X.allFinite())
    throw Error(ErrorCode::invalid_argument,
                "feature_distances: non-finite feature entries");
  const int n = static_cast<int>(X.rows());
  Vector delta(static_cast<Eigen::Index>(num_pairs(n)));
  for_each_pair(n, [&](std::size_t k, int i, int j) {
    Accum acc;
    for (Eigen::Index m = 0; m < X.cols(); ++m) {
      const double d = std::abs(X(i, m) - X(j, m));
      acc.add(p == 2.0 ? d * d : std::pow(d, p));
    }
    delta(static_cast<Eigen::Index>(k)) = acc.sum;
  });
  return delta;
}

Vector precompute_c(const Matrix& phi_n, const Vector& delta, double alpha,
                    double beta, CMode mode) {
  if (!(alpha > 0.0))
    throw Error(ErrorCode::invalid_argument, "precompute_c: alpha must be > 0");
  Vector adj = adjoint_op(phi_n);
  if (adj.size() != delta.size())
    throw Error(ErrorCode::dimension_mismatch,
                "precompute_c: delta length does not match the pair count");
  const double factor = (mode == CMode::algorithm1) ? 2.0 : 1.0;
  return factor * adj - (beta / (2.0 * alpha)) * delta;
}

double objective(const EdgeWeights& w, const Matrix& phi_n, const Vector& delta,
                 double alpha, double beta) {
  if (phi_n.rows() != w.n || phi_n.cols() != w.n)
    throw Error(ErrorCode::dimension_mismatch, "objective: size mismatch");
  if (delta.size() != w.values.size())
    throw Error(ErrorCode::dimension_mismatch,
                "objective: delta length mismatch");
  return objective_from_parts(laplacian_op(w), w, phi_n, delta, alpha, beta);
}

Vector gradient(const EdgeWeights& w, const Vector& c) {
  if (c.size() != w.values.size())
    throw Error(ErrorCode::dimension_mismatch, "gradient: c length mismatch");
  return adjoint_op(laplacian_op(w)) - c;
}

EdgeWeights mm_step(const EdgeWeights& w, const Vector& c, double eta) {
  if (!(eta > 0.0))
    throw Error(ErrorCode::invalid_argument, "mm_step: eta must be > 0");
  return EdgeWeights(w.n,
                     (w.values - eta * gradient(w, c)).cwiseMax(0.0));
}

DenoiseResult run_denoise(const Matrix& phi_n, const Matrix& X,
                          const DenoiseConfig& cfg) {
  cfg.validate();
  validate_laplacian(phi_n);
  const int n = static_cast<int>(phi_n.rows());
  if (X.rows() != n)
    throw Error(ErrorCode::dimension_mismatch,
                "run_denoise: feature rows do not match node count");

  const Vector delta = feature_distances(X, cfg.p);
  const Vector c = precompute_c(phi_n, delta, cfg.alpha, cfg.beta, cfg.c_mode);
  const double eta =
      cfg.step_mode == StepMode::lipschitz ? 1.0 / (2.0 * n) : cfg.eta_w;

  EdgeWeights w = weights_from_laplacian(phi_n, /*clamp_negative=*/true);
  std::vector<char> support;
  if (cfg.support == SupportMode::observed) {
    support.resize(static_cast<std::size_t>(w.values.size()));
    for (Eigen::Index k = 0; k < w.values.size(); ++k)
      support[static_cast<std::size_t>(k)] = w.values(k) > 0.0;
  }

  DenoiseResult res;
  res.objective_trace.reserve(static_cast<std::size_t>(cfg.max_iters) + 1);
  Matrix Lw = laplacian_op(w);
  res.objective_trace.push_back(
      objective_from_parts(Lw, w, phi_n, delta, cfg.alpha, cfg.beta));

  for (int t = 0; t < cfg.max_iters; ++t) {
    const Vector grad = adjoint_op(Lw) - c;
    Vector next = (w.values - eta * grad).cwiseMax(0.0);
    if (cfg.support == SupportMode::observed)
      for (Eigen::Index k = 0; k < next.size(); ++k)
        if (!support[static_cast<std::size_t>(k)]) next(k) = 0.0;
    if (!next.allFinite())
      throw Error(ErrorCode::numeric,
                  "run_denoise: non-finite iterate at iteration " +
                      std::to_string(t + 1));
    const double rel =
        (next - w.values).norm() / std::max(1.0, w.values.norm());
    w.values = std::move(next);
    Lw = laplacian_op(w);
    res.objective_trace.push_back(
        objective_from_parts(Lw, w, phi_n, delta, cfg.alpha, cfg.beta));
    res.iterations_run = t + 1;
    if (rel < cfg.rel_tol) {
      res.converged = true;
      break;
    }
  }

  res.w_star = std::move(w);
  res.phi_star = laplacian_op(res.w_star);
  return res;
}

}  // namespace plap

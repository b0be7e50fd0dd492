// Acceptance suite: one criterion per section, one pass/fail line each.
// Exit code is the number of failed criteria.

#include <unistd.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "plapgnn/data.hpp"
#include "plapgnn/denoise.hpp"
#include "plapgnn/gcn.hpp"
#include "plapgnn/pipeline.hpp"
#include "plapgnn/rng.hpp"

using namespace plap;
namespace fs = std::filesystem;

namespace {

struct Checker {
  std::vector<std::string> failures;
  long checks = 0;

  void expect(bool ok, const std::string& message) {
    ++checks;
    if (!ok && failures.size() < 8) failures.push_back(message);
    if (!ok && failures.size() == 8) failures.push_back("...");
  }
  template <typename T>
  std::string str(const T& v) {
    std::ostringstream ss;
    ss.precision(12);
    ss << v;
    return ss.str();
  }
};

int g_failed = 0;

void criterion(int id, const std::string& name, double budget_seconds,
               const std::function<void(Checker&)>& body) {
  Checker chk;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(chk);
  } catch (const std::exception& e) {
    chk.expect(false, std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (elapsed > budget_seconds)
    chk.expect(false, "runtime " + chk.str(elapsed) + "s exceeds the " +
                          chk.str(budget_seconds) + "s budget");
  char line[160];
  std::snprintf(line, sizeof(line), "[%s] %d. %s (%ld checks, %.2fs)",
                chk.failures.empty() ? "PASS" : "FAIL", id, name.c_str(),
                chk.checks, elapsed);
  std::cout << line << "\n";
  for (const auto& f : chk.failures) std::cout << "       - " << f << "\n";
  if (!chk.failures.empty()) ++g_failed;
}

Matrix random_matrix(int rows, int cols, rng::Rng& r) {
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = 2.0 * r.uniform01() - 1.0;
  return M;
}

EdgeWeights random_weights(int n, rng::Rng& r, double density,
                           bool nonnegative) {
  EdgeWeights w = EdgeWeights::zeros(n);
  for (Eigen::Index k = 0; k < w.values.size(); ++k)
    if (r.uniform01() < density)
      w.values(k) = nonnegative ? r.uniform01() : 2.0 * r.uniform01() - 1.0;
  return w;
}

// ---- independent quadratic-program oracle (criterion 4) --------------------
//
// Everything below is built from the definitions with plain loops: the
// single-pair basis matrices, the Gram matrix Q_kl = <E_k, E_l>_F, the linear
// term c_k = <E_k, phi_n>_F - (beta/2alpha) * delta_k, and exhaustive
// active-set enumeration over all sign patterns. It shares no code with the
// iterative solver it checks.

Matrix oracle_basis(int n, int i0, int j0) {
  Matrix E = Matrix::Zero(n, n);
  E(i0, j0) = E(j0, i0) = -1.0;
  E(i0, i0) = E(j0, j0) = 1.0;
  return E;
}

struct OraclePairs {
  std::vector<std::pair<int, int>> pairs;  // 0-indexed (i, j), i > j
};

OraclePairs oracle_pairs(int n) {
  OraclePairs out;
  for (int j = 1; j <= n; ++j)
    for (int i = j + 1; i <= n; ++i) out.pairs.push_back({i - 1, j - 1});
  return out;
}

Vector oracle_solve(const Matrix& phi_n, const Matrix& X, double alpha,
                    double beta, double p) {
  const int n = static_cast<int>(phi_n.rows());
  const auto pl = oracle_pairs(n);
  const int m = static_cast<int>(pl.pairs.size());

  std::vector<Matrix> basis;
  for (const auto& [i, j] : pl.pairs) basis.push_back(oracle_basis(n, i, j));

  Matrix Q(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double dot = 0.0;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) dot += basis[a](r, c) * basis[b](r, c);
      Q(a, b) = dot;
    }

  Vector c(m);
  for (int a = 0; a < m; ++a) {
    double dot = 0.0;
    for (int r = 0; r < n; ++r)
      for (int col = 0; col < n; ++col) dot += basis[a](r, col) * phi_n(r, col);
    const auto [i, j] = pl.pairs[a];
    double delta = 0.0;
    for (Eigen::Index f = 0; f < X.cols(); ++f)
      delta += std::pow(std::abs(X(i, f) - X(j, f)), p);
    c(a) = dot - beta / (2.0 * alpha) * delta;
  }

  // minimize 1/2 w'Qw - c'w over w >= 0 by trying every active set
  double best_val = std::numeric_limits<double>::infinity();
  Vector best = Vector::Zero(m);
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> free_idx;
    for (int k = 0; k < m; ++k)
      if (mask & (1u << k)) free_idx.push_back(k);
    Vector w = Vector::Zero(m);
    if (!free_idx.empty()) {
      const int f = static_cast<int>(free_idx.size());
      Matrix Qs(f, f);
      Vector cs(f);
      for (int a = 0; a < f; ++a) {
        cs(a) = c(free_idx[static_cast<std::size_t>(a)]);
        for (int b = 0; b < f; ++b)
          Qs(a, b) = Q(free_idx[static_cast<std::size_t>(a)],
                       free_idx[static_cast<std::size_t>(b)]);
      }
      const Vector ws = Qs.ldlt().solve(cs);
      bool feasible = true;
      for (int a = 0; a < f; ++a)
        if (ws(a) < -1e-10) feasible = false;
      if (!feasible) continue;
      for (int a = 0; a < f; ++a)
        w(free_idx[static_cast<std::size_t>(a)]) = std::max(0.0, ws(a));
    }
    const Vector grad = Q * w - c;
    bool kkt = true;
    for (int k = 0; k < m; ++k)
      if (!(mask & (1u << k)) && grad(k) < -1e-8) kkt = false;
    if (!kkt) continue;
    const double val = 0.5 * w.dot(Q * w) - c.dot(w);
    if (val < best_val) {
      best_val = val;
      best = w;
    }
  }
  return best;
}

// ---- CLI helpers (criteria 8, 9) -------------------------------------------

#ifndef PLAPGNN_CLI_PATH
#define PLAPGNN_CLI_PATH "plapgnn"
#endif

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(PLAPGNN_CLI_PATH) + " " + args + " > /dev/null";
  return std::system(cmd.c_str());
}

const char* kPipelineArgs =
    "--n 200 --classes 4 --p-in 0.1 --p-out 0.01 --feature-dim 16 "
    "--separation 3 --noise-sd 0.5 --rates 0,0.6 --reps 5 --attack random "
    "--alpha 1 --beta 1 --p 2.4 --c-mode exact --denoise-iters 3000 "
    "--rel-tol 1e-6 --lr-gnn 0.05 --epochs 250 --hidden 16 --patience 30 "
    "--seed 1";

RunConfig defense_config() {
  RunConfig cfg;
  cfg.synth.n = 200;
  cfg.synth.classes = 4;
  cfg.synth.p_in = 0.1;
  cfg.synth.p_out = 0.01;
  cfg.synth.feature_dim = 16;
  cfg.synth.feature_separation = 3.0;
  cfg.synth.noise_sd = 0.5;
  cfg.rates = {0.0, 0.6};
  cfg.repetitions = 5;
  cfg.denoise.alpha = 1.0;
  cfg.denoise.beta = 1.0;
  cfg.denoise.p = 2.4;
  cfg.denoise.c_mode = CMode::exact;
  cfg.denoise.max_iters = 3000;
  cfg.denoise.rel_tol = 1e-6;
  cfg.train.learning_rate = 0.05;
  cfg.train.epochs = 250;
  cfg.train.hidden = 16;
  cfg.train.patience = 30;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

int main() {
  std::cout << "acceptance suite\n";

  criterion(1, "operator correctness: adjoint identity and index bijection",
            10.0, [](Checker& chk) {
    rng::Rng r(1);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 2 + static_cast<int>(r.below(49));
      const EdgeWeights w = random_weights(n, r, 1.0, false);
      const Matrix Y = random_matrix(n, n, r);
      const double lhs = (laplacian_op(w).array() * Y.array()).sum();
      const double rhs = w.values.dot(adjoint_op(Y));
      chk.expect(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)),
                 "adjoint identity violated at n=" + chk.str(n));
    }
    for (int n = 2; n <= 100; ++n) {
      std::size_t expected = 0;
      bool ok = true;
      for (int j = 1; j <= n && ok; ++j)
        for (int i = j + 1; i <= n && ok; ++i) {
          const std::size_t k = edge_index(i, j, n);
          ok = (k == ++expected) && edge_pair(k, n) == std::pair<int, int>{i, j};
        }
      chk.expect(ok && expected == num_pairs(n),
                 "bijection broken for n=" + chk.str(n));
    }
  });

  criterion(2, "largest eigenvalue of the operator composition equals 2n",
            5.0, [](Checker& chk) {
    for (int n = 3; n <= 10; ++n) {
      const Eigen::Index m = static_cast<Eigen::Index>(num_pairs(n));
      Matrix Q(m, m);
      for (Eigen::Index k = 0; k < m; ++k) {
        EdgeWeights e = EdgeWeights::zeros(n);
        e.values(k) = 1.0;
        Q.col(k) = adjoint_op(laplacian_op(e));
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
      const double lmax = es.eigenvalues().maxCoeff();
      chk.expect(lmax <= 2.0 * n + 1e-6,
                 "n=" + chk.str(n) + ": lmax=" + chk.str(lmax) + " above 2n");
      chk.expect(std::abs(lmax - 2.0 * n) <= 1e-6,
                 "n=" + chk.str(n) + ": lmax=" + chk.str(lmax) +
                     " off from 2n beyond 1e-6");
    }
  });

  criterion(3, "solver descent and first-order optimality in exact mode",
            60.0, [](Checker& chk) {
    rng::Rng r(3);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 4 + static_cast<int>(r.below(27));
      const EdgeWeights wn = random_weights(n, r, 0.5, true);
      const Matrix phi_n = laplacian_op(wn);
      const Matrix X = random_matrix(n, 4, r);
      DenoiseConfig cfg;
      cfg.c_mode = CMode::exact;
      cfg.beta = 0.1 + 1.4 * r.uniform01();
      cfg.max_iters = 50000;
      cfg.rel_tol = 1e-9;
      const DenoiseResult res = run_denoise(phi_n, X, cfg);
      chk.expect(res.converged, "instance " + chk.str(trial) +
                                    " (n=" + chk.str(n) + ") did not converge");
      for (std::size_t t = 1; t < res.objective_trace.size(); ++t)
        if (res.objective_trace[t] > res.objective_trace[t - 1] + 1e-12) {
          chk.expect(false, "objective increased at iteration " + chk.str(t) +
                                " of instance " + chk.str(trial));
          break;
        }
      const Vector delta = feature_distances(X, cfg.p);
      const Vector c =
          precompute_c(phi_n, delta, cfg.alpha, cfg.beta, CMode::exact);
      const Vector g = gradient(res.w_star, c);
      bool kkt = true;
      for (Eigen::Index k = 0; k < g.size(); ++k) {
        const double tol = 1e-3 * (1.0 + std::abs(c(k)));
        if (res.w_star.values(k) > 1e-8)
          kkt = kkt && std::abs(g(k)) <= tol;
        else
          kkt = kkt && g(k) >= -tol;
      }
      chk.expect(kkt, "KKT violated on instance " + chk.str(trial));
    }
  });

  criterion(4, "solver matches the exhaustive active-set oracle", 120.0,
            [](Checker& chk) {
    rng::Rng r(4);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 4 + static_cast<int>(r.below(3));  // 4..6
      const EdgeWeights wn = random_weights(n, r, 0.6, true);
      const Matrix phi_n = laplacian_op(wn);
      const Matrix X = random_matrix(n, 3, r);
      const double alpha = 0.5 + r.uniform01();
      const double beta = 0.1 + 1.4 * r.uniform01();
      const double p = 2.4;

      const Vector expected = oracle_solve(phi_n, X, alpha, beta, p);

      DenoiseConfig cfg;
      cfg.alpha = alpha;
      cfg.beta = beta;
      cfg.p = p;
      cfg.c_mode = CMode::exact;
      cfg.max_iters = 200000;
      cfg.rel_tol = 1e-12;
      const DenoiseResult res = run_denoise(phi_n, X, cfg);
      const double dist =
          (res.w_star.values - expected).cwiseAbs().maxCoeff();
      chk.expect(dist <= 1e-5, "instance " + chk.str(trial) + " (n=" +
                                   chk.str(n) + "): solver differs from "
                                   "oracle by " + chk.str(dist));
    }
  });

  criterion(5, "classifier gradients match central finite differences", 30.0,
            [](Checker& chk) {
    rng::Rng r(5);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 5 + static_cast<int>(r.below(5));
      const int d = 3 + static_cast<int>(r.below(3));
      const int h = 2 + static_cast<int>(r.below(3));
      const int C = 2 + static_cast<int>(r.below(2));
      Matrix A = Matrix::Zero(n, n);
      for_each_pair(n, [&](std::size_t, int i, int j) {
        if (r.uniform01() < 0.5) A(i, j) = A(j, i) = r.uniform01();
      });
      const Matrix Ahat = normalize_adjacency(A);
      const Matrix X = random_matrix(n, d, r);
      Labels lab;
      lab.num_classes = C;
      lab.y = Eigen::VectorXi(n);
      lab.train.assign(n, 0);
      lab.val.assign(n, 0);
      lab.test.assign(n, 0);
      for (int i = 0; i < n; ++i) {
        lab.y(i) = static_cast<int>(r.below(C));
        lab.train[static_cast<std::size_t>(i)] = r.uniform01() < 0.6 ? 1 : 0;
      }
      lab.train[0] = 1;
      GcnParams params{random_matrix(d, h, r), random_matrix(h, C, r)};
      const auto lg = loss_and_grads(params, Ahat, X, lab);
      const double step = 1e-5;
      bool ok = true;
      double worst = 0.0;
      for (int wi = 0; wi < 2 && ok; ++wi) {
        const Matrix& grad = wi == 0 ? lg.dW1 : lg.dW2;
        for (Eigen::Index a = 0; a < grad.rows() && ok; ++a)
          for (Eigen::Index b = 0; b < grad.cols() && ok; ++b) {
            GcnParams hi = params, lo = params;
            (wi == 0 ? hi.W1 : hi.W2)(a, b) += step;
            (wi == 0 ? lo.W1 : lo.W2)(a, b) -= step;
            const double fd = (loss_and_grads(hi, Ahat, X, lab).loss -
                               loss_and_grads(lo, Ahat, X, lab).loss) /
                              (2.0 * step);
            const double err = std::abs(grad(a, b) - fd) /
                               (1.0 + std::max(std::abs(grad(a, b)),
                                               std::abs(fd)));
            worst = std::max(worst, err);
            ok = err <= 1e-4;
          }
      }
      chk.expect(ok, "instance " + chk.str(trial) +
                         ": relative gradient error " + chk.str(worst));
    }
  });

  criterion(6, "normalized energy curve rises monotonically from exactly 1",
            120.0, [](Checker& chk) {
    RunConfig cfg = defense_config();
    cfg.rates = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    cfg.repetitions = 20;
    const EnergyCurveReport curve = run_energy_curve(cfg);
    chk.expect(curve.rows.size() == 6, "expected six levels");
    chk.expect(curve.rows[0].rate == 0.0 && curve.rows[0].mean == 1.0,
               "level-0 ratio is " + chk.str(curve.rows[0].mean) +
                   ", expected exactly 1");
    for (std::size_t i = 1; i < curve.rows.size(); ++i)
      chk.expect(curve.rows[i].mean >= curve.rows[i - 1].mean,
                 "mean ratio decreased between level " + chk.str(i - 1) +
                     " and " + chk.str(i));
  });

  criterion(7, "denoising recovers accuracy lost to random insertion", 300.0,
            [](Checker& chk) {
    const RunConfig cfg = defense_config();
    const RunReport report = run_pipeline(cfg);
    chk.expect(!report.any_failed, "some cells failed");
    const Aggregate* clean_p = report.find_aggregate(0.0, "poisoned");
    const Aggregate* clean_d = report.find_aggregate(0.0, "denoised");
    const Aggregate* pert_p = report.find_aggregate(0.6, "poisoned");
    const Aggregate* pert_d = report.find_aggregate(0.6, "denoised");
    if (!clean_p || !clean_d || !pert_p || !pert_d) {
      chk.expect(false, "missing aggregates");
      return;
    }
    const double gap = pert_d->mean_pct - pert_p->mean_pct;
    chk.expect(gap >= 5.0,
               "rate 0.6: denoised " + chk.str(pert_d->mean_pct) +
                   "% vs poisoned " + chk.str(pert_p->mean_pct) +
                   "%, gap " + chk.str(gap) + " below 5 points");
    const double clean_diff = std::abs(clean_d->mean_pct - clean_p->mean_pct);
    chk.expect(clean_diff <= 2.0,
               "rate 0: arms differ by " + chk.str(clean_diff) + " points");
  });

  criterion(8, "p sweep completes deterministically with a stable schema",
            600.0, [](Checker& chk) {
    const fs::path base = fs::temp_directory_path() /
                          ("plapgnn_accept8_" + std::to_string(::getpid()));
    const std::string args =
        "p-sweep --n 120 --classes 4 --p-in 0.1 --p-out 0.01 "
        "--feature-dim 16 --separation 3 --noise-sd 0.5 --rate 0.6 --reps 2 "
        "--alpha 1 --beta 1 --c-mode exact --denoise-iters 2000 "
        "--rel-tol 1e-6 --lr-gnn 0.05 --epochs 150 --hidden 16 --seed 3 "
        "--p-values 1.5,2,2.4,3";
    std::string first;
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = base / ("run" + std::to_string(run));
      fs::create_directories(dir);
      const int rc = run_cli(args + " --out " + dir.string());
      chk.expect(rc == 0, "CLI exited with " + chk.str(rc));
      const std::string csv = slurp(dir / "p_sweep.csv");
      if (run == 0) {
        first = csv;
        std::istringstream ss(csv);
        std::string line;
        std::getline(ss, line);
        chk.expect(line == "p,accuracy_mean_pct,accuracy_sd_pct",
                   "unexpected header: " + line);
        std::vector<std::string> ps;
        while (std::getline(ss, line)) {
          const auto comma = line.find(',');
          chk.expect(comma != std::string::npos, "malformed row: " + line);
          ps.push_back(line.substr(0, comma));
          // remaining fields must parse as numbers
          double mean = 0.0, sd = 0.0;
          chk.expect(std::sscanf(line.c_str() + comma + 1, "%lf,%lf", &mean,
                                 &sd) == 2,
                     "non-numeric row: " + line);
        }
        chk.expect(ps == std::vector<std::string>{"1.5", "2", "2.4", "3"},
                   "p column mismatch");
      } else {
        chk.expect(csv == first, "second run produced different bytes");
      }
    }
    std::error_code ec;
    fs::remove_all(base, ec);
  });

  criterion(9, "pipeline reruns are byte-identical", 600.0, [](Checker& chk) {
    const fs::path base = fs::temp_directory_path() /
                          ("plapgnn_accept9_" + std::to_string(::getpid()));
    std::string first;
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = base / ("run" + std::to_string(run));
      fs::create_directories(dir);
      const int rc = run_cli(std::string("pipeline ") + kPipelineArgs +
                             " --out " + dir.string());
      chk.expect(rc == 0, "CLI exited with " + chk.str(rc));
      const std::string csv = slurp(dir / "results.csv");
      chk.expect(!csv.empty(), "results.csv missing or empty");
      if (run == 0)
        first = csv;
      else
        chk.expect(csv == first, "results.csv differs between runs");
    }
    std::error_code ec;
    fs::remove_all(base, ec);
  });

  std::cout << (g_failed == 0 ? "all criteria passed\n"
                              : std::to_string(g_failed) +
                                    " criteria failed\n");
  return g_failed;
}

#pragma once

#include <cstdint>
#include <vector>

#include "plapgnn/graph.hpp"

namespace plap {

// Node labels plus the train/val/test partition. y entries are class indices
// in [0, num_classes); -1 marks an unlabeled node, which may not appear in
// any mask.
struct Labels {
  Eigen::VectorXi y;
  int num_classes = 0;
  std::vector<std::uint8_t> train;
  std::vector<std::uint8_t> val;
  std::vector<std::uint8_t> test;

  Eigen::Index size() const { return y.size(); }
  void validate() const;  // mask sizes, disjointness, class range
};

struct GcnParams {
  Matrix W1;  // d x hidden
  Matrix W2;  // hidden x classes
};

struct TrainConfig {
  double learning_rate = 1e-2;
  int epochs = 250;
  int hidden = 16;
  int patience = 30;  // early-stop window on validation loss
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> train_acc;
  std::vector<double> val_acc;
  int best_epoch = -1;
};

struct TrainResult {
  GcnParams params;  // parameters at the best validation loss
  TrainHistory history;
  int epochs_run = 0;
};

// Symmetric renormalization with self-loops: D~^{-1/2} (A + I) D~^{-1/2}.
Matrix normalize_adjacency(const Matrix& A);

// Two-layer propagation: Ahat * relu(Ahat * X * W1) * W2.
Matrix gcn_forward(const GcnParams& params, const Matrix& Ahat, const Matrix& X);

struct LossGrads {
  double loss = 0.0;
  Matrix dW1;
  Matrix dW2;
};

// Mean cross-entropy over the training mask and its exact gradients.
LossGrads loss_and_grads(const GcnParams& params, const Matrix& Ahat,
                         const Matrix& X, const Labels& labels);

// Full-batch gradient descent; early-stops once validation loss fails to
// improve for `patience` epochs (never, if the validation mask is empty).
// Deterministic for a fixed seed.
TrainResult train_gcn(const Matrix& A, const Matrix& X, const Labels& labels,
                      const TrainConfig& cfg);

// Fraction of masked nodes whose argmax logit matches the label; argmax ties
// resolve to the lowest class index.
double evaluate(const GcnParams& params, const Matrix& Ahat, const Matrix& X,
                const Labels& labels, const std::vector<std::uint8_t>& mask);

}  // namespace plap

#include "plapgnn/gcn.hpp"

#include <cmath>
#include <string>

#include "plapgnn/rng.hpp"

namespace plap {

namespace {

// Row-wise softmax with the usual max shift. Also returns per-row
// cross-entropy loss terms logsumexp(z) - z[y].
Matrix softmax_rows(const Matrix& Z) {
  Matrix P(Z.rows(), Z.cols());
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    const double m = Z.row(i).maxCoeff();
    P.row(i) = (Z.row(i).array() - m).exp();
    P.row(i) /= P.row(i).sum();
  }
  return P;
}

double masked_ce(const Matrix& Z, const Eigen::VectorXi& y,
                 const std::vector<std::uint8_t>& mask) {
  double total = 0.0;
  long count = 0;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const double m = Z.row(i).maxCoeff();
    const double lse = m + std::log((Z.row(i).array() - m).exp().sum());
    total += lse - Z(i, y(i));
    ++count;
  }
  return total / static_cast<double>(count);
}

double masked_accuracy(const Matrix& Z, const Eigen::VectorXi& y,
                       const std::vector<std::uint8_t>& mask) {
  long hit = 0, count = 0;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    int arg = 0;
    for (Eigen::Index c = 1; c < Z.cols(); ++c)
      if (Z(i, c) > Z(i, arg)) arg = static_cast<int>(c);
    if (arg == y(i)) ++hit;
    ++count;
  }
  return static_cast<double>(hit) / static_cast<double>(count);
}

long mask_count(const std::vector<std::uint8_t>& mask) {
  long c = 0;
  for (auto b : mask) c += b ? 1 : 0;
  return c;
}

Matrix init_weight(Eigen::Index rows, Eigen::Index cols, rng::Rng& r) {
  const double s = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix W(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      W(i, j) = (2.0 * r.uniform01() - 1.0) * s;
  return W;
}

}  // namespace

void Labels::validate() const {
  const std::size_t n = static_cast<std::size_t>(y.size());
  if (train.size() != n || val.size() != n || test.size() != n)
    throw Error(ErrorCode::dimension_mismatch,
                "labels: mask length does not match node count");
  for (std::size_t i = 0; i < n; ++i) {
    const int in_masks = (train[i] ? 1 : 0) + (val[i] ? 1 : 0) + (test[i] ? 1 : 0);
    if (in_masks > 1)
      throw Error(ErrorCode::validation,
                  "labels: masks overlap at node " + std::to_string(i));
    const int c = y(static_cast<Eigen::Index>(i));
    if (in_masks > 0 && (c < 0 || c >= num_classes))
      throw Error(ErrorCode::validation,
                  "labels: masked node " + std::to_string(i) +
                      " has class " + std::to_string(c) + " outside [0, " +
                      std::to_string(num_classes) + ")");
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0))
    throw Error(ErrorCode::invalid_argument, "train: learning_rate must be >= 0");
  if (epochs < 1)
    throw Error(ErrorCode::invalid_argument, "train: epochs must be >= 1");
  if (hidden < 1)
    throw Error(ErrorCode::invalid_argument, "train: hidden must be >= 1");
  if (patience < 1)
    throw Error(ErrorCode::invalid_argument, "train: patience must be >= 1");
}

Matrix normalize_adjacency(const Matrix& A) {
  if (A.rows() != A.cols())
    throw Error(ErrorCode::dimension_mismatch,
                "normalize_adjacency: matrix must be square");
  if ((A.array() < 0.0).any())
    throw Error(ErrorCode::validation,
                "normalize_adjacency: negative adjacency entry");
  const Eigen::Index n = A.rows();
  Matrix At = A + Matrix::Identity(n, n);
  Vector dinv = At.rowwise().sum().array().rsqrt();
  return dinv.asDiagonal() * At * dinv.asDiagonal();
}

Matrix gcn_forward(const GcnParams& params, const Matrix& Ahat,
                   const Matrix& X) {
  if (Ahat.rows() != Ahat.cols() || Ahat.rows() != X.rows() ||
      X.cols() != params.W1.rows() || params.W1.cols() != params.W2.rows())
    throw Error(ErrorCode::dimension_mismatch, "gcn_forward: shape mismatch");
  const Matrix H = ((Ahat * X) * params.W1).cwiseMax(0.0);
  return (Ahat * H) * params.W2;
}

LossGrads loss_and_grads(const GcnParams& params, const Matrix& Ahat,
                         const Matrix& X, const Labels& labels) {
  labels.validate();
  if (X.rows() != labels.size() || Ahat.rows() != X.rows())
    throw Error(ErrorCode::dimension_mismatch, "loss_and_grads: shape mismatch");
  const long m = mask_count(labels.train);
  if (m == 0)
    throw Error(ErrorCode::invalid_argument,
                "loss_and_grads: empty training mask");

  const Matrix AX = Ahat * X;
  const Matrix Z1 = AX * params.W1;
  const Matrix H = Z1.cwiseMax(0.0);
  const Matrix AH = Ahat * H;
  const Matrix Z2 = AH * params.W2;

  LossGrads out;
  out.loss = masked_ce(Z2, labels.y, labels.train);

  // dL/dZ2 = (softmax - onehot) / |train| on masked rows, zero elsewhere
  Matrix dZ2 = Matrix::Zero(Z2.rows(), Z2.cols());
  const Matrix P = softmax_rows(Z2);
  for (Eigen::Index i = 0; i < Z2.rows(); ++i) {
    if (!labels.train[static_cast<std::size_t>(i)]) continue;
    dZ2.row(i) = P.row(i) / static_cast<double>(m);
    dZ2(i, labels.y(i)) -= 1.0 / static_cast<double>(m);
  }
  out.dW2 = AH.transpose() * dZ2;
  const Matrix dH = (Ahat * dZ2) * params.W2.transpose();
  const Matrix dZ1 = (Z1.array() > 0.0).select(dH, 0.0);
  out.dW1 = AX.transpose() * dZ1;
  return out;
}

TrainResult train_gcn(const Matrix& A, const Matrix& X, const Labels& labels,
                      const TrainConfig& cfg) {
  cfg.validate();
  labels.validate();
  if (mask_count(labels.train) == 0)
    throw Error(ErrorCode::invalid_argument, "train_gcn: empty training mask");
  const bool has_val = mask_count(labels.val) > 0;

  const Matrix Ahat = normalize_adjacency(A);
  const Matrix AX = Ahat * X;

  rng::Rng r(cfg.seed);
  GcnParams params{init_weight(X.cols(), cfg.hidden, r),
                   init_weight(cfg.hidden, labels.num_classes, r)};
  GcnParams best = params;

  TrainResult res;
  double best_val = std::numeric_limits<double>::infinity();
  int stale = 0;
  const long m = mask_count(labels.train);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Matrix Z1 = AX * params.W1;
    const Matrix H = Z1.cwiseMax(0.0);
    const Matrix AH = Ahat * H;
    const Matrix Z2 = AH * params.W2;

    const double train_loss = masked_ce(Z2, labels.y, labels.train);
    if (!std::isfinite(train_loss))
      throw Error(ErrorCode::numeric,
                  "train_gcn: non-finite loss at epoch " +
                      std::to_string(epoch));
    res.history.train_loss.push_back(train_loss);
    res.history.train_acc.push_back(
        masked_accuracy(Z2, labels.y, labels.train));
    if (has_val) {
      const double val_loss = masked_ce(Z2, labels.y, labels.val);
      res.history.val_loss.push_back(val_loss);
      res.history.val_acc.push_back(masked_accuracy(Z2, labels.y, labels.val));
      if (val_loss < best_val) {
        best_val = val_loss;
        best = params;
        res.history.best_epoch = epoch;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        res.epochs_run = epoch + 1;
        break;
      }
    }
    res.epochs_run = epoch + 1;

    Matrix dZ2 = Matrix::Zero(Z2.rows(), Z2.cols());
    const Matrix P = softmax_rows(Z2);
    for (Eigen::Index i = 0; i < Z2.rows(); ++i) {
      if (!labels.train[static_cast<std::size_t>(i)]) continue;
      dZ2.row(i) = P.row(i) / static_cast<double>(m);
      dZ2(i, labels.y(i)) -= 1.0 / static_cast<double>(m);
    }
    const Matrix dW2 = AH.transpose() * dZ2;
    const Matrix dH = (Ahat * dZ2) * params.W2.transpose();
    const Matrix dZ1 = (Z1.array() > 0.0).select(dH, 0.0);
    const Matrix dW1 = AX.transpose() * dZ1;
    params.W1 -= cfg.learning_rate * dW1;
    params.W2 -= cfg.learning_rate * dW2;
  }

  res.params = has_val ? best : params;
  if (!has_val) res.history.best_epoch = res.epochs_run - 1;
  return res;
}

double evaluate(const GcnParams& params, const Matrix& Ahat, const Matrix& X,
                const Labels& labels, const std::vector<std::uint8_t>& mask) {
  if (mask.size() != static_cast<std::size_t>(X.rows()))
    throw Error(ErrorCode::dimension_mismatch, "evaluate: mask length mismatch");
  if (mask_count(mask) == 0)
    throw Error(ErrorCode::invalid_argument, "evaluate: empty mask");
  const Matrix Z = gcn_forward(params, Ahat, X);
  return masked_accuracy(Z, labels.y, mask);
}

}  // namespace plap

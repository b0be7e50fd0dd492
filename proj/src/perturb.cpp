#include "plapgnn/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plapgnn/rng.hpp"

namespace plap {

namespace {

struct PairLists {
  std::vector<std::size_t> present;
  std::vector<std::size_t> absent;
};

PairLists scan_pairs(const Matrix& A) {
  PairLists out;
  const int n = static_cast<int>(A.rows());
  for_each_pair(n, [&](std::size_t k, int i, int j) {
    (A(i, j) != 0.0 ? out.present : out.absent).push_back(k);
  });
  return out;
}

std::size_t insertion_count(double rate, std::size_t m, std::size_t capacity) {
  const std::size_t want =
      static_cast<std::size_t>(std::floor(rate * static_cast<double>(m)));
  if (want > capacity)
    throw Error(ErrorCode::capacity,
                "edge insertion: requested " + std::to_string(want) +
                    " new edges but only " + std::to_string(capacity) +
                    " pairs are absent");
  return want;
}

Matrix insert_pairs(const Matrix& A, const std::vector<std::size_t>& picks,
                    std::size_t count) {
  Matrix B = A;
  const int n = static_cast<int>(A.rows());
  for (std::size_t t = 0; t < count; ++t) {
    const auto [i, j] = edge_pair(picks[t] + 1, n);
    B(i - 1, j - 1) = 1.0;
    B(j - 1, i - 1) = 1.0;
  }
  return B;
}

}  // namespace

void PerturbationSpec::validate() const {
  if (!(rate >= 0.0))
    throw Error(ErrorCode::invalid_argument,
                "perturbation rate must be >= 0");
}

Matrix random_edge_insertion(const Matrix& A, const PerturbationSpec& spec) {
  spec.validate();
  if (spec.kind != AttackKind::random_insert)
    throw Error(ErrorCode::invalid_argument,
                "random_edge_insertion: spec kind mismatch");
  weights_from_adjacency(A);  // shape/symmetry/diagonal contract
  auto lists = scan_pairs(A);
  const std::size_t count =
      insertion_count(spec.rate, lists.present.size(), lists.absent.size());
  rng::Rng r(spec.seed);
  r.partial_shuffle(lists.absent, count);
  return insert_pairs(A, lists.absent, count);
}

Matrix dissimilar_edge_insertion(const Matrix& A, const Matrix& X,
                                 const PerturbationSpec& spec) {
  spec.validate();
  if (spec.kind != AttackKind::dissimilar_insert)
    throw Error(ErrorCode::invalid_argument,
                "dissimilar_edge_insertion: spec kind mismatch");
  weights_from_adjacency(A);
  if (X.rows() != A.rows())
    throw Error(ErrorCode::dimension_mismatch,
                "dissimilar_edge_insertion: feature rows mismatch");
  auto lists = scan_pairs(A);
  const std::size_t count =
      insertion_count(spec.rate, lists.present.size(), lists.absent.size());

  const int n = static_cast<int>(A.rows());
  std::vector<double> dist(lists.absent.size());
  for (std::size_t t = 0; t < lists.absent.size(); ++t) {
    const auto [i, j] = edge_pair(lists.absent[t] + 1, n);
    dist[t] = (X.row(i - 1) - X.row(j - 1)).norm();
  }
  std::vector<std::size_t> order(lists.absent.size());
  for (std::size_t t = 0; t < order.size(); ++t) order[t] = t;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] > dist[b];
    return lists.absent[a] < lists.absent[b];
  });
  std::vector<std::size_t> picks(count);
  for (std::size_t t = 0; t < count; ++t) picks[t] = lists.absent[order[t]];
  return insert_pairs(A, picks, count);
}

PerturbationStats perturbation_stats(const Matrix& clean, const Matrix& pert) {
  if (clean.rows() != pert.rows() || clean.cols() != pert.cols())
    throw Error(ErrorCode::dimension_mismatch,
                "perturbation_stats: size mismatch");
  PerturbationStats s;
  long m_clean = 0;
  for_each_pair(static_cast<int>(clean.rows()), [&](std::size_t, int i, int j) {
    const bool before = clean(i, j) != 0.0;
    const bool after = pert(i, j) != 0.0;
    m_clean += before ? 1 : 0;
    if (!before && after) ++s.added;
    if (before && !after) ++s.removed;
  });
  s.ratio = (s.added + s.removed) == 0
                ? 0.0
                : static_cast<double>(s.added + s.removed) /
                      static_cast<double>(m_clean);
  return s;
}

}  // namespace plap

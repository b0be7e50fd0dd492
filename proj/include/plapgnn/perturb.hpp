#pragma once

#include <cstdint>

#include "plapgnn/graph.hpp"

namespace plap {

enum class AttackKind { random_insert, dissimilar_insert };

struct PerturbationSpec {
  AttackKind kind = AttackKind::random_insert;
  double rate = 0.0;  // fraction of the clean edge count
  std::uint64_t seed = 0;

  void validate() const;
};

// Inserts floor(rate * m) unit-weight edges chosen uniformly without
// replacement among absent pairs. Existing edges are never touched. With a
// fixed seed the chosen set at a lower rate is a prefix of the set at a
// higher rate, so energies are monotone across rates per seed.
Matrix random_edge_insertion(const Matrix& A, const PerturbationSpec& spec);

// Inserts the floor(rate * m) absent pairs with the largest feature distance
// ||x_i - x_j||_2, ties broken by edge index.
Matrix dissimilar_edge_insertion(const Matrix& A, const Matrix& X,
                                 const PerturbationSpec& spec);

struct PerturbationStats {
  long added = 0;
  long removed = 0;
  double ratio = 0.0;  // (added + removed) / clean edge count
};

PerturbationStats perturbation_stats(const Matrix& clean, const Matrix& pert);

}  // namespace plap

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "plapgnn/perturb.hpp"
#include "plapgnn/rng.hpp"

using namespace plap;

namespace {

Matrix ring_graph(int n) {
  Matrix A = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    A(i, j) = A(j, i) = 1.0;
  }
  return A;
}

long edge_count(const Matrix& A) {
  long m = 0;
  for_each_pair(static_cast<int>(A.rows()), [&](std::size_t, int i, int j) {
    if (A(i, j) != 0.0) ++m;
  });
  return m;
}

// two feature clusters split across the node range
Matrix cluster_features(int n, double gap, rng::Rng& r) {
  Matrix X(n, 2);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = (i < n / 2 ? 0.0 : gap) + 0.05 * r.normal();
    X(i, 1) = 0.05 * r.normal();
  }
  return X;
}

}  // namespace

TEST_CASE("random_edge_insertion") {
  const Matrix A = ring_graph(12);
  SUBCASE("rate zero is the identity") {
    const Matrix B =
        random_edge_insertion(A, {AttackKind::random_insert, 0.0, 42});
    CHECK(B == A);
  }
  SUBCASE("rate one doubles the edge count") {
    const Matrix B =
        random_edge_insertion(A, {AttackKind::random_insert, 1.0, 42});
    CHECK(edge_count(B) == 2 * edge_count(A));
  }
  SUBCASE("existing edges survive and weights are one") {
    const Matrix B =
        random_edge_insertion(A, {AttackKind::random_insert, 0.7, 1});
    for_each_pair(12, [&](std::size_t, int i, int j) {
      if (A(i, j) != 0.0) CHECK(B(i, j) == A(i, j));
      if (A(i, j) == 0.0 && B(i, j) != 0.0) CHECK(B(i, j) == 1.0);
    });
    CHECK(B == B.transpose());
    CHECK(B.diagonal().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("deterministic per seed, sensitive to it") {
    const Matrix big = ring_graph(100);
    const Matrix b1 =
        random_edge_insertion(big, {AttackKind::random_insert, 0.5, 9});
    const Matrix b2 =
        random_edge_insertion(big, {AttackKind::random_insert, 0.5, 9});
    const Matrix b3 =
        random_edge_insertion(big, {AttackKind::random_insert, 0.5, 10});
    CHECK(b1 == b2);
    CHECK(b1 != b3);
  }
  SUBCASE("same seed nests across rates") {
    const Matrix big = ring_graph(60);
    const Matrix lo =
        random_edge_insertion(big, {AttackKind::random_insert, 0.3, 5});
    const Matrix hi =
        random_edge_insertion(big, {AttackKind::random_insert, 0.9, 5});
    for_each_pair(60, [&](std::size_t, int i, int j) {
      if (lo(i, j) != 0.0) CHECK(hi(i, j) != 0.0);
    });
  }
  SUBCASE("capacity error when the graph cannot absorb the request") {
    Matrix full = Matrix::Ones(4, 4) - Matrix::Identity(4, 4);
    full(0, 1) = full(1, 0) = 0.0;  // 5 edges, 1 absent pair
    CHECK_THROWS_AS(
        random_edge_insertion(full, {AttackKind::random_insert, 1.0, 0}),
        Error);
  }
  SUBCASE("kind mismatch is rejected") {
    CHECK_THROWS_AS(
        random_edge_insertion(A, {AttackKind::dissimilar_insert, 0.1, 0}),
        Error);
  }
}

TEST_CASE("dissimilar_edge_insertion") {
  rng::Rng r(3);
  const int n = 20;
  const Matrix X = cluster_features(n, 8.0, r);
  // clean graph: intra-cluster rings
  Matrix A = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n / 2; ++i) A(i, i + 1) = A(i + 1, i) = 1.0;
  for (int i = n / 2; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = 1.0;

  SUBCASE("rate zero is the identity") {
    const Matrix B =
        dissimilar_edge_insertion(A, X, {AttackKind::dissimilar_insert, 0.0, 0});
    CHECK(B == A);
  }
  SUBCASE("all inserted edges bridge the clusters") {
    const Matrix B =
        dissimilar_edge_insertion(A, X, {AttackKind::dissimilar_insert, 0.5, 0});
    for_each_pair(n, [&](std::size_t, int i, int j) {
      if (A(i, j) == 0.0 && B(i, j) != 0.0)
        CHECK(((i < n / 2) != (j < n / 2)));
    });
    CHECK(edge_count(B) > edge_count(A));
  }
  SUBCASE("deterministic regardless of seed") {
    const Matrix b1 =
        dissimilar_edge_insertion(A, X, {AttackKind::dissimilar_insert, 0.4, 1});
    const Matrix b2 =
        dissimilar_edge_insertion(A, X, {AttackKind::dissimilar_insert, 0.4, 99});
    CHECK(b1 == b2);
  }
  SUBCASE("raises the energy at least as much as random insertion") {
    double dissimilar_total = 0.0, random_total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Matrix Bd = dissimilar_edge_insertion(
          A, X, {AttackKind::dissimilar_insert, 0.5, seed});
      const Matrix Br =
          random_edge_insertion(A, {AttackKind::random_insert, 0.5, seed});
      dissimilar_total += dirichlet_energy(Bd, X);
      random_total += dirichlet_energy(Br, X);
    }
    CHECK(dissimilar_total / 20.0 > random_total / 20.0);
  }
}

TEST_CASE("insertion never lowers the Dirichlet energy") {
  rng::Rng r(7);
  const int n = 30;
  const Matrix A = ring_graph(n);
  Matrix X(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) X(i, j) = r.normal();
  const double base = dirichlet_energy(A, X);
  for (double rate : {0.2, 0.5, 1.0}) {
    const Matrix B = random_edge_insertion(
        A, {AttackKind::random_insert, rate, 11});
    CHECK(dirichlet_energy(B, X) >= base);
  }
}

TEST_CASE("perturbation_stats") {
  const Matrix A = ring_graph(10);  // 10 edges
  SUBCASE("identical graphs") {
    const auto s = perturbation_stats(A, A);
    CHECK(s.added == 0);
    CHECK(s.removed == 0);
    CHECK(s.ratio == 0.0);
  }
  SUBCASE("one inserted edge") {
    Matrix B = A;
    B(0, 5) = B(5, 0) = 1.0;
    const auto s = perturbation_stats(A, B);
    CHECK(s.added == 1);
    CHECK(s.removed == 0);
    CHECK(s.ratio == 0.1);
  }
  SUBCASE("removals are counted too") {
    Matrix B = A;
    B(0, 1) = B(1, 0) = 0.0;
    const auto s = perturbation_stats(A, B);
    CHECK(s.added == 0);
    CHECK(s.removed == 1);
    CHECK(s.ratio == 0.1);
  }
  SUBCASE("consistent with random insertion bookkeeping") {
    // 100-edge graph: ring plus chords
    const int n = 50;
    Matrix A2 = ring_graph(n);
    for (int i = 0; i < n; ++i) {
      const int j = (i + 2) % n;
      A2(i, j) = A2(j, i) = 1.0;
    }
    REQUIRE(edge_count(A2) == 100);
    const Matrix B =
        random_edge_insertion(A2, {AttackKind::random_insert, 0.2, 17});
    const auto s = perturbation_stats(A2, B);
    CHECK(s.added == 20);
    CHECK(s.removed == 0);
    CHECK(s.ratio == 0.2);
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(perturbation_stats(A, ring_graph(9)), Error);
  }
}

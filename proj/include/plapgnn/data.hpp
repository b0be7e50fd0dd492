#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plapgnn/gcn.hpp"
#include "plapgnn/graph.hpp"

namespace plap {

struct Dataset {
  std::string name;
  Matrix A;  // symmetric, non-negative, zero diagonal
  Matrix X;  // n x d
  Labels labels;
  std::vector<long long> node_ids;  // original ids, ascending; index = row

  int n() const { return static_cast<int>(A.rows()); }
  long long num_edges() const;
  void validate() const;
};

struct SynthSpec {
  int n = 200;
  int classes = 4;
  double p_in = 0.1;
  double p_out = 0.01;
  int feature_dim = 16;
  double feature_separation = 3.0;  // distance scale of the class means
  double noise_sd = 0.5;
  std::uint64_t seed = 0;
  double split_train = 0.8;
  double split_val = 0.1;
  double split_test = 0.1;

  void validate() const;
};

// Plain-text ingestion. Edge file: "i j [w]" per line (w defaults to 1);
// feature file: "i v1 ... vd"; label file: "i c". '#' starts a comment,
// blank lines are skipped, LF and CRLF both accepted. Node ids are remapped
// to 0..n-1 in ascending id order (the original ids are kept in node_ids).
// Masks come back empty; see make_stratified_masks.
Dataset load_dataset(const std::string& edge_file,
                     const std::string& feature_file,
                     const std::string& label_file);

// Canonical form: edges sorted by (min,max) with the smaller id first,
// features and labels sorted by id, single-space separators, shortest
// round-trip number formatting, LF endings. Saving a loaded canonical file
// reproduces it byte for byte. Any empty path skips that file; unlabeled
// nodes produce no label line.
void save_dataset(const Dataset& ds, const std::string& edge_file,
                  const std::string& feature_file,
                  const std::string& label_file);

// Uniform class assignment, Bernoulli(p_in)/Bernoulli(p_out) edges, class
// means at feature_separation-scaled simplex vertices plus isotropic noise,
// stratified masks. Deterministic per seed. Requires feature_dim >= classes.
Dataset generate_planted_partition(const SynthSpec& spec);

// Per-class shuffled split at the given fractions; each class's train count
// is within one node of its exact share. Unlabeled nodes stay unmasked.
void make_stratified_masks(Labels& labels, double f_train, double f_val,
                           double f_test, std::uint64_t seed);

}  // namespace plap

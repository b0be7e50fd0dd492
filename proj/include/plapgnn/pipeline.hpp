#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plapgnn/data.hpp"
#include "plapgnn/denoise.hpp"
#include "plapgnn/gcn.hpp"
#include "plapgnn/perturb.hpp"

namespace plap {

// Experiment manifest. Every field can be set from a "key = value" config
// file or the matching CLI flag (flags win); see config_keys() for the key
// names and apply_config_key for parsing.
struct RunConfig {
  std::string name = "synth";
  // dataset source: files when edges_file is non-empty, synthetic otherwise
  std::string edges_file;
  std::string features_file;
  std::string labels_file;
  SynthSpec synth;

  AttackKind attack = AttackKind::random_insert;
  std::vector<double> rates = {0.0};

  DenoiseConfig denoise;
  TrainConfig train;

  std::vector<double> p_values = {1.5, 2.0, 2.4, 3.0};

  std::uint64_t seed = 0;
  int repetitions = 1;
  double threshold = 0.0;  // drop denoised weights below this; 0 disables
  bool normalize_features = false;
  std::string out_dir = ".";

  bool use_synth() const { return edges_file.empty(); }
  void validate() const;
};

// Parsing and canonical serialization of the manifest.
void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value);
// Current value of one key as serialize_config would print it.
std::string get_config_key(const RunConfig& cfg, const std::string& key);
void load_config_file(RunConfig& cfg, const std::string& path);
std::string serialize_config(const RunConfig& cfg);
std::vector<std::string> config_keys();

// One (rate, seed) experiment cell. Cells that fail carry the reason in
// status and leave the optionals empty.
struct CellResult {
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::optional<double> acc_poisoned_pct;
  std::optional<double> acc_denoised_pct;
  std::optional<double> dirichlet_ratio;
  std::optional<int> denoise_iterations;
  std::optional<bool> denoise_converged;
  std::optional<double> objective_initial;
  std::optional<double> objective_final;
};

struct Aggregate {
  double rate = 0.0;
  std::string arm;  // "poisoned" | "denoised"
  double mean_pct = 0.0;
  double sd_pct = 0.0;
};

struct RunReport {
  std::string name;
  std::vector<CellResult> cells;
  std::vector<Aggregate> aggregates;
  bool any_failed = false;

  std::string results_csv() const;
  std::string to_json() const;
  const Aggregate* find_aggregate(double rate, const std::string& arm) const;
};

// Per level and repetition: perturb, rebuild the Laplacian, denoise, train
// one classifier on the denoised graph and one directly on the perturbed
// graph (same seed and instance), evaluate both on the test mask.
RunReport run_pipeline(const RunConfig& cfg);

struct EnergyCurveReport {
  struct Row {
    double rate;
    double mean;
    double sd;
  };
  std::vector<Row> rows;
  std::string csv() const;
  std::string to_json() const;
};

// Normalized Dirichlet energy per insertion rate, aggregated over seeds.
EnergyCurveReport run_energy_curve(const RunConfig& cfg);

struct PSweepReport {
  struct Row {
    double p;
    double mean_pct;
    double sd_pct;
  };
  std::vector<Row> rows;
  bool any_failed = false;
  std::string csv() const;
  std::string to_json() const;
};

// Full pipeline per p value at the largest configured rate; reports the
// denoised-arm accuracy.
PSweepReport run_p_sweep(const RunConfig& cfg);

}  // namespace plap

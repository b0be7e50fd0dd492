#include "plapgnn/plapgnn.h"

#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <string>

#include "plapgnn/data.hpp"
#include "plapgnn/denoise.hpp"
#include "plapgnn/gcn.hpp"
#include "plapgnn/perturb.hpp"
#include "plapgnn/pipeline.hpp"
#include "plapgnn/rng.hpp"

struct plap_config {
  plap::RunConfig cfg;
  std::string serialized;
};

struct plap_dataset {
  plap::Dataset ds;
};

struct plap_denoise_result {
  plap::DenoiseResult res;
  std::string trace_csv;
};

struct plap_train_result {
  double acc_train = -1.0;
  double acc_val = -1.0;
  double acc_test = -1.0;
  int epochs_run = 0;
  std::string history_csv;
};

struct plap_report {
  std::string json;
  std::map<std::string, std::string> csv;
  bool any_failed = false;
};

namespace {

thread_local std::string g_last_error;

// matches the pipeline's per-repetition stream derivation so one-off calls
// reproduce repetition 0 of a pipeline run
constexpr std::uint64_t kDataRole = 1;
constexpr std::uint64_t kSplitRole = 2;
constexpr std::uint64_t kGcnRole = 4;

plap_status code_of(const plap::Error& e) {
  switch (e.code()) {
    case plap::ErrorCode::invalid_argument:
      return PLAP_ERR_INVALID_ARGUMENT;
    case plap::ErrorCode::dimension_mismatch:
      return PLAP_ERR_DIMENSION;
    case plap::ErrorCode::parse:
      return PLAP_ERR_PARSE;
    case plap::ErrorCode::validation:
      return PLAP_ERR_VALIDATION;
    case plap::ErrorCode::capacity:
      return PLAP_ERR_CAPACITY;
    case plap::ErrorCode::numeric:
      return PLAP_ERR_NUMERIC;
    case plap::ErrorCode::io:
      return PLAP_ERR_IO;
  }
  return PLAP_ERR_UNKNOWN;
}

template <typename F>
plap_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PLAP_OK;
  } catch (const plap::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PLAP_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return PLAP_ERR_UNKNOWN;
  }
}

plap_status require(bool ok, const char* message) {
  if (ok) return PLAP_OK;
  g_last_error = message;
  return PLAP_ERR_INVALID_ARGUMENT;
}

std::string fmt_csv_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

extern "C" {

const char* plap_version(void) { return "0.1.0"; }

const char* plap_last_error(void) { return g_last_error.c_str(); }

/* ---- configuration ------------------------------------------------------ */

plap_config* plap_config_new(void) { return new plap_config(); }

void plap_config_free(plap_config* cfg) { delete cfg; }

plap_status plap_config_set(plap_config* cfg, const char* key,
                            const char* value) {
  if (auto s = require(cfg && key && value, "plap_config_set: null argument"))
    return s;
  return guarded([&] { plap::apply_config_key(cfg->cfg, key, value); });
}

plap_status plap_config_load_file(plap_config* cfg, const char* path) {
  if (auto s = require(cfg && path, "plap_config_load_file: null argument"))
    return s;
  return guarded([&] { plap::load_config_file(cfg->cfg, path); });
}

const char* plap_config_serialize(plap_config* cfg) {
  if (!cfg) return "";
  cfg->serialized = plap::serialize_config(cfg->cfg);
  return cfg->serialized.c_str();
}

const char* plap_config_get(plap_config* cfg, const char* key) {
  if (!cfg || !key) return nullptr;
  try {
    cfg->serialized = plap::get_config_key(cfg->cfg, key);
    return cfg->serialized.c_str();
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return nullptr;
  }
}

/* ---- datasets ------------------------------------------------------------ */

plap_status plap_dataset_load(const char* edge_file, const char* feature_file,
                              const char* label_file, plap_dataset** out) {
  if (auto s = require(edge_file && feature_file && label_file && out,
                       "plap_dataset_load: null argument"))
    return s;
  return guarded([&] {
    auto handle = std::make_unique<plap_dataset>();
    handle->ds = plap::load_dataset(edge_file, feature_file, label_file);
    *out = handle.release();
  });
}

plap_status plap_dataset_generate(const plap_config* cfg, plap_dataset** out) {
  if (auto s = require(cfg && out, "plap_dataset_generate: null argument"))
    return s;
  return guarded([&] {
    plap::SynthSpec spec = cfg->cfg.synth;
    spec.seed = plap::rng::mix(cfg->cfg.seed, kDataRole);
    auto handle = std::make_unique<plap_dataset>();
    handle->ds = plap::generate_planted_partition(spec);
    handle->ds.name = cfg->cfg.name;
    *out = handle.release();
  });
}

plap_status plap_dataset_save(const plap_dataset* ds, const char* edge_file,
                              const char* feature_file,
                              const char* label_file) {
  if (auto s = require(ds != nullptr, "plap_dataset_save: null dataset"))
    return s;
  return guarded([&] {
    plap::save_dataset(ds->ds, edge_file ? edge_file : "",
                       feature_file ? feature_file : "",
                       label_file ? label_file : "");
  });
}

void plap_dataset_free(plap_dataset* ds) { delete ds; }

int64_t plap_dataset_num_nodes(const plap_dataset* ds) {
  return ds ? ds->ds.n() : 0;
}

int64_t plap_dataset_num_edges(const plap_dataset* ds) {
  return ds ? ds->ds.num_edges() : 0;
}

int64_t plap_dataset_num_classes(const plap_dataset* ds) {
  return ds ? ds->ds.labels.num_classes : 0;
}

int64_t plap_dataset_feature_dim(const plap_dataset* ds) {
  return ds ? ds->ds.X.cols() : 0;
}

int plap_dataset_has_split(const plap_dataset* ds) {
  if (!ds) return 0;
  for (auto b : ds->ds.labels.train)
    if (b) return 1;
  return 0;
}

plap_status plap_dataset_split(plap_dataset* ds, double f_train, double f_val,
                               double f_test, uint64_t seed) {
  if (auto s = require(ds != nullptr, "plap_dataset_split: null dataset"))
    return s;
  return guarded([&] {
    plap::make_stratified_masks(ds->ds.labels, f_train, f_val, f_test,
                                plap::rng::mix(seed, kSplitRole));
  });
}

plap_status plap_dataset_perturb(const plap_dataset* ds, const char* kind,
                                 double rate, uint64_t seed,
                                 plap_dataset** out) {
  if (auto s = require(ds && kind && out, "plap_dataset_perturb: null argument"))
    return s;
  return guarded([&] {
    plap::PerturbationSpec spec;
    spec.rate = rate;
    spec.seed = seed;
    const std::string k = kind;
    auto handle = std::make_unique<plap_dataset>(*ds);
    if (k == "random") {
      spec.kind = plap::AttackKind::random_insert;
      handle->ds.A = plap::random_edge_insertion(ds->ds.A, spec);
    } else if (k == "dissimilar") {
      spec.kind = plap::AttackKind::dissimilar_insert;
      handle->ds.A = plap::dissimilar_edge_insertion(ds->ds.A, ds->ds.X, spec);
    } else {
      throw plap::Error(plap::ErrorCode::invalid_argument,
                        "perturb kind must be 'random' or 'dissimilar', got '" +
                            k + "'");
    }
    *out = handle.release();
  });
}

plap_status plap_dataset_diff(const plap_dataset* clean,
                              const plap_dataset* perturbed, int64_t* added,
                              int64_t* removed, double* ratio) {
  if (auto s = require(clean && perturbed, "plap_dataset_diff: null dataset"))
    return s;
  return guarded([&] {
    const auto stats = plap::perturbation_stats(clean->ds.A, perturbed->ds.A);
    if (added) *added = stats.added;
    if (removed) *removed = stats.removed;
    if (ratio) *ratio = stats.ratio;
  });
}

plap_status plap_dataset_dirichlet_energy(const plap_dataset* ds, double p,
                                          double* out) {
  if (auto s = require(ds && out, "plap_dataset_dirichlet_energy: null argument"))
    return s;
  return guarded([&] {
    *out = p == 2.0 ? plap::dirichlet_energy(ds->ds.A, ds->ds.X)
                    : plap::p_dirichlet_energy(ds->ds.A, ds->ds.X, p);
  });
}

/* ---- denoising ------------------------------------------------------------ */

plap_status plap_denoise(const plap_dataset* ds, const plap_config* cfg,
                         plap_denoise_result** out) {
  if (auto s = require(ds && cfg && out, "plap_denoise: null argument"))
    return s;
  return guarded([&] {
    const plap::Matrix phi_n =
        plap::laplacian_op(plap::weights_from_adjacency(ds->ds.A));
    auto handle = std::make_unique<plap_denoise_result>();
    handle->res = plap::run_denoise(phi_n, ds->ds.X, cfg->cfg.denoise);
    *out = handle.release();
  });
}

void plap_denoise_result_free(plap_denoise_result* res) { delete res; }

int64_t plap_denoise_result_iterations(const plap_denoise_result* res) {
  return res ? res->res.iterations_run : 0;
}

int plap_denoise_result_converged(const plap_denoise_result* res) {
  return res && res->res.converged ? 1 : 0;
}

int64_t plap_denoise_result_trace_len(const plap_denoise_result* res) {
  return res ? static_cast<int64_t>(res->res.objective_trace.size()) : 0;
}

double plap_denoise_result_objective(const plap_denoise_result* res,
                                     int64_t i) {
  if (!res || i < 0 ||
      i >= static_cast<int64_t>(res->res.objective_trace.size())) {
    g_last_error = "plap_denoise_result_objective: index out of range";
    return 0.0;
  }
  return res->res.objective_trace[static_cast<std::size_t>(i)];
}

const char* plap_denoise_result_trace_csv(plap_denoise_result* res) {
  if (!res) return "";
  std::string out = "iteration,objective\n";
  for (std::size_t t = 0; t < res->res.objective_trace.size(); ++t)
    out += std::to_string(t) + "," +
           fmt_csv_double(res->res.objective_trace[t]) + "\n";
  res->trace_csv = std::move(out);
  return res->trace_csv.c_str();
}

plap_status plap_denoise_result_apply(const plap_denoise_result* res,
                                      const plap_dataset* base,
                                      double threshold, plap_dataset** out) {
  if (auto s = require(res && base && out,
                       "plap_denoise_result_apply: null argument"))
    return s;
  return guarded([&] {
    if (res->res.w_star.n != base->ds.n())
      throw plap::Error(plap::ErrorCode::dimension_mismatch,
                        "denoise result and dataset node counts differ");
    auto handle = std::make_unique<plap_dataset>(*base);
    plap::Matrix A = plap::adjacency_from_weights(res->res.w_star);
    if (threshold > 0.0)
      A = (A.array() < threshold).select(0.0, A);
    handle->ds.A = std::move(A);
    *out = handle.release();
  });
}

/* ---- classifier ------------------------------------------------------------ */

plap_status plap_train(const plap_dataset* ds, const plap_config* cfg,
                       plap_train_result** out) {
  if (auto s = require(ds && cfg && out, "plap_train: null argument")) return s;
  return guarded([&] {
    plap::TrainConfig tc = cfg->cfg.train;
    tc.seed = plap::rng::mix(cfg->cfg.seed, kGcnRole);
    const auto result = plap::train_gcn(ds->ds.A, ds->ds.X, ds->ds.labels, tc);

    auto handle = std::make_unique<plap_train_result>();
    handle->epochs_run = result.epochs_run;
    const plap::Matrix Ahat = plap::normalize_adjacency(ds->ds.A);
    auto acc = [&](const std::vector<std::uint8_t>& mask) {
      for (auto b : mask)
        if (b)
          return plap::evaluate(result.params, Ahat, ds->ds.X, ds->ds.labels,
                                mask);
      return -1.0;
    };
    handle->acc_train = acc(ds->ds.labels.train);
    handle->acc_val = acc(ds->ds.labels.val);
    handle->acc_test = acc(ds->ds.labels.test);

    std::string csv = "epoch,train_loss,train_acc,val_loss,val_acc\n";
    const auto& h = result.history;
    for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
      csv += std::to_string(e) + "," + fmt_csv_double(h.train_loss[e]) + "," +
             fmt_csv_double(h.train_acc[e]) + ",";
      csv += e < h.val_loss.size() ? fmt_csv_double(h.val_loss[e]) : "";
      csv += ",";
      csv += e < h.val_acc.size() ? fmt_csv_double(h.val_acc[e]) : "";
      csv += "\n";
    }
    handle->history_csv = std::move(csv);
    *out = handle.release();
  });
}

void plap_train_result_free(plap_train_result* res) { delete res; }

double plap_train_result_accuracy(const plap_train_result* res,
                                  const char* split) {
  if (!res || !split) {
    g_last_error = "plap_train_result_accuracy: null argument";
    return -1.0;
  }
  const std::string s = split;
  if (s == "train") return res->acc_train;
  if (s == "val") return res->acc_val;
  if (s == "test") return res->acc_test;
  g_last_error = "plap_train_result_accuracy: split must be train|val|test";
  return -1.0;
}

int64_t plap_train_result_epochs(const plap_train_result* res) {
  return res ? res->epochs_run : 0;
}

const char* plap_train_result_history_csv(plap_train_result* res) {
  return res ? res->history_csv.c_str() : "";
}

/* ---- experiment runners ------------------------------------------------------ */

plap_status plap_pipeline_run(const plap_config* cfg, plap_report** out) {
  if (auto s = require(cfg && out, "plap_pipeline_run: null argument")) return s;
  return guarded([&] {
    const plap::RunReport report = plap::run_pipeline(cfg->cfg);
    auto handle = std::make_unique<plap_report>();
    handle->json = report.to_json();
    handle->csv["results"] = report.results_csv();
    handle->any_failed = report.any_failed;
    *out = handle.release();
  });
}

plap_status plap_energy_curve_run(const plap_config* cfg, plap_report** out) {
  if (auto s = require(cfg && out, "plap_energy_curve_run: null argument"))
    return s;
  return guarded([&] {
    const plap::EnergyCurveReport report = plap::run_energy_curve(cfg->cfg);
    auto handle = std::make_unique<plap_report>();
    handle->json = report.to_json();
    handle->csv["energy"] = report.csv();
    *out = handle.release();
  });
}

plap_status plap_p_sweep_run(const plap_config* cfg, plap_report** out) {
  if (auto s = require(cfg && out, "plap_p_sweep_run: null argument")) return s;
  return guarded([&] {
    const plap::PSweepReport report = plap::run_p_sweep(cfg->cfg);
    auto handle = std::make_unique<plap_report>();
    handle->json = report.to_json();
    handle->csv["p_sweep"] = report.csv();
    handle->any_failed = report.any_failed;
    *out = handle.release();
  });
}

void plap_report_free(plap_report* report) { delete report; }

const char* plap_report_json(const plap_report* report) {
  return report ? report->json.c_str() : "";
}

const char* plap_report_csv(const plap_report* report, const char* which) {
  if (!report || !which) return nullptr;
  const auto it = report->csv.find(which);
  return it == report->csv.end() ? nullptr : it->second.c_str();
}

int plap_report_any_failed(const plap_report* report) {
  return report && report->any_failed ? 1 : 0;
}

}  // extern "C"

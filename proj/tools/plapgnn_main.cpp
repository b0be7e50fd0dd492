// Command-line front end; everything of substance happens behind the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plapgnn/plapgnn.h"

namespace {

struct ConfigHandle {
  plap_config* ptr = plap_config_new();
  ~ConfigHandle() { plap_config_free(ptr); }
};

int fail(plap_status st, const std::string& where) {
  std::cerr << "error: " << where << ": " << plap_last_error()
            << " (status " << static_cast<int>(st) << ")\n";
  return 1;
}

// Maps CLI flags onto config keys; an optional config file is applied first
// so explicit flags always win.
struct FlagBinder {
  plap_config* cfg;
  struct Bound {
    CLI::Option* opt;
    std::string key;
    std::shared_ptr<std::string> value;
  };
  std::vector<Bound> bound;
  std::shared_ptr<std::string> config_path = std::make_shared<std::string>();
  CLI::Option* config_opt = nullptr;

  explicit FlagBinder(plap_config* c) : cfg(c) {}

  void add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& desc) {
    auto value = std::make_shared<std::string>();
    CLI::Option* opt = app->add_option(flag, *value, desc);
    bound.push_back({opt, key, value});
  }

  void add_flag(CLI::App* app, const std::string& flag, const std::string& key,
                const std::string& desc) {
    auto value = std::make_shared<std::string>("1");
    CLI::Option* opt = app->add_flag(flag, desc);
    bound.push_back({opt, key, value});
  }

  void add_config(CLI::App* app) {
    config_opt = app->add_option(
        "--config", *config_path,
        "config file with 'key = value' lines; flags override it");
  }

  void add_dataset(CLI::App* app) {
    add(app, "--edges", "edges_file", "edge list file (enables file input)");
    add(app, "--features", "features_file", "feature file");
    add(app, "--labels", "labels_file", "label file");
    add(app, "--name", "name", "dataset name used in reports");
    add(app, "--n", "synth_n", "synthetic node count");
    add(app, "--classes", "synth_classes", "synthetic class count");
    add(app, "--p-in", "synth_p_in", "intra-class edge probability");
    add(app, "--p-out", "synth_p_out", "inter-class edge probability");
    add(app, "--feature-dim", "synth_feature_dim", "synthetic feature dim");
    add(app, "--separation", "synth_separation", "class mean separation");
    add(app, "--noise-sd", "synth_noise_sd", "feature noise scale");
    add(app, "--split-train", "split_train", "train fraction");
    add(app, "--split-val", "split_val", "validation fraction");
    add(app, "--split-test", "split_test", "test fraction");
    add_flag(app, "--normalize-features", "normalize_features",
             "L1-normalize feature rows");
  }

  void add_denoise(CLI::App* app) {
    add(app, "--alpha", "alpha", "fidelity weight");
    add(app, "--beta", "beta", "regularization weight");
    add(app, "--p", "p", "norm exponent (> 1)");
    add(app, "--denoise-iters", "denoise_max_iters", "max solver iterations");
    add(app, "--rel-tol", "denoise_rel_tol", "relative-change stop threshold");
    add(app, "--step-mode", "step_mode", "lipschitz | fixed");
    add(app, "--eta-w", "eta_w", "step size for fixed step mode");
    add(app, "--c-mode", "c_mode", "algorithm1 | exact");
    add(app, "--support", "support", "full | observed");
    add(app, "--threshold", "threshold",
        "drop denoised weights below this (0 = keep all)");
  }

  void add_train(CLI::App* app) {
    add(app, "--lr-gnn", "lr_gnn", "classifier learning rate");
    add(app, "--epochs", "epochs", "training epochs");
    add(app, "--hidden", "hidden", "hidden width");
    add(app, "--patience", "patience", "early-stop window");
  }

  void add_run(CLI::App* app) {
    add(app, "--seed", "seed", "base seed");
    add(app, "--reps", "reps", "repetitions (seeds per level)");
    add(app, "--attack", "attack", "random | dissimilar");
    add(app, "--rates", "rates", "comma-separated perturbation rates");
    add(app, "--out", "out_dir", "output directory");
  }

  // returns 0 on success
  int apply() {
    if (config_opt != nullptr && config_opt->count() > 0)
      if (plap_status st = plap_config_load_file(cfg, config_path->c_str()))
        return fail(st, "--config");
    for (const auto& b : bound)
      if (b.opt->count() > 0)
        if (plap_status st = plap_config_set(cfg, b.key.c_str(), b.value->c_str()))
          return fail(st, b.key);
    return 0;
  }
};

std::string get(plap_config* cfg, const char* key) {
  const char* v = plap_config_get(cfg, key);
  return v ? v : "";
}

int write_file(const std::string& dir, const std::string& name,
               const char* content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << (content ? content : ""))) {
    std::cerr << "error: cannot write " << path << "\n";
    return 1;
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

// Load or generate per the config; optionally ensure split masks exist.
int acquire_dataset(plap_config* cfg, bool want_split, plap_dataset** out) {
  plap_status st;
  if (!get(cfg, "edges_file").empty()) {
    st = plap_dataset_load(get(cfg, "edges_file").c_str(),
                           get(cfg, "features_file").c_str(),
                           get(cfg, "labels_file").c_str(), out);
    if (st) return fail(st, "load dataset");
    if (want_split && !plap_dataset_has_split(*out)) {
      st = plap_dataset_split(*out, std::atof(get(cfg, "split_train").c_str()),
                              std::atof(get(cfg, "split_val").c_str()),
                              std::atof(get(cfg, "split_test").c_str()),
                              std::strtoull(get(cfg, "seed").c_str(), nullptr, 10));
      if (st) return fail(st, "split dataset");
    }
  } else {
    st = plap_dataset_generate(cfg, out);
    if (st) return fail(st, "generate dataset");
  }
  return 0;
}

void print_summary(plap_dataset* ds) {
  std::cout << "nodes: " << plap_dataset_num_nodes(ds)
            << "  edges: " << plap_dataset_num_edges(ds)
            << "  classes: " << plap_dataset_num_classes(ds)
            << "  feature dim: " << plap_dataset_feature_dim(ds) << "\n";
}

int cmd_synth(plap_config* cfg) {
  plap_dataset* ds = nullptr;
  if (int rc = acquire_dataset(cfg, false, &ds)) return rc;
  print_summary(ds);
  const std::string dir = get(cfg, "out_dir");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  plap_status st = plap_dataset_save(ds, (dir + "/edges.txt").c_str(),
                                     (dir + "/features.txt").c_str(),
                                     (dir + "/labels.txt").c_str());
  plap_dataset_free(ds);
  if (st) return fail(st, "save dataset");
  std::cout << "wrote " << dir << "/{edges,features,labels}.txt\n";
  return 0;
}

int cmd_load(plap_config* cfg, bool write_canonical) {
  plap_dataset* ds = nullptr;
  if (int rc = acquire_dataset(cfg, false, &ds)) return rc;
  print_summary(ds);
  int rc = 0;
  if (write_canonical) {
    const std::string dir = get(cfg, "out_dir");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    plap_status st = plap_dataset_save(ds, (dir + "/edges.txt").c_str(),
                                       (dir + "/features.txt").c_str(),
                                       (dir + "/labels.txt").c_str());
    if (st)
      rc = fail(st, "save dataset");
    else
      std::cout << "wrote canonical copies under " << dir << "\n";
  }
  plap_dataset_free(ds);
  return rc;
}

int cmd_perturb(plap_config* cfg, double rate) {
  plap_dataset* ds = nullptr;
  if (int rc = acquire_dataset(cfg, false, &ds)) return rc;
  plap_dataset* pert = nullptr;
  plap_status st = plap_dataset_perturb(
      ds, get(cfg, "attack").c_str(), rate,
      std::strtoull(get(cfg, "seed").c_str(), nullptr, 10), &pert);
  if (st) {
    plap_dataset_free(ds);
    return fail(st, "perturb");
  }
  int64_t added = 0, removed = 0;
  double ratio = 0.0;
  plap_dataset_diff(ds, pert, &added, &removed, &ratio);
  std::printf("added: %lld  removed: %lld  ratio: %.4f\n",
              static_cast<long long>(added), static_cast<long long>(removed),
              ratio);
  const std::string dir = get(cfg, "out_dir");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  st = plap_dataset_save(pert, (dir + "/perturbed_edges.txt").c_str(), "", "");
  plap_dataset_free(pert);
  plap_dataset_free(ds);
  if (st) return fail(st, "save perturbed edges");
  std::cout << "wrote " << dir << "/perturbed_edges.txt\n";
  return 0;
}

int cmd_denoise(plap_config* cfg) {
  plap_dataset* ds = nullptr;
  if (int rc = acquire_dataset(cfg, false, &ds)) return rc;
  plap_denoise_result* res = nullptr;
  plap_status st = plap_denoise(ds, cfg, &res);
  if (st) {
    plap_dataset_free(ds);
    return fail(st, "denoise");
  }
  const int64_t len = plap_denoise_result_trace_len(res);
  std::printf("iterations: %lld  converged: %s  objective: %.6g -> %.6g\n",
              static_cast<long long>(plap_denoise_result_iterations(res)),
              plap_denoise_result_converged(res) ? "yes" : "no",
              plap_denoise_result_objective(res, 0),
              plap_denoise_result_objective(res, len - 1));

  const std::string dir = get(cfg, "out_dir");
  int rc = write_file(dir, "objective_trace.csv",
                      plap_denoise_result_trace_csv(res));
  plap_dataset* den = nullptr;
  st = plap_denoise_result_apply(res, ds,
                                 std::atof(get(cfg, "threshold").c_str()), &den);
  if (st == PLAP_OK) {
    st = plap_dataset_save(den, (dir + "/denoised_edges.txt").c_str(), "", "");
    if (st == PLAP_OK) std::cout << "wrote " << dir << "/denoised_edges.txt\n";
    plap_dataset_free(den);
  }
  if (st) rc = fail(st, "save denoised edges");
  plap_denoise_result_free(res);
  plap_dataset_free(ds);
  return rc;
}

int cmd_train(plap_config* cfg, bool write_history) {
  plap_dataset* ds = nullptr;
  if (int rc = acquire_dataset(cfg, true, &ds)) return rc;
  plap_train_result* res = nullptr;
  plap_status st = plap_train(ds, cfg, &res);
  plap_dataset_free(ds);
  if (st) return fail(st, "train");
  auto pct = [&](const char* split) {
    const double a = plap_train_result_accuracy(res, split);
    return a < 0.0 ? std::string("n/a")
                   : [a] {
                       char buf[16];
                       std::snprintf(buf, sizeof(buf), "%.2f", a * 100.0);
                       return std::string(buf);
                     }();
  };
  std::cout << "epochs run: " << plap_train_result_epochs(res)
            << "  accuracy%: train " << pct("train") << "  val " << pct("val")
            << "  test " << pct("test") << "\n";
  int rc = 0;
  if (write_history)
    rc = write_file(get(cfg, "out_dir"), "history.csv",
                    plap_train_result_history_csv(res));
  plap_train_result_free(res);
  return rc;
}

int run_report(plap_config* cfg, plap_status (*runner)(const plap_config*, plap_report**),
               const char* what, const std::vector<std::pair<const char*, const char*>>& files,
               bool write_config) {
  plap_report* rep = nullptr;
  if (plap_status st = runner(cfg, &rep)) return fail(st, what);
  const std::string dir = get(cfg, "out_dir");
  int rc = 0;
  for (const auto& [which, name] : files) {
    const char* content =
        std::string(which) == "json" ? plap_report_json(rep)
                                     : plap_report_csv(rep, which);
    if (int w = write_file(dir, name, content)) rc = w;
  }
  if (write_config && rc == 0)
    rc = write_file(dir, "config_used.cfg", plap_config_serialize(cfg));
  if (plap_report_any_failed(rep)) {
    std::cerr << "warning: some cells failed; see the report\n";
    rc = rc == 0 ? 1 : rc;
  }
  plap_report_free(rep);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-Laplacian graph denoising with a GCN classifier"};
  app.require_subcommand(1);
  app.set_version_flag("--version", plap_version());

  ConfigHandle cfg;
  std::vector<std::unique_ptr<FlagBinder>> binders;
  auto make_binder = [&](CLI::App* sub) {
    binders.push_back(std::make_unique<FlagBinder>(cfg.ptr));
    FlagBinder* b = binders.back().get();
    b->add_config(sub);
    return b;
  };

  // synth
  CLI::App* synth = app.add_subcommand("synth", "generate a planted-partition dataset and write it");
  auto* b_synth = make_binder(synth);
  b_synth->add_dataset(synth);
  b_synth->add_run(synth);

  // load
  CLI::App* load = app.add_subcommand("load", "load and validate a dataset");
  auto* b_load = make_binder(load);
  b_load->add_dataset(load);
  b_load->add_run(load);

  // perturb
  CLI::App* perturb = app.add_subcommand("perturb", "insert adversarial edges and write the edge list");
  auto* b_pert = make_binder(perturb);
  b_pert->add_dataset(perturb);
  b_pert->add_run(perturb);
  double pert_rate = 0.2;
  perturb->add_option("--rate", pert_rate, "insertion rate relative to the edge count");

  // denoise
  CLI::App* denoise = app.add_subcommand("denoise", "recover denoised edge weights from the input graph");
  auto* b_den = make_binder(denoise);
  b_den->add_dataset(denoise);
  b_den->add_denoise(denoise);
  b_den->add_run(denoise);

  // train
  CLI::App* train = app.add_subcommand("train", "train the classifier on the input graph");
  auto* b_train = make_binder(train);
  b_train->add_dataset(train);
  b_train->add_train(train);
  b_train->add_run(train);
  bool history = false;
  train->add_flag("--history", history, "also write per-epoch history.csv");

  // pipeline
  CLI::App* pipeline = app.add_subcommand("pipeline", "perturb, denoise, train and evaluate both arms");
  auto* b_pipe = make_binder(pipeline);
  b_pipe->add_dataset(pipeline);
  b_pipe->add_denoise(pipeline);
  b_pipe->add_train(pipeline);
  b_pipe->add_run(pipeline);
  std::string pipe_rate;
  pipeline->add_option("--rate", pipe_rate, "single perturbation rate (clean level 0 is added)");

  // energy-curve
  CLI::App* energy = app.add_subcommand("energy-curve", "normalized Dirichlet energy per insertion rate");
  auto* b_energy = make_binder(energy);
  b_energy->add_dataset(energy);
  b_energy->add_run(energy);

  // p-sweep
  CLI::App* psweep = app.add_subcommand("p-sweep", "pipeline accuracy across norm exponents");
  auto* b_sweep = make_binder(psweep);
  b_sweep->add_dataset(psweep);
  b_sweep->add_denoise(psweep);
  b_sweep->add_train(psweep);
  b_sweep->add_run(psweep);
  std::string sweep_rate;
  psweep->add_option("--rate", sweep_rate, "perturbation rate for the sweep");
  std::string p_values;
  psweep->add_option("--p-values", p_values, "comma-separated exponents to sweep");

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    if (int rc = b_synth->apply()) return rc;
    return cmd_synth(cfg.ptr);
  }
  if (load->parsed()) {
    if (int rc = b_load->apply()) return rc;
    const bool canonical = load->count("--out") > 0;
    return cmd_load(cfg.ptr, canonical);
  }
  if (perturb->parsed()) {
    if (int rc = b_pert->apply()) return rc;
    return cmd_perturb(cfg.ptr, pert_rate);
  }
  if (denoise->parsed()) {
    if (int rc = b_den->apply()) return rc;
    return cmd_denoise(cfg.ptr);
  }
  if (train->parsed()) {
    if (int rc = b_train->apply()) return rc;
    return cmd_train(cfg.ptr, history);
  }
  if (pipeline->parsed()) {
    if (int rc = b_pipe->apply()) return rc;
    if (pipeline->count("--rate") > 0 && pipeline->count("--rates") == 0) {
      const std::string rates = "0," + pipe_rate;
      if (plap_status st = plap_config_set(cfg.ptr, "rates", rates.c_str()))
        return fail(st, "rates");
    }
    return run_report(cfg.ptr, plap_pipeline_run, "pipeline",
                      {{"json", "report.json"}, {"results", "results.csv"}},
                      true);
  }
  if (energy->parsed()) {
    if (int rc = b_energy->apply()) return rc;
    if (energy->count("--rates") == 0) {
      // Figure-style default sweep
      if (plap_status st =
              plap_config_set(cfg.ptr, "rates", "0,0.2,0.4,0.6,0.8,1"))
        return fail(st, "rates");
    }
    return run_report(cfg.ptr, plap_energy_curve_run, "energy-curve",
                      {{"energy", "energy.csv"}}, false);
  }
  if (psweep->parsed()) {
    if (int rc = b_sweep->apply()) return rc;
    if (psweep->count("--rate") > 0) {
      if (plap_status st = plap_config_set(cfg.ptr, "rates", sweep_rate.c_str()))
        return fail(st, "rates");
    }
    if (psweep->count("--p-values") > 0) {
      if (plap_status st = plap_config_set(cfg.ptr, "p_values", p_values.c_str()))
        return fail(st, "p_values");
    }
    return run_report(cfg.ptr, plap_p_sweep_run, "p-sweep",
                      {{"p_sweep", "p_sweep.csv"}}, false);
  }
  return 0;
}

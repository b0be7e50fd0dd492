#include "plapgnn/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "plapgnn/rng.hpp"

namespace plap {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kDataRole = 1;
constexpr std::uint64_t kSplitRole = 2;
constexpr std::uint64_t kPerturbRole = 3;
constexpr std::uint64_t kGcnRole = 4;

struct CellSeeds {
  std::uint64_t data, split, perturb, gcn;
};

CellSeeds derive_seeds(std::uint64_t rep_seed) {
  return {rng::mix(rep_seed, kDataRole), rng::mix(rep_seed, kSplitRole),
          rng::mix(rep_seed, kPerturbRole), rng::mix(rep_seed, kGcnRole)};
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string fmt_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

double round_pct(double frac) {
  return std::round(frac * 10000.0) / 100.0;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"')
      c = ';';
    else if (c == '\n' || c == '\r')
      c = ' ';
  return s;
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0.0;
    for (double x : xs) sq += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  }
  return out;
}

// ---- config keys ----------------------------------------------------------

double parse_double_value(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw Error(ErrorCode::parse,
                "config: key '" + key + "' expects a real number, got '" + v + "'");
  return out;
}

long long parse_int_value(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw Error(ErrorCode::parse,
                "config: key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool parse_bool_value(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw Error(ErrorCode::parse,
              "config: key '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<double> parse_list_value(const std::string& key,
                                     const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos)
      throw Error(ErrorCode::parse, "config: empty item in list '" + key + "'");
    out.push_back(parse_double_value(key, item.substr(a, b - a + 1)));
  }
  if (out.empty())
    throw Error(ErrorCode::parse, "config: key '" + key + "' expects a list");
  return out;
}

std::string join_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += fmt_double(xs[i]);
  }
  return out;
}

struct KeyEntry {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, KeyEntry>>& key_table() {
  static const std::vector<std::pair<std::string, KeyEntry>> table = [] {
    std::vector<std::pair<std::string, KeyEntry>> t;
    auto add = [&t](const std::string& key,
                    std::function<void(RunConfig&, const std::string&)> set,
                    std::function<std::string(const RunConfig&)> get) {
      t.push_back({key, {std::move(set), std::move(get)}});
    };
    add("name", [](RunConfig& c, const std::string& v) { c.name = v; },
        [](const RunConfig& c) { return c.name; });
    add("edges_file", [](RunConfig& c, const std::string& v) { c.edges_file = v; },
        [](const RunConfig& c) { return c.edges_file; });
    add("features_file",
        [](RunConfig& c, const std::string& v) { c.features_file = v; },
        [](const RunConfig& c) { return c.features_file; });
    add("labels_file",
        [](RunConfig& c, const std::string& v) { c.labels_file = v; },
        [](const RunConfig& c) { return c.labels_file; });
    add("synth_n",
        [](RunConfig& c, const std::string& v) {
          c.synth.n = static_cast<int>(parse_int_value("synth_n", v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.n); });
    add("synth_classes",
        [](RunConfig& c, const std::string& v) {
          c.synth.classes = static_cast<int>(parse_int_value("synth_classes", v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.classes); });
    add("synth_p_in",
        [](RunConfig& c, const std::string& v) {
          c.synth.p_in = parse_double_value("synth_p_in", v);
        },
        [](const RunConfig& c) { return fmt_double(c.synth.p_in); });
    add("synth_p_out",
        [](RunConfig& c, const std::string& v) {
          c.synth.p_out = parse_double_value("synth_p_out", v);
        },
        [](const RunConfig& c) { return fmt_double(c.synth.p_out); });
    add("synth_feature_dim",
        [](RunConfig& c, const std::string& v) {
          c.synth.feature_dim =
              static_cast<int>(parse_int_value("synth_feature_dim", v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.feature_dim); });
    add("synth_separation",
        [](RunConfig& c, const std::string& v) {
          c.synth.feature_separation = parse_double_value("synth_separation", v);
        },
        [](const RunConfig& c) { return fmt_double(c.synth.feature_separation); });
    add("synth_noise_sd",
        [](RunConfig& c, const std::string& v) {
          c.synth.noise_sd = parse_double_value("synth_noise_sd", v);
        },
        [](const RunConfig& c) { return fmt_double(c.synth.noise_sd); });
    add("split_train",
        [](RunConfig& c, const std::string& v) {
          c.synth.split_train = parse_double_value("split_train", v);
        },
        [](const RunConfig& c) { return fmt_double(c.synth.split_train); });
    add("split_val",
        [](RunConfig& c, const std::string& v) {
          c.synth.split_val = parse_double_value("split_val", v);
        },
        [](const RunConfig& c) { return fmt_double(c.synth.split_val); });
    add("split_test",
        [](RunConfig& c, const std::string& v) {
          c.synth.split_test = parse_double_value("split_test", v);
        },
        [](const RunConfig& c) { return fmt_double(c.synth.split_test); });
    add("attack",
        [](RunConfig& c, const std::string& v) {
          if (v == "random")
            c.attack = AttackKind::random_insert;
          else if (v == "dissimilar")
            c.attack = AttackKind::dissimilar_insert;
          else
            throw Error(ErrorCode::parse,
                        "config: attack must be 'random' or 'dissimilar'");
        },
        [](const RunConfig& c) {
          return c.attack == AttackKind::random_insert
                     ? std::string("random")
                     : std::string("dissimilar");
        });
    add("rates",
        [](RunConfig& c, const std::string& v) {
          c.rates = parse_list_value("rates", v);
        },
        [](const RunConfig& c) { return join_list(c.rates); });
    add("alpha",
        [](RunConfig& c, const std::string& v) {
          c.denoise.alpha = parse_double_value("alpha", v);
        },
        [](const RunConfig& c) { return fmt_double(c.denoise.alpha); });
    add("beta",
        [](RunConfig& c, const std::string& v) {
          c.denoise.beta = parse_double_value("beta", v);
        },
        [](const RunConfig& c) { return fmt_double(c.denoise.beta); });
    add("p",
        [](RunConfig& c, const std::string& v) {
          c.denoise.p = parse_double_value("p", v);
        },
        [](const RunConfig& c) { return fmt_double(c.denoise.p); });
    add("denoise_max_iters",
        [](RunConfig& c, const std::string& v) {
          c.denoise.max_iters =
              static_cast<int>(parse_int_value("denoise_max_iters", v));
        },
        [](const RunConfig& c) { return std::to_string(c.denoise.max_iters); });
    add("denoise_rel_tol",
        [](RunConfig& c, const std::string& v) {
          c.denoise.rel_tol = parse_double_value("denoise_rel_tol", v);
        },
        [](const RunConfig& c) { return fmt_double(c.denoise.rel_tol); });
    add("step_mode",
        [](RunConfig& c, const std::string& v) {
          if (v == "lipschitz")
            c.denoise.step_mode = StepMode::lipschitz;
          else if (v == "fixed")
            c.denoise.step_mode = StepMode::fixed;
          else
            throw Error(ErrorCode::parse,
                        "config: step_mode must be 'lipschitz' or 'fixed'");
        },
        [](const RunConfig& c) {
          return c.denoise.step_mode == StepMode::lipschitz
                     ? std::string("lipschitz")
                     : std::string("fixed");
        });
    add("eta_w",
        [](RunConfig& c, const std::string& v) {
          c.denoise.eta_w = parse_double_value("eta_w", v);
        },
        [](const RunConfig& c) { return fmt_double(c.denoise.eta_w); });
    add("c_mode",
        [](RunConfig& c, const std::string& v) {
          if (v == "algorithm1")
            c.denoise.c_mode = CMode::algorithm1;
          else if (v == "exact")
            c.denoise.c_mode = CMode::exact;
          else
            throw Error(ErrorCode::parse,
                        "config: c_mode must be 'algorithm1' or 'exact'");
        },
        [](const RunConfig& c) {
          return c.denoise.c_mode == CMode::algorithm1
                     ? std::string("algorithm1")
                     : std::string("exact");
        });
    add("support",
        [](RunConfig& c, const std::string& v) {
          if (v == "full")
            c.denoise.support = SupportMode::full;
          else if (v == "observed")
            c.denoise.support = SupportMode::observed;
          else
            throw Error(ErrorCode::parse,
                        "config: support must be 'full' or 'observed'");
        },
        [](const RunConfig& c) {
          return c.denoise.support == SupportMode::full
                     ? std::string("full")
                     : std::string("observed");
        });
    add("lr_gnn",
        [](RunConfig& c, const std::string& v) {
          c.train.learning_rate = parse_double_value("lr_gnn", v);
        },
        [](const RunConfig& c) { return fmt_double(c.train.learning_rate); });
    add("epochs",
        [](RunConfig& c, const std::string& v) {
          c.train.epochs = static_cast<int>(parse_int_value("epochs", v));
        },
        [](const RunConfig& c) { return std::to_string(c.train.epochs); });
    add("hidden",
        [](RunConfig& c, const std::string& v) {
          c.train.hidden = static_cast<int>(parse_int_value("hidden", v));
        },
        [](const RunConfig& c) { return std::to_string(c.train.hidden); });
    add("patience",
        [](RunConfig& c, const std::string& v) {
          c.train.patience = static_cast<int>(parse_int_value("patience", v));
        },
        [](const RunConfig& c) { return std::to_string(c.train.patience); });
    add("threshold",
        [](RunConfig& c, const std::string& v) {
          c.threshold = parse_double_value("threshold", v);
        },
        [](const RunConfig& c) { return fmt_double(c.threshold); });
    add("normalize_features",
        [](RunConfig& c, const std::string& v) {
          c.normalize_features = parse_bool_value("normalize_features", v);
        },
        [](const RunConfig& c) {
          return std::string(c.normalize_features ? "1" : "0");
        });
    add("p_values",
        [](RunConfig& c, const std::string& v) {
          c.p_values = parse_list_value("p_values", v);
        },
        [](const RunConfig& c) { return join_list(c.p_values); });
    add("seed",
        [](RunConfig& c, const std::string& v) {
          c.seed = static_cast<std::uint64_t>(parse_int_value("seed", v));
        },
        [](const RunConfig& c) { return std::to_string(c.seed); });
    add("reps",
        [](RunConfig& c, const std::string& v) {
          c.repetitions = static_cast<int>(parse_int_value("reps", v));
        },
        [](const RunConfig& c) { return std::to_string(c.repetitions); });
    add("out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; },
        [](const RunConfig& c) { return c.out_dir; });
    return t;
  }();
  return table;
}

// ---- dataset assembly ------------------------------------------------------

void normalize_feature_rows(Matrix& X) {
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double norm = X.row(i).cwiseAbs().sum();
    if (norm > 0.0) X.row(i) /= norm;
  }
}

Dataset dataset_for_rep(const RunConfig& cfg, const Dataset* loaded,
                        const CellSeeds& seeds) {
  Dataset ds;
  if (cfg.use_synth()) {
    SynthSpec spec = cfg.synth;
    spec.seed = seeds.data;
    ds = generate_planted_partition(spec);
    ds.name = cfg.name;
  } else {
    ds = *loaded;
    make_stratified_masks(ds.labels, cfg.synth.split_train, cfg.synth.split_val,
                          cfg.synth.split_test, seeds.split);
  }
  if (cfg.normalize_features) normalize_feature_rows(ds.X);
  return ds;
}

Matrix perturb_adjacency(const Matrix& A, const Matrix& X, AttackKind kind,
                         double rate, std::uint64_t seed) {
  if (rate == 0.0) return A;
  PerturbationSpec spec{kind, rate, seed};
  return kind == AttackKind::random_insert
             ? random_edge_insertion(A, spec)
             : dissimilar_edge_insertion(A, X, spec);
}

}  // namespace

void RunConfig::validate() const {
  if (repetitions < 1)
    throw Error(ErrorCode::invalid_argument, "config: reps must be >= 1");
  if (rates.empty())
    throw Error(ErrorCode::invalid_argument,
                "config: at least one perturbation rate is required");
  for (double r : rates)
    if (!(r >= 0.0))
      throw Error(ErrorCode::invalid_argument, "config: rates must be >= 0");
  if (threshold < 0.0)
    throw Error(ErrorCode::invalid_argument, "config: threshold must be >= 0");
  if (!use_synth() && (features_file.empty() || labels_file.empty()))
    throw Error(ErrorCode::invalid_argument,
                "config: edges_file requires features_file and labels_file");
  denoise.validate();
  train.validate();
  if (use_synth()) synth.validate();
}

void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  for (const auto& [name, entry] : key_table()) {
    if (name == key) {
      entry.set(cfg, value);
      return;
    }
  }
  std::string known;
  for (const auto& [name, entry] : key_table()) {
    if (!known.empty()) known += ", ";
    known += name;
  }
  throw Error(ErrorCode::parse,
              "config: unknown key '" + key + "' (known keys: " + known + ")");
}

std::string get_config_key(const RunConfig& cfg, const std::string& key) {
  for (const auto& [name, entry] : key_table())
    if (name == key) return entry.get(cfg);
  throw Error(ErrorCode::parse, "config: unknown key '" + key + "'");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open config file: " + path);
  std::string raw;
  long no = 0;
  while (std::getline(in, raw)) {
    ++no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#') continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::parse, path + ":" + std::to_string(no) +
                                        ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(raw.substr(0, eq));
    const std::string value = trim(raw.substr(eq + 1));
    if (key.empty())
      throw Error(ErrorCode::parse,
                  path + ":" + std::to_string(no) + ": empty key");
    apply_config_key(cfg, key, value);
  }
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, entry] : key_table())
    out += name + " = " + entry.get(cfg) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [name, entry] : key_table()) out.push_back(name);
  return out;
}

// ---- pipeline ---------------------------------------------------------------

const Aggregate* RunReport::find_aggregate(double rate,
                                           const std::string& arm) const {
  for (const auto& a : aggregates)
    if (a.rate == rate && a.arm == arm) return &a;
  return nullptr;
}

RunReport run_pipeline(const RunConfig& cfg) {
  cfg.validate();

  Dataset loaded;
  if (!cfg.use_synth()) {
    loaded = load_dataset(cfg.edges_file, cfg.features_file, cfg.labels_file);
    loaded.name = cfg.name;
  }

  RunReport report;
  report.name = cfg.name;

  // one dataset and one perturbation stream per repetition; both arms of a
  // cell see the same perturbed instance and the same classifier seed
  for (std::size_t level = 0; level < cfg.rates.size(); ++level) {
    const double rate = cfg.rates[level];
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const std::uint64_t rep_seed = cfg.seed + static_cast<std::uint64_t>(rep);
      const CellSeeds seeds = derive_seeds(rep_seed);
      CellResult cell;
      cell.rate = rate;
      cell.seed = rep_seed;
      try {
        Dataset ds =
            dataset_for_rep(cfg, cfg.use_synth() ? nullptr : &loaded, seeds);
        const Matrix A_pert =
            perturb_adjacency(ds.A, ds.X, cfg.attack, rate, seeds.perturb);

        const double clean_energy = dirichlet_energy(ds.A, ds.X);
        if (clean_energy == 0.0)
          throw Error(ErrorCode::invalid_argument,
                      "clean graph has zero Dirichlet energy");
        cell.dirichlet_ratio = dirichlet_energy(A_pert, ds.X) / clean_energy;

        const Matrix phi_n = laplacian_op(weights_from_adjacency(A_pert));
        DenoiseResult den = run_denoise(phi_n, ds.X, cfg.denoise);
        cell.denoise_iterations = den.iterations_run;
        cell.denoise_converged = den.converged;
        cell.objective_initial = den.objective_trace.front();
        cell.objective_final = den.objective_trace.back();

        Matrix A_star = adjacency_from_weights(den.w_star);
        if (cfg.threshold > 0.0)
          A_star = (A_star.array() < cfg.threshold).select(0.0, A_star);

        TrainConfig tc = cfg.train;
        tc.seed = seeds.gcn;

        const TrainResult poisoned = train_gcn(A_pert, ds.X, ds.labels, tc);
        cell.acc_poisoned_pct = round_pct(
            evaluate(poisoned.params, normalize_adjacency(A_pert), ds.X,
                     ds.labels, ds.labels.test));

        const TrainResult defended = train_gcn(A_star, ds.X, ds.labels, tc);
        cell.acc_denoised_pct = round_pct(
            evaluate(defended.params, normalize_adjacency(A_star), ds.X,
                     ds.labels, ds.labels.test));
      } catch (const std::exception& e) {
        cell.status = sanitize(e.what());
        report.any_failed = true;
      }
      report.cells.push_back(std::move(cell));
    }
  }

  for (double rate : cfg.rates) {
    for (const char* arm : {"poisoned", "denoised"}) {
      std::vector<double> xs;
      for (const auto& cell : report.cells) {
        if (cell.rate != rate || cell.status != "ok") continue;
        const auto& acc = std::string(arm) == "poisoned" ? cell.acc_poisoned_pct
                                                         : cell.acc_denoised_pct;
        if (acc) xs.push_back(*acc);
      }
      if (xs.empty()) continue;
      const MeanSd ms = mean_sd(xs);
      report.aggregates.push_back({rate, arm, ms.mean, ms.sd});
    }
  }
  return report;
}

std::string RunReport::results_csv() const {
  std::string out =
      "rate,seed,arm,status,accuracy_pct,mean_accuracy_pct,sd_accuracy_pct,"
      "dirichlet_ratio,denoise_iterations,denoise_converged,"
      "objective_initial,objective_final\n";
  for (const auto& cell : cells) {
    for (const char* arm : {"poisoned", "denoised"}) {
      const bool denoised = std::string(arm) == "denoised";
      const auto& acc = denoised ? cell.acc_denoised_pct : cell.acc_poisoned_pct;
      const Aggregate* agg = find_aggregate(cell.rate, arm);
      out += fmt_double(cell.rate) + "," + std::to_string(cell.seed) + "," +
             arm + "," + cell.status + ",";
      out += (acc ? fmt_pct(*acc) : "") + std::string(",");
      out += (agg ? fmt_pct(agg->mean_pct) : "") + std::string(",");
      out += (agg ? fmt_pct(agg->sd_pct) : "") + std::string(",");
      out += (cell.dirichlet_ratio ? fmt_double(*cell.dirichlet_ratio) : "") +
             std::string(",");
      if (denoised) {
        out += (cell.denoise_iterations
                    ? std::to_string(*cell.denoise_iterations)
                    : "") +
               std::string(",");
        out += (cell.denoise_converged ? (*cell.denoise_converged ? "1" : "0")
                                       : "") +
               std::string(",");
        out += (cell.objective_initial ? fmt_double(*cell.objective_initial)
                                       : "") +
               std::string(",");
        out += cell.objective_final ? fmt_double(*cell.objective_final) : "";
      } else {
        out += ",,,";
      }
      out += "\n";
    }
  }
  return out;
}

std::string RunReport::to_json() const {
  json j;
  j["name"] = name;
  j["any_failed"] = any_failed;
  j["cells"] = json::array();
  for (const auto& cell : cells) {
    json c;
    c["rate"] = cell.rate;
    c["seed"] = cell.seed;
    c["status"] = cell.status;
    c["accuracy_poisoned_pct"] =
        cell.acc_poisoned_pct ? json(*cell.acc_poisoned_pct) : json(nullptr);
    c["accuracy_denoised_pct"] =
        cell.acc_denoised_pct ? json(*cell.acc_denoised_pct) : json(nullptr);
    c["dirichlet_ratio"] =
        cell.dirichlet_ratio ? json(*cell.dirichlet_ratio) : json(nullptr);
    c["denoise_iterations"] = cell.denoise_iterations
                                  ? json(*cell.denoise_iterations)
                                  : json(nullptr);
    c["denoise_converged"] = cell.denoise_converged
                                 ? json(*cell.denoise_converged)
                                 : json(nullptr);
    c["objective_initial"] = cell.objective_initial
                                 ? json(*cell.objective_initial)
                                 : json(nullptr);
    c["objective_final"] =
        cell.objective_final ? json(*cell.objective_final) : json(nullptr);
    j["cells"].push_back(std::move(c));
  }
  j["aggregates"] = json::array();
  for (const auto& a : aggregates) {
    json e;
    e["rate"] = a.rate;
    e["arm"] = a.arm;
    e["mean_accuracy_pct"] = a.mean_pct;
    e["sd_accuracy_pct"] = a.sd_pct;
    j["aggregates"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

// ---- energy curve -----------------------------------------------------------

EnergyCurveReport run_energy_curve(const RunConfig& cfg) {
  cfg.validate();
  std::vector<double> levels = cfg.rates;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.empty() || levels.front() != 0.0) levels.insert(levels.begin(), 0.0);
  if (levels.size() < 2)
    throw Error(ErrorCode::invalid_argument,
                "energy curve needs at least two perturbation levels");

  Dataset loaded;
  if (!cfg.use_synth())
    loaded = load_dataset(cfg.edges_file, cfg.features_file, cfg.labels_file);

  std::vector<std::vector<double>> ratios(levels.size());
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const CellSeeds seeds =
        derive_seeds(cfg.seed + static_cast<std::uint64_t>(rep));
    Dataset ds = dataset_for_rep(cfg, cfg.use_synth() ? nullptr : &loaded, seeds);
    std::vector<std::pair<double, Matrix>> perturbed;
    for (std::size_t l = 1; l < levels.size(); ++l)
      perturbed.emplace_back(
          levels[l], perturb_adjacency(ds.A, ds.X, cfg.attack, levels[l],
                                       seeds.perturb));
    const auto curve = normalized_energy_curve(ds.A, perturbed, ds.X);
    for (std::size_t l = 0; l < levels.size(); ++l)
      ratios[l].push_back(curve[l].ratio);
  }

  EnergyCurveReport report;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const MeanSd ms = mean_sd(ratios[l]);
    report.rows.push_back({levels[l], ms.mean, ms.sd});
  }
  return report;
}

std::string EnergyCurveReport::csv() const {
  std::string out = "rate,energy_ratio_mean,energy_ratio_sd\n";
  for (const auto& row : rows)
    out += fmt_double(row.rate) + "," + fmt_double(row.mean) + "," +
           fmt_double(row.sd) + "\n";
  return out;
}

std::string EnergyCurveReport::to_json() const {
  json j;
  j["rows"] = json::array();
  for (const auto& row : rows)
    j["rows"].push_back(
        {{"rate", row.rate}, {"energy_ratio_mean", row.mean},
         {"energy_ratio_sd", row.sd}});
  return j.dump(2) + "\n";
}

// ---- p sweep ----------------------------------------------------------------

PSweepReport run_p_sweep(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.p_values.empty())
    throw Error(ErrorCode::invalid_argument, "p sweep needs p_values");
  for (double p : cfg.p_values)
    if (!(p > 1.0))
      throw Error(ErrorCode::invalid_argument,
                  "p sweep: every p must be > 1, got " + fmt_double(p));
  const double rate = *std::max_element(cfg.rates.begin(), cfg.rates.end());

  PSweepReport report;
  for (double p : cfg.p_values) {
    RunConfig sub = cfg;
    sub.denoise.p = p;
    sub.rates = {rate};
    const RunReport run = run_pipeline(sub);
    report.any_failed = report.any_failed || run.any_failed;
    const Aggregate* agg = run.find_aggregate(rate, "denoised");
    if (agg)
      report.rows.push_back({p, agg->mean_pct, agg->sd_pct});
    else
      report.rows.push_back({p, std::nan(""), std::nan("")});
  }
  return report;
}

std::string PSweepReport::csv() const {
  std::string out = "p,accuracy_mean_pct,accuracy_sd_pct\n";
  for (const auto& row : rows) {
    out += fmt_double(row.p) + ",";
    out += (std::isnan(row.mean_pct) ? "" : fmt_pct(row.mean_pct)) +
           std::string(",");
    out += std::isnan(row.sd_pct) ? "" : fmt_pct(row.sd_pct);
    out += "\n";
  }
  return out;
}

std::string PSweepReport::to_json() const {
  json j;
  j["rows"] = json::array();
  for (const auto& row : rows) {
    json e;
    e["p"] = row.p;
    e["accuracy_mean_pct"] =
        std::isnan(row.mean_pct) ? json(nullptr) : json(row.mean_pct);
    e["accuracy_sd_pct"] =
        std::isnan(row.sd_pct) ? json(nullptr) : json(row.sd_pct);
    j["rows"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace plap

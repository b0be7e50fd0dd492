#include "plapgnn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "plapgnn/rng.hpp"

namespace plap {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct Line {
  std::string text;
  long number;  // 1-based
};

std::vector<Line> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::io, "cannot open file: " + path);
  std::vector<Line> out;
  std::string raw;
  long no = 0;
  while (std::getline(in, raw)) {
    ++no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#') continue;
    out.push_back({raw, no});
  }
  return out;
}

[[noreturn]] void parse_fail(const std::string& path, long line,
                             const std::string& why) {
  throw Error(ErrorCode::parse,
              path + ":" + std::to_string(line) + ": " + why);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

long long parse_id(const std::string& tok, const std::string& path, long line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0)
    parse_fail(path, line, "expected a non-negative integer node id, got '" + tok + "'");
  return v;
}

double parse_real(const std::string& tok, const std::string& path, long line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    parse_fail(path, line, "expected a finite real number, got '" + tok + "'");
  return v;
}

}  // namespace

long long Dataset::num_edges() const {
  long long m = 0;
  for_each_pair(n(), [&](std::size_t, int i, int j) {
    if (A(i, j) != 0.0) ++m;
  });
  return m;
}

void Dataset::validate() const {
  if (A.rows() != A.cols() || A.rows() != X.rows() ||
      labels.size() != X.rows())
    throw Error(ErrorCode::validation, "dataset: inconsistent node counts");
  labels.validate();
}

void SynthSpec::validate() const {
  if (classes < 1)
    throw Error(ErrorCode::invalid_argument, "synth: classes must be >= 1");
  if (n < classes)
    throw Error(ErrorCode::invalid_argument,
                "synth: n must be >= classes, got n=" + std::to_string(n) +
                    " classes=" + std::to_string(classes));
  if (!(0.0 <= p_out && p_out < p_in && p_in <= 1.0))
    throw Error(ErrorCode::invalid_argument,
                "synth: need 0 <= p_out < p_in <= 1");
  if (feature_dim < classes)
    throw Error(ErrorCode::invalid_argument,
                "synth: feature_dim must be >= classes to place the class "
                "means on simplex vertices");
  if (!(noise_sd >= 0.0) || !(feature_separation >= 0.0))
    throw Error(ErrorCode::invalid_argument,
                "synth: separation and noise_sd must be >= 0");
  const double sum = split_train + split_val + split_test;
  if (!(split_train > 0.0) || split_val < 0.0 || split_test < 0.0 ||
      std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::invalid_argument,
                "synth: split fractions must be positive and sum to 1");
}

Dataset load_dataset(const std::string& edge_file,
                     const std::string& feature_file,
                     const std::string& label_file) {
  // features define the node set
  struct FeatRow {
    long long id;
    std::vector<double> vals;
  };
  std::vector<FeatRow> feats;
  Eigen::Index dim = -1;
  for (const auto& line : read_lines(feature_file)) {
    const auto toks = tokens(line.text);
    if (toks.size() < 2)
      parse_fail(feature_file, line.number,
                 "expected 'id v1 ... vd' with at least one value");
    FeatRow row;
    row.id = parse_id(toks[0], feature_file, line.number);
    for (std::size_t t = 1; t < toks.size(); ++t)
      row.vals.push_back(parse_real(toks[t], feature_file, line.number));
    if (dim < 0)
      dim = static_cast<Eigen::Index>(row.vals.size());
    else if (static_cast<Eigen::Index>(row.vals.size()) != dim)
      parse_fail(feature_file, line.number,
                 "feature row has " + std::to_string(row.vals.size()) +
                     " values, expected " + std::to_string(dim));
    feats.push_back(std::move(row));
  }
  if (feats.empty())
    throw Error(ErrorCode::validation,
                feature_file + ": no feature rows found");

  std::sort(feats.begin(), feats.end(),
            [](const FeatRow& a, const FeatRow& b) { return a.id < b.id; });
  std::map<long long, int> index_of;
  for (std::size_t r = 0; r < feats.size(); ++r) {
    if (!index_of.emplace(feats[r].id, static_cast<int>(r)).second)
      throw Error(ErrorCode::validation,
                  feature_file + ": duplicate feature row for node " +
                      std::to_string(feats[r].id));
  }
  const int n = static_cast<int>(feats.size());

  auto lookup = [&](long long id, const std::string& path, long line) {
    const auto it = index_of.find(id);
    if (it == index_of.end())
      throw Error(ErrorCode::validation,
                  path + ":" + std::to_string(line) + ": node id " +
                      std::to_string(id) + " has no feature row");
    return it->second;
  };

  Dataset ds;
  ds.name = "dataset";
  ds.X = Matrix(n, dim);
  ds.node_ids.reserve(feats.size());
  for (int r = 0; r < n; ++r) {
    ds.node_ids.push_back(feats[static_cast<std::size_t>(r)].id);
    for (Eigen::Index c = 0; c < dim; ++c)
      ds.X(r, c) = feats[static_cast<std::size_t>(r)].vals[static_cast<std::size_t>(c)];
  }

  ds.A = Matrix::Zero(n, n);
  std::map<std::pair<int, int>, double> seen;
  for (const auto& line : read_lines(edge_file)) {
    const auto toks = tokens(line.text);
    if (toks.size() != 2 && toks.size() != 3)
      parse_fail(edge_file, line.number, "expected 'i j' or 'i j w'");
    const long long a = parse_id(toks[0], edge_file, line.number);
    const long long b = parse_id(toks[1], edge_file, line.number);
    if (a == b)
      parse_fail(edge_file, line.number,
                 "self-loop on node " + std::to_string(a));
    const double w =
        toks.size() == 3 ? parse_real(toks[2], edge_file, line.number) : 1.0;
    if (w < 0.0)
      parse_fail(edge_file, line.number, "negative edge weight");
    const int u = lookup(a, edge_file, line.number);
    const int v = lookup(b, edge_file, line.number);
    const auto key = std::minmax(u, v);
    const auto [it, fresh] = seen.emplace(std::make_pair(key.first, key.second), w);
    if (!fresh && it->second != w)
      throw Error(ErrorCode::validation,
                  edge_file + ":" + std::to_string(line.number) +
                      ": edge (" + std::to_string(a) + "," + std::to_string(b) +
                      ") repeated with a different weight");
    ds.A(u, v) = w;
    ds.A(v, u) = w;
  }

  ds.labels.y = Eigen::VectorXi::Constant(n, -1);
  int max_class = -1;
  for (const auto& line : read_lines(label_file)) {
    const auto toks = tokens(line.text);
    if (toks.size() != 2)
      parse_fail(label_file, line.number, "expected 'id class'");
    const long long id = parse_id(toks[0], label_file, line.number);
    const int idx = lookup(id, label_file, line.number);
    long long c = 0;
    const auto [ptr, ec] =
        std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), c);
    if (ec != std::errc() || ptr != toks[1].data() + toks[1].size() || c < 0)
      parse_fail(label_file, line.number,
                 "expected a non-negative class index, got '" + toks[1] + "'");
    if (ds.labels.y(idx) >= 0)
      throw Error(ErrorCode::validation,
                  label_file + ":" + std::to_string(line.number) +
                      ": duplicate label for node " + std::to_string(id));
    ds.labels.y(idx) = static_cast<int>(c);
    max_class = std::max(max_class, static_cast<int>(c));
  }
  if (max_class < 0)
    throw Error(ErrorCode::validation, label_file + ": no labels found");
  ds.labels.num_classes = max_class + 1;

  std::vector<bool> present(static_cast<std::size_t>(ds.labels.num_classes));
  for (int i = 0; i < n; ++i)
    if (ds.labels.y(i) >= 0) present[static_cast<std::size_t>(ds.labels.y(i))] = true;
  for (int c = 0; c < ds.labels.num_classes; ++c)
    if (!present[static_cast<std::size_t>(c)])
      throw Error(ErrorCode::validation,
                  label_file + ": class indices are not dense, class " +
                      std::to_string(c) + " is unused");

  ds.labels.train.assign(static_cast<std::size_t>(n), 0);
  ds.labels.val.assign(static_cast<std::size_t>(n), 0);
  ds.labels.test.assign(static_cast<std::size_t>(n), 0);
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& edge_file,
                  const std::string& feature_file,
                  const std::string& label_file) {
  const int n = ds.n();
  auto id_of = [&](int idx) {
    return ds.node_ids.empty() ? static_cast<long long>(idx)
                               : ds.node_ids[static_cast<std::size_t>(idx)];
  };
  auto open = [](const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write file: " + path);
    return out;
  };

  if (!edge_file.empty()) {
    auto out = open(edge_file);
    for_each_pair(n, [&](std::size_t, int i, int j) {
      // enumeration is already sorted by (min, max) = (j, i)
      if (ds.A(i, j) != 0.0)
        out << id_of(j) << ' ' << id_of(i) << ' ' << fmt_double(ds.A(i, j))
            << '\n';
    });
  }
  if (!feature_file.empty()) {
    auto out = open(feature_file);
    for (int r = 0; r < n; ++r) {
      out << id_of(r);
      for (Eigen::Index c = 0; c < ds.X.cols(); ++c)
        out << ' ' << fmt_double(ds.X(r, c));
      out << '\n';
    }
  }
  if (!label_file.empty()) {
    auto out = open(label_file);
    for (int r = 0; r < n; ++r)
      if (ds.labels.y(r) >= 0)
        out << id_of(r) << ' ' << ds.labels.y(r) << '\n';
  }
}

void make_stratified_masks(Labels& labels, double f_train, double f_val,
                           double f_test, std::uint64_t seed) {
  const double sum = f_train + f_val + f_test;
  if (!(f_train > 0.0) || f_val < 0.0 || f_test < 0.0 ||
      std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::invalid_argument,
                "split fractions must be positive and sum to 1");
  const std::size_t n = static_cast<std::size_t>(labels.size());
  labels.train.assign(n, 0);
  labels.val.assign(n, 0);
  labels.test.assign(n, 0);
  rng::Rng r(seed);
  for (int c = 0; c < labels.num_classes; ++c) {
    std::vector<int> members;
    for (Eigen::Index i = 0; i < labels.size(); ++i)
      if (labels.y(i) == c) members.push_back(static_cast<int>(i));
    r.shuffle(members);
    const double sz = static_cast<double>(members.size());
    std::size_t n_tr = static_cast<std::size_t>(std::floor(f_train * sz + 0.5));
    std::size_t n_va = static_cast<std::size_t>(std::floor(f_val * sz + 0.5));
    n_tr = std::min(n_tr, members.size());
    n_va = std::min(n_va, members.size() - n_tr);
    for (std::size_t t = 0; t < members.size(); ++t) {
      const auto idx = static_cast<std::size_t>(members[t]);
      if (t < n_tr)
        labels.train[idx] = 1;
      else if (t < n_tr + n_va)
        labels.val[idx] = 1;
      else
        labels.test[idx] = 1;
    }
  }
}

Dataset generate_planted_partition(const SynthSpec& spec) {
  spec.validate();
  rng::Rng r(spec.seed);
  const int n = spec.n;
  const int C = spec.classes;

  Dataset ds;
  ds.name = "synth";
  ds.labels.num_classes = C;
  ds.labels.y = Eigen::VectorXi(n);
  for (int i = 0; i < n; ++i)
    ds.labels.y(i) = static_cast<int>(r.below(static_cast<std::uint64_t>(C)));

  ds.A = Matrix::Zero(n, n);
  for_each_pair(n, [&](std::size_t, int i, int j) {
    const double prob =
        ds.labels.y(i) == ds.labels.y(j) ? spec.p_in : spec.p_out;
    if (r.uniform01() < prob) {
      ds.A(i, j) = 1.0;
      ds.A(j, i) = 1.0;
    }
  });

  // class means sit on scaled basis vectors (a regular simplex)
  ds.X = Matrix(n, spec.feature_dim);
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < spec.feature_dim; ++m) {
      const double mean =
          m == ds.labels.y(i) ? spec.feature_separation : 0.0;
      ds.X(i, m) = mean + spec.noise_sd * r.normal();
    }

  make_stratified_masks(ds.labels, spec.split_train, spec.split_val,
                        spec.split_test, r.next_u64());
  ds.node_ids.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ds.node_ids[static_cast<std::size_t>(i)] = i;
  ds.validate();
  return ds;
}

}  // namespace plap

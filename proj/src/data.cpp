#include "data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"

namespace hdcal {

int Dataset::n_classes() const {
  int c = 0;
  for (int l : labels) c = std::max(c, l + 1);
  return c;
}

Eigen::MatrixXd gen_kernel_dataset(uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(20, 30);
  for (int c = 0; c < 30; ++c) X(0, c) = rng.uniform(-1.0, 1.0);
  for (int r = 1; r < 20; ++r)
    for (int c = 0; c < 30; ++c) X(r, c) = X(r - 1, c) + rng.uniform(0.0, 0.1);
  return X;
}

GraphSpec gen_random_graph(int n_nodes, int n_edges, uint64_t seed) {
  if (n_nodes < 0 || n_edges < 0)
    raise(ErrorCode::InvalidParameter, "node and edge counts must be nonnegative");
  const long long max_edges = static_cast<long long>(n_nodes) * (n_nodes - 1) / 2;
  if (n_edges > max_edges)
    raise(ErrorCode::InvalidParameter,
          "requested " + std::to_string(n_edges) + " edges but only " +
              std::to_string(max_edges) + " pairs exist");
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(max_edges));
  for (int i = 0; i < n_nodes; ++i)
    for (int j = i + 1; j < n_nodes; ++j) pairs.emplace_back(i, j);
  Rng rng(seed);
  // partial Fisher-Yates: the first n_edges entries are a uniform sample
  for (int k = 0; k < n_edges; ++k) {
    const size_t swap = k + rng.below(pairs.size() - k);
    std::swap(pairs[k], pairs[swap]);
  }
  GraphSpec g;
  g.n_nodes = n_nodes;
  g.edges.assign(pairs.begin(), pairs.begin() + n_edges);
  std::sort(g.edges.begin(), g.edges.end());
  g.validate();
  return g;
}

namespace {

// Min-max bounds per feature from the training matrix; constant features map
// to zero.
struct Scaling {
  Eigen::VectorXd lo, hi;
};

Scaling fit_scaling(const Eigen::MatrixXd& X) {
  Scaling s;
  s.lo = X.colwise().minCoeff();
  s.hi = X.colwise().maxCoeff();
  return s;
}

void apply_scaling(Eigen::MatrixXd& X, const Scaling& s, bool clamp) {
  for (int c = 0; c < X.cols(); ++c) {
    const double span = s.hi(c) - s.lo(c);
    for (int r = 0; r < X.rows(); ++r) {
      if (span == 0.0) {
        X(r, c) = 0.0;
        continue;
      }
      double v = 2.0 * (X(r, c) - s.lo(c)) / span - 1.0;
      if (clamp) v = std::clamp(v, -1.0, 1.0);
      X(r, c) = v;
    }
  }
}

std::vector<std::string> list_existing(const std::string& dir,
                                       const std::vector<std::string>& names) {
  std::vector<std::string> found;
  for (const auto& n : names) {
    std::ifstream f(dir + "/" + n);
    if (f.good()) found.push_back(dir + "/" + n);
  }
  return found;
}

Dataset parse_isolet_files(const std::vector<std::string>& paths, const std::string& name,
                           Split split) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::Io, "cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      std::vector<double> vals;
      vals.reserve(618);
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          vals.push_back(std::stod(tok));
        } catch (const std::exception&) {
          raise(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": bad value '" + tok + "'");
        }
      }
      if (vals.size() != 618)
        raise(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": expected 618 fields, got " +
                                    std::to_string(vals.size()));
      const int label = static_cast<int>(std::lround(vals.back())) - 1;  // 1-based on disk
      if (label < 0 || label >= 26)
        raise(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": label out of range");
      vals.pop_back();
      rows.push_back(std::move(vals));
      labels.push_back(label);
    }
  }
  Dataset ds;
  ds.name = name;
  ds.split = split;
  ds.labels = std::move(labels);
  ds.features.resize(static_cast<int>(rows.size()), 617);
  for (size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < 617; ++c) ds.features(static_cast<int>(r), c) = rows[r][c];
  return ds;
}

}  // namespace

std::pair<Dataset, Dataset> load_isolet(const std::string& dir, LoadReport* report) {
  auto train_paths = list_existing(dir, {"isolet1+2+3+4.data", "isolet1234.data"});
  auto test_paths = list_existing(dir, {"isolet5.data"});
  if (train_paths.empty() || test_paths.empty())
    raise(ErrorCode::Io, "isolet files not found under " + dir);
  Dataset train = parse_isolet_files({train_paths[0]}, "isolet", Split::Train);
  Dataset test = parse_isolet_files({test_paths[0]}, "isolet", Split::Test);
  const Scaling s = fit_scaling(train.features);
  apply_scaling(train.features, s, false);
  apply_scaling(test.features, s, true);
  if (report) {
    report->name = "isolet";
    report->rows = train.n() + test.n();
    report->dims = train.dim();
    report->classes = 26;
    report->digest = content_digest(train.features, train.labels);
  }
  return {std::move(train), std::move(test)};
}

namespace {

uint32_t read_be32(std::ifstream& in, const std::string& path) {
  uint8_t b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) raise(ErrorCode::Io, path + ": truncated header");
  return (static_cast<uint32_t>(b[0]) << 24) | (static_cast<uint32_t>(b[1]) << 16) |
         (static_cast<uint32_t>(b[2]) << 8) | static_cast<uint32_t>(b[3]);
}

Eigen::MatrixXd read_idx_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot open " + path);
  const uint32_t magic = read_be32(in, path);
  if (magic != 2051) raise(ErrorCode::Format, path + ": bad image magic " + std::to_string(magic));
  const uint32_t n = read_be32(in, path);
  const uint32_t rows = read_be32(in, path);
  const uint32_t cols = read_be32(in, path);
  const size_t px = static_cast<size_t>(rows) * cols;
  std::vector<uint8_t> buf(px);
  Eigen::MatrixXd X(n, px);
  for (uint32_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(px)))
      raise(ErrorCode::Io, path + ": truncated image payload at item " + std::to_string(i));
    for (size_t p = 0; p < px; ++p) X(i, p) = 2.0 * (buf[p] / 255.0) - 1.0;
  }
  return X;
}

std::vector<int> read_idx_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot open " + path);
  const uint32_t magic = read_be32(in, path);
  if (magic != 2049) raise(ErrorCode::Format, path + ": bad label magic " + std::to_string(magic));
  const uint32_t n = read_be32(in, path);
  std::vector<uint8_t> buf(n);
  if (!in.read(reinterpret_cast<char*>(buf.data()), n))
    raise(ErrorCode::Io, path + ": truncated label payload");
  return std::vector<int>(buf.begin(), buf.end());
}

std::string find_file(const std::string& dir, const std::vector<std::string>& names) {
  auto found = list_existing(dir, names);
  if (found.empty()) raise(ErrorCode::Io, "none of the expected files found under " + dir);
  return found[0];
}

}  // namespace

std::pair<Dataset, Dataset> load_fmnist(const std::string& dir, LoadReport* report) {
  Dataset train, test;
  train.name = test.name = "fmnist";
  train.split = Split::Train;
  test.split = Split::Test;
  train.features = read_idx_images(find_file(dir, {"train-images-idx3-ubyte"}));
  train.labels = read_idx_labels(find_file(dir, {"train-labels-idx1-ubyte"}));
  test.features = read_idx_images(find_file(dir, {"t10k-images-idx3-ubyte"}));
  test.labels = read_idx_labels(find_file(dir, {"t10k-labels-idx1-ubyte"}));
  if (train.n() != static_cast<int>(train.labels.size()) ||
      test.n() != static_cast<int>(test.labels.size()))
    raise(ErrorCode::Format, "image/label count mismatch");
  if (report) {
    report->name = "fmnist";
    report->rows = train.n() + test.n();
    report->dims = train.dim();
    report->classes = 10;
    report->digest = content_digest(train.features, train.labels);
  }
  return {std::move(train), std::move(test)};
}

GraphSpec load_cora(const std::string& dir, LoadReport* report,
                    std::map<long long, int>* id_map_out) {
  const std::string content_path = find_file(dir, {"cora.content"});
  const std::string cites_path = find_file(dir, {"cora.cites"});

  std::map<long long, int> id_map;
  std::vector<std::vector<double>> feats;
  std::vector<std::string> class_names;
  std::ifstream in(content_path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::stringstream ss(line);
    long long id;
    if (!(ss >> id))
      raise(ErrorCode::Parse, content_path + ":" + std::to_string(lineno) + ": bad paper id");
    std::vector<std::string> toks;
    std::string tok;
    while (ss >> tok) toks.push_back(tok);
    if (toks.size() < 2)
      raise(ErrorCode::Parse, content_path + ":" + std::to_string(lineno) + ": too few fields");
    std::vector<double> row;
    row.reserve(toks.size() - 1);
    for (size_t i = 0; i + 1 < toks.size(); ++i) {
      if (toks[i] != "0" && toks[i] != "1")
        raise(ErrorCode::Parse,
              content_path + ":" + std::to_string(lineno) + ": non-binary feature '" + toks[i] + "'");
      row.push_back(toks[i] == "1" ? 1.0 : 0.0);
    }
    id_map[id] = static_cast<int>(feats.size());
    feats.push_back(std::move(row));
    class_names.push_back(toks.back());
  }
  if (feats.empty()) raise(ErrorCode::Format, content_path + ": no rows");
  const size_t dim = feats[0].size();
  for (const auto& r : feats)
    if (r.size() != dim) raise(ErrorCode::Format, content_path + ": ragged feature rows");

  // deterministic label ids: sorted class names
  std::vector<std::string> sorted_names = class_names;
  std::sort(sorted_names.begin(), sorted_names.end());
  sorted_names.erase(std::unique(sorted_names.begin(), sorted_names.end()), sorted_names.end());
  std::map<std::string, int> label_ids;
  for (size_t i = 0; i < sorted_names.size(); ++i) label_ids[sorted_names[i]] = static_cast<int>(i);

  GraphSpec g;
  g.n_nodes = static_cast<int>(feats.size());
  Eigen::MatrixXd F(g.n_nodes, static_cast<int>(dim));
  std::vector<int> labels(g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) {
    for (size_t c = 0; c < dim; ++c) F(i, static_cast<int>(c)) = feats[i][c];
    labels[i] = label_ids[class_names[i]];
  }
  g.features = std::move(F);
  g.labels = std::move(labels);

  std::ifstream cites(cites_path);
  std::set<std::pair<int, int>> edge_set;
  int skipped = 0;
  long long a, b;
  while (cites >> a >> b) {
    auto ia = id_map.find(a), ib = id_map.find(b);
    if (ia == id_map.end() || ib == id_map.end()) {
      ++skipped;
      continue;
    }
    int u = ia->second, v = ib->second;
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    edge_set.emplace(u, v);
  }
  g.edges.assign(edge_set.begin(), edge_set.end());
  g.validate();

  if (report) {
    report->name = "cora";
    report->rows = g.n_nodes;
    report->dims = static_cast<int>(dim);
    report->classes = static_cast<int>(sorted_names.size());
    report->digest = content_digest(*g.features, *g.labels);
    report->skipped = skipped;
  }
  if (id_map_out) *id_map_out = std::move(id_map);
  return g;
}

Dataset stratified_subsample(const Dataset& ds, int target_n, uint64_t seed) {
  if (target_n <= 0 || target_n > ds.n())
    raise(ErrorCode::InvalidParameter, "subsample size out of range");
  const int C = ds.n_classes();
  std::vector<std::vector<int>> by_class(C);
  for (int i = 0; i < ds.n(); ++i) by_class[ds.labels[i]].push_back(i);

  Rng rng(seed);
  std::vector<int> take;
  // proportional counts, largest remainders fill to the target
  std::vector<double> exact(C);
  std::vector<int> counts(C);
  int assigned = 0;
  for (int c = 0; c < C; ++c) {
    exact[c] = static_cast<double>(by_class[c].size()) * target_n / ds.n();
    counts[c] = static_cast<int>(exact[c]);
    assigned += counts[c];
  }
  std::vector<int> order(C);
  for (int c = 0; c < C; ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return exact[x] - std::floor(exact[x]) > exact[y] - std::floor(exact[y]);
  });
  for (int k = 0; assigned < target_n; ++k, ++assigned) counts[order[k % C]] += 1;

  for (int c = 0; c < C; ++c) {
    auto& idx = by_class[c];
    const int m = std::min<int>(counts[c], static_cast<int>(idx.size()));
    for (int k = 0; k < m; ++k) {
      const size_t swap = k + rng.below(idx.size() - k);
      std::swap(idx[k], idx[swap]);
      take.push_back(idx[k]);
    }
  }
  std::sort(take.begin(), take.end());

  Dataset out;
  out.name = ds.name;
  out.split = ds.split;
  out.features.resize(static_cast<int>(take.size()), ds.dim());
  out.labels.resize(take.size());
  for (size_t r = 0; r < take.size(); ++r) {
    out.features.row(static_cast<int>(r)) = ds.features.row(take[r]);
    out.labels[r] = ds.labels[take[r]];
  }
  return out;
}

std::string content_digest(const Eigen::MatrixXd& features, const std::vector<int>& labels) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](uint64_t v) {
    for (int s = 0; s < 64; s += 8) {
      h ^= (v >> s) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (int r = 0; r < features.rows(); ++r)
    for (int c = 0; c < features.cols(); ++c) {
      uint64_t bits;
      const double x = features(r, c);
      static_assert(sizeof(double) == 8);
      std::memcpy(&bits, &x, 8);
      mix(bits);
    }
  for (int l : labels) mix(static_cast<uint64_t>(l));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace hdcal

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "data.hpp"
#include "graph.hpp"

using namespace hdcal;

namespace {

std::vector<Hypervector> random_nodes(int n, int dim, uint64_t seed, Repr repr) {
  std::vector<Hypervector> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i)
    out.push_back(repr == Repr::Phase ? random_phase(dim, seed * 100 + i)
                                      : random_bipolar(dim, seed * 100 + i));
  return out;
}

DistortionSpec tanh_spec(double gain) {
  DistortionSpec s;
  s.family = Family::Tanh;
  s.gain = gain;
  return s;
}

}  // namespace

TEST_CASE("graph spec validation") {
  GraphSpec g;
  g.n_nodes = 3;
  g.edges = {{0, 1}, {1, 2}};
  g.validate();
  g.edges.push_back({1, 1});
  CHECK_THROWS_AS(g.validate(), Error);
  g.edges.back() = {0, 1};
  CHECK_THROWS_AS(g.validate(), Error);
  g.edges.back() = {0, 5};
  CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("graphd encoding basics") {
  auto hvs = random_nodes(2, 4, 3, Repr::Bipolar);

  GraphSpec empty;
  empty.n_nodes = 2;
  Hypervector g0 = graphd_encode(empty, hvs);
  for (double x : g0.data) CHECK(x == 0.0);

  GraphSpec one;
  one.n_nodes = 2;
  one.edges = {{0, 1}};
  Hypervector g1 = graphd_encode(one, hvs);
  Hypervector expect = bind(hvs[0], hvs[1]);
  for (size_t d = 0; d < 4; ++d) CHECK(g1.data[d] == expect.data[d]);

  // relabeling nodes and vectors identically leaves the encoding unchanged
  GraphSpec g;
  g.n_nodes = 5;
  g.edges = {{0, 2}, {1, 4}, {2, 3}};
  auto vs = random_nodes(5, 64, 9, Repr::Bipolar);
  Hypervector before = graphd_encode(g, vs);
  const int perm[5] = {3, 0, 4, 1, 2};
  GraphSpec pg;
  pg.n_nodes = 5;
  for (auto [i, j] : g.edges) {
    int a = perm[i], b = perm[j];
    pg.edges.push_back({std::min(a, b), std::max(a, b)});
  }
  std::vector<Hypervector> pvs(5);
  for (int i = 0; i < 5; ++i) pvs[perm[i]] = vs[i];
  Hypervector after = graphd_encode(pg, pvs);
  CHECK(before.data == after.data);
}

TEST_CASE("node memory recovery, bipolar and phase") {
  // single edge: recovery is exact in both representations
  GraphSpec one;
  one.n_nodes = 2;
  one.edges = {{0, 1}};
  auto bip = random_nodes(2, 16, 5, Repr::Bipolar);
  Hypervector gb = graphd_encode(one, bip);
  Hypervector rec = graphd_node_memory(gb, bip[0]);
  CHECK(rec.data == bip[1].data);

  auto ph = random_nodes(2, 16, 7, Repr::Phase);
  Hypervector gp = graphd_encode(one, ph);
  Hypervector prec = graphd_node_memory(gp, ph[0]);
  Hypervector want = to_complex_pairs(ph[1]);
  for (size_t d = 0; d < prec.data.size(); ++d)
    CHECK(prec.data[d] == doctest::Approx(want.data[d]).epsilon(1e-9));

  // crosstalk oracle: recovered memory has cosine ~ sqrt(deg_i/|E|) to the
  // true bundle, and it dominates similarity to any other node's bundle
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    GraphSpec g = gen_random_graph(20, 10, seed);
    auto adj = g.adjacency();
    auto vs = random_nodes(20, 2048, seed, Repr::Bipolar);
    Hypervector G = graphd_encode(g, vs);
    for (int i = 0; i < 20; ++i) {
      Hypervector mi = graphd_node_memory(G, vs[i]);
      if (adj[i].empty()) {
        for (int j = 0; j < 20; ++j)
          CHECK(std::fabs(cosine_sim(mi, vs[j])) < 0.2);
        continue;
      }
      std::vector<Hypervector> nbrs;
      for (int j : adj[i]) nbrs.push_back(vs[j]);
      Hypervector truth = bundle(nbrs, false);
      const double expect = std::sqrt(static_cast<double>(adj[i].size()) / 10.0);
      CHECK(cosine_sim(mi, truth) == doctest::Approx(expect).epsilon(0.25));
      // dominance over non-neighbor bundles
      for (int k = 0; k < 20; ++k) {
        if (k == i || adj[k].empty() || adj[k] == adj[i]) continue;
        std::vector<Hypervector> other;
        for (int j : adj[k]) other.push_back(vs[j]);
        bool same = true;
        for (int j : adj[k])
          if (std::find(adj[i].begin(), adj[i].end(), j) == adj[i].end()) same = false;
        if (same) continue;
        CHECK(cosine_sim(mi, truth) > cosine_sim(mi, bundle(other, false)));
      }
    }
  }
}

TEST_CASE("reconstruction: clean pipelines are exact") {
  ThresholdPolicy tau;
  DistortionSpec ident;
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    GraphSpec g = gen_random_graph(20, 10, seed);
    Rng rng(seed);
    ReconResult rb = graphd_reconstruct(g, random_nodes(20, 2048, seed, Repr::Bipolar), ident,
                                        tau, rng);
    CHECK(rb.f1 == 1.0);
    Rng rng2(seed);
    ReconResult rp =
        graphd_reconstruct(g, random_nodes(20, 2048, seed + 50, Repr::Phase), ident, tau, rng2);
    CHECK(rp.f1 == 1.0);
  }
}

TEST_CASE("reconstruction: saturating storage collapses naive phase vectors") {
  GraphSpec g = gen_random_graph(20, 10, 4);
  Rng rng(4);
  ReconResult r = graphd_reconstruct(g, random_nodes(20, 2048, 11, Repr::Phase), tanh_spec(4.0),
                                     ThresholdPolicy{}, rng);
  CHECK(r.density > 0.9);
}

TEST_CASE("optimized phase vectors reconstruct under distortion") {
  OptimizeConfig cfg;
  cfg.iterations = 400;
  cfg.step_size = 60.0;
  cfg.seed = 21;
  std::vector<double> trace;
  auto opt = optimize_node_vectors(20, 2048, tanh_spec(4.0), cfg, Repr::Phase, &trace);
  CHECK(trace.back() < trace.front());

  GraphSpec g = gen_random_graph(20, 10, 6);
  Rng rng(6);
  ReconResult r = graphd_reconstruct(g, opt, tanh_spec(4.0), ThresholdPolicy{}, rng);
  CHECK(r.f1 == 1.0);
}

TEST_CASE("similarity distributions across pipelines") {
  DistortionSpec ident;
  Rng rng(0);
  auto bip = random_nodes(20, 2048, 31, Repr::Bipolar);
  Histogram hi = similarity_distribution(bip, ident, rng);
  CHECK(std::fabs(hi.mean) < 0.05);
  // mass concentrated near zero: middle fifth of the bins holds everything
  int central = 0, total = 0;
  for (int b = 0; b < 50; ++b) {
    total += hi.counts[b];
    if (std::fabs(hi.centers[b]) < 0.2) central += hi.counts[b];
  }
  CHECK(central == total);

  auto ph = random_nodes(20, 2048, 33, Repr::Phase);
  Rng r1(1), r2(2);
  Histogram clean = similarity_distribution(ph, ident, r1);
  Histogram noisy = similarity_distribution(ph, tanh_spec(4.0), r2);
  CHECK(noisy.mean > clean.mean);
  CHECK(noisy.mean > 0.9);

  OptimizeConfig cfg;
  cfg.iterations = 400;
  cfg.step_size = 60.0;
  cfg.seed = 3;
  auto opt = optimize_node_vectors(20, 2048, tanh_spec(4.0), cfg, Repr::Phase, nullptr);
  Rng r3(3);
  Histogram fixed = similarity_distribution(opt, tanh_spec(4.0), r3);
  CHECK(std::fabs(fixed.mean - clean.mean) < 0.1);
}

TEST_CASE("node vector optimization contracts") {
  // identity hardware: random vectors start near-optimal (initial loss is a
  // tiny fraction of the collapsed saturating case below) and stay optimal
  OptimizeConfig cfg;
  cfg.iterations = 100;
  cfg.step_size = 20.0;
  cfg.seed = 5;
  DistortionSpec ident;
  std::vector<double> trace;
  auto vecs = optimize_node_vectors(10, 512, ident, cfg, Repr::Phase, &trace);
  CHECK(vecs.size() == 10);
  CHECK(trace.front() < 1.0);
  CHECK(trace.back() <= trace.front());

  // saturating hardware: collapse makes the initial loss large and
  // optimization restores quasi-orthogonality
  std::vector<double> trace2;
  auto opt = optimize_node_vectors(20, 2048, tanh_spec(4.0), cfg, Repr::Phase, &trace2);
  CHECK(trace2.front() > 50.0 * trace.front());
  Rng rng(1);
  double pre = 0.0, post = 0.0;
  int cnt = 0;
  auto naive = random_nodes(20, 2048, 77, Repr::Phase);
  for (int i = 0; i < 20; ++i)
    for (int j = i + 1; j < 20; ++j) {
      pre += hw_similarity(naive[i], naive[j], tanh_spec(4.0), rng);
      post += hw_similarity(opt[i], opt[j], tanh_spec(4.0), rng);
      ++cnt;
    }
  pre /= cnt;
  post /= cnt;
  CHECK(pre > 0.6);
  CHECK(post < 0.2);

  // bipolar relaxation path returns sign-projected bipolar vectors
  auto bip = optimize_node_vectors(8, 256, ident, cfg, Repr::Bipolar, nullptr);
  for (const auto& v : bip) {
    CHECK(v.repr == Repr::Bipolar);
    for (double x : v.data) CHECK(std::fabs(x) == 1.0);
  }
}

TEST_CASE("relhd neighborhood bundles") {
  // path graph 0-1-2
  GraphSpec path;
  path.n_nodes = 3;
  path.edges = {{0, 1}, {1, 2}};
  auto vs = random_nodes(3, 32, 41, Repr::Bipolar);
  auto [m1, m2] = relhd_neighbors(path, vs);
  for (size_t d = 0; d < 32; ++d) {
    CHECK(m1[1].data[d] == vs[0].data[d] + vs[2].data[d]);
    CHECK(m2[1].data[d] == 2.0 * vs[1].data[d]);
  }

  // star: the center's 2-hop bundle is |leaves| copies of itself
  GraphSpec star;
  star.n_nodes = 5;
  star.edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  auto sv = random_nodes(5, 32, 43, Repr::Bipolar);
  auto [sm1, sm2] = relhd_neighbors(star, sv);
  for (size_t d = 0; d < 32; ++d) CHECK(sm2[0].data[d] == 4.0 * sv[0].data[d]);

  // isolated node has zero bundles
  GraphSpec lone;
  lone.n_nodes = 2;
  auto lv = random_nodes(2, 8, 45, Repr::Bipolar);
  auto [lm1, lm2] = relhd_neighbors(lone, lv);
  for (double x : lm1[0].data) CHECK(x == 0.0);
  for (double x : lm2[0].data) CHECK(x == 0.0);
}

TEST_CASE("relation encoding and role isolation") {
  GraphSpec g;
  g.n_nodes = 2;
  auto vs = random_nodes(2, 64, 47, Repr::Bipolar);
  RelationContext ctx = RelationContext::random(64, 3);

  // no edges: the relation vector is just the tagged identity
  auto I = relhd_encode(g, vs, ctx);
  Hypervector expect = bind(vs[0], ctx.omega0);
  CHECK(I[0].data == expect.data);

  // doubling every node vector doubles the relation vectors
  auto doubled = vs;
  for (auto& v : doubled) {
    v.repr = Repr::DenseReal;
    for (double& x : v.data) x *= 2.0;
  }
  auto I2 = relhd_encode(g, doubled, ctx);
  for (size_t d = 0; d < 64; ++d) CHECK(I2[0].data[d] == doctest::Approx(2.0 * I[0].data[d]));

  // role binding isolates the tagged component
  int hits = 0, trials = 0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    GraphSpec rg = gen_random_graph(20, 30, seed);
    auto nodes = random_nodes(20, 2048, 400 + seed, Repr::Bipolar);
    RelationContext rc = RelationContext::random(2048, 500 + seed);
    auto [m1, m2] = relhd_neighbors(rg, nodes);
    auto rel = relhd_encode(rg, nodes, rc);
    for (int k = 0; k < 20; ++k) {
      if (m1[k].data == std::vector<double>(2048, 0.0)) continue;
      Hypervector probe = bind(rel[k], rc.omega1);
      const double to_m1 = cosine_sim(probe, m1[k]);
      const double to_m2 = cosine_sim(probe, m2[k]);
      const double to_h = cosine_sim(probe, nodes[k]);
      ++trials;
      if (to_m1 > to_m2 && to_m1 > to_h) ++hits;
    }
  }
  CHECK(hits >= trials * 99 / 100);
}

TEST_CASE("relhd equivariance under node relabeling") {
  GraphSpec g = gen_random_graph(8, 10, 9);
  auto vs = random_nodes(8, 128, 51, Repr::Bipolar);
  RelationContext ctx = RelationContext::random(128, 5);
  auto I = relhd_encode(g, vs, ctx);

  std::vector<int> perm = {4, 2, 7, 0, 6, 1, 3, 5};
  GraphSpec pg;
  pg.n_nodes = 8;
  for (auto [i, j] : g.edges) {
    int a = perm[i], b = perm[j];
    pg.edges.push_back({std::min(a, b), std::max(a, b)});
  }
  std::vector<Hypervector> pvs(8);
  for (int i = 0; i < 8; ++i) pvs[perm[i]] = vs[i];
  auto pI = relhd_encode(pg, pvs, ctx);
  for (int i = 0; i < 8; ++i) CHECK(pI[perm[i]].data == I[i].data);
}

TEST_CASE("relhd classification on a planted-partition graph") {
  // two communities with correlated features
  const int per = 30, n = 2 * per, d = 24;
  GraphSpec g;
  g.n_nodes = n;
  Rng rng(13);
  Eigen::MatrixXd F(n, d);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    const int c = i < per ? 0 : 1;
    labels[i] = c;
    for (int f = 0; f < d; ++f)
      F(i, f) = (c == 0 ? 1.0 : -1.0) * (f % 3 == 0 ? 0.8 : 0.1) + 0.3 * rng.normal();
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool same = (i < per) == (j < per);
      const double p = same ? 0.15 : 0.01;
      if (rng.uniform() < p) g.edges.push_back({i, j});
    }
  g.features = F;
  g.labels = labels;

  std::vector<int> train_idx, test_idx;
  for (int i = 0; i < n; ++i) (i % 3 == 0 ? train_idx : test_idx).push_back(i);

  NodeClassifyConfig cfg;
  cfg.dim = 512;
  cfg.repeats = 3;
  cfg.seed = 17;
  NodeClassifyResult clean = relhd_classify(g, train_idx, test_idx, cfg);
  CHECK(clean.mean_accuracy >= 0.9);
  CHECK(clean.per_repeat.size() == 3);
  double mean = 0.0;
  for (double a : clean.per_repeat) mean += a;
  CHECK(clean.mean_accuracy == doctest::Approx(mean / 3.0));

  // missing labels rejected
  GraphSpec bare = g;
  bare.labels.reset();
  CHECK_THROWS_AS(relhd_classify(bare, train_idx, test_idx, cfg), Error);
}

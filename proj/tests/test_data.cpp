#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "data.hpp"

using namespace hdcal;

namespace {

std::string fixture_dir() {
  auto dir = std::filesystem::temp_directory_path() / "hdcal_fixtures";
  std::filesystem::create_directories(dir);
  return dir.string();
}

void write_idx_images(const std::string& path, const std::vector<std::vector<uint8_t>>& imgs,
                      int rows, int cols) {
  std::ofstream out(path, std::ios::binary);
  auto be32 = [&out](uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.put(static_cast<char>((v >> s) & 0xff));
  };
  be32(2051);
  be32(static_cast<uint32_t>(imgs.size()));
  be32(rows);
  be32(cols);
  for (const auto& img : imgs)
    out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
}

void write_idx_labels(const std::string& path, const std::vector<uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  auto be32 = [&out](uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.put(static_cast<char>((v >> s) & 0xff));
  };
  be32(2049);
  be32(static_cast<uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

}  // namespace

TEST_CASE("synthetic kernel dataset") {
  Eigen::MatrixXd X = gen_kernel_dataset(7);
  CHECK(X.rows() == 20);
  CHECK(X.cols() == 30);
  // nonnegative perturbations make every coordinate non-decreasing down rows
  for (int r = 1; r < 20; ++r)
    for (int c = 0; c < 30; ++c) CHECK(X(r, c) >= X(r - 1, c));
  CHECK(gen_kernel_dataset(7) == X);

  // |row19 - row0| concentrates near sqrt(30)*19*0.05 ~ 5.2
  double mean = 0.0;
  for (uint64_t s = 0; s < 20; ++s) {
    Eigen::MatrixXd W = gen_kernel_dataset(s);
    mean += (W.row(19) - W.row(0)).norm();
  }
  mean /= 20.0;
  CHECK(mean > 5.2 * 0.8);
  CHECK(mean < 5.2 * 1.2);
}

TEST_CASE("random graph generator") {
  GraphSpec g = gen_random_graph(20, 10, 3);
  CHECK(g.n_nodes == 20);
  CHECK(g.edges.size() == 10);
  for (auto [i, j] : g.edges) {
    CHECK(i != j);
    CHECK(i < j);
  }
  CHECK(gen_random_graph(20, 10, 3).edges == g.edges);

  GraphSpec tri = gen_random_graph(3, 3, 1);
  CHECK(tri.edges == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});

  CHECK(gen_random_graph(2, 0, 1).edges.empty());
  CHECK_THROWS_AS(gen_random_graph(3, 4, 1), Error);
}

TEST_CASE("isolet loader on a format fixture") {
  const std::string dir = fixture_dir();
  {
    std::ofstream train(dir + "/isolet1+2+3+4.data");
    // two rows, 617 features + 1-based label
    for (int row = 0; row < 4; ++row) {
      for (int c = 0; c < 617; ++c) train << (0.001 * (row + 1) * (c % 7)) << ", ";
      train << ((row % 26) + 1) << ".\n";
    }
  }
  {
    std::ofstream test(dir + "/isolet5.data");
    for (int c = 0; c < 617; ++c) test << 0.5 << ", ";
    test << 26 << ".\n";
  }
  LoadReport report;
  auto [train, test] = load_isolet(dir, &report);
  CHECK(train.dim() == 617);
  CHECK(train.n() == 4);
  CHECK(test.n() == 1);
  CHECK(report.classes == 26);
  for (int l : train.labels) {
    CHECK(l >= 0);
    CHECK(l < 26);
  }
  CHECK(test.labels[0] == 25);
  CHECK(train.features.minCoeff() >= -1.0);
  CHECK(train.features.maxCoeff() <= 1.0);
  // deterministic reload
  auto [train2, test2] = load_isolet(dir);
  CHECK(train2.features == train.features);
  CHECK(content_digest(train2.features, train2.labels) ==
        content_digest(train.features, train.labels));

  CHECK_THROWS_AS(load_isolet(dir + "/missing"), Error);
}

TEST_CASE("fmnist idx loader on a format fixture") {
  const std::string dir = fixture_dir();
  std::vector<std::vector<uint8_t>> imgs;
  std::vector<uint8_t> labels;
  for (int i = 0; i < 6; ++i) {
    std::vector<uint8_t> img(28 * 28);
    for (size_t p = 0; p < img.size(); ++p) img[p] = static_cast<uint8_t>((i * 37 + p) % 256);
    imgs.push_back(std::move(img));
    labels.push_back(static_cast<uint8_t>(i % 10));
  }
  write_idx_images(dir + "/train-images-idx3-ubyte", imgs, 28, 28);
  write_idx_labels(dir + "/train-labels-idx1-ubyte", labels);
  write_idx_images(dir + "/t10k-images-idx3-ubyte", {imgs[0], imgs[1]}, 28, 28);
  write_idx_labels(dir + "/t10k-labels-idx1-ubyte", {labels[0], labels[1]});

  LoadReport report;
  auto [train, test] = load_fmnist(dir, &report);
  CHECK(train.dim() == 784);
  CHECK(train.n() == 6);
  CHECK(test.n() == 2);
  CHECK(report.classes == 10);
  CHECK(train.features.minCoeff() >= -1.0);
  CHECK(train.features.maxCoeff() <= 1.0);
  // pixel 0 of image 0 is 0 -> -1.0 exactly
  CHECK(train.features(0, 0) == doctest::Approx(-1.0));

  // corrupt magic is rejected
  write_idx_labels(dir + "/train-images-idx3-ubyte", labels);  // wrong magic for images
  CHECK_THROWS_AS(load_fmnist(dir), Error);
  write_idx_images(dir + "/train-images-idx3-ubyte", imgs, 28, 28);  // restore
}

TEST_CASE("cora loader on a format fixture") {
  const std::string dir = fixture_dir();
  {
    std::ofstream content(dir + "/cora.content");
    const char* classes[3] = {"Rule_Learning", "Neural_Networks", "Theory"};
    for (int i = 0; i < 6; ++i) {
      content << (1000 + i);
      for (int f = 0; f < 10; ++f) content << "\t" << ((i + f) % 2);
      content << "\t" << classes[i % 3] << "\n";
    }
  }
  {
    std::ofstream cites(dir + "/cora.cites");
    cites << "1000\t1001\n1001\t1000\n1002\t1003\n1004\t9999\n1005\t1005\n";
  }
  LoadReport report;
  std::map<long long, int> ids;
  GraphSpec g = load_cora(dir, &report, &ids);
  CHECK(g.n_nodes == 6);
  CHECK(g.features->cols() == 10);
  CHECK(report.classes == 3);
  CHECK(report.skipped == 1);                       // dangling 9999
  CHECK(g.edges.size() == 2);                       // dedup + no self loop
  CHECK(ids.at(1000) == 0);
  for (int l : *g.labels) CHECK(l >= 0);
  // every node has a label and binary features
  CHECK(static_cast<int>(g.labels->size()) == g.n_nodes);
  for (int r = 0; r < g.n_nodes; ++r)
    for (int c = 0; c < 10; ++c)
      CHECK((g.features->coeff(r, c) == 0.0 || g.features->coeff(r, c) == 1.0));
}

TEST_CASE("stratified subsample keeps class proportions") {
  Dataset ds;
  ds.name = "toy";
  const int n = 100;
  ds.features = Eigen::MatrixXd::Random(n, 5);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) ds.labels[i] = i < 60 ? 0 : (i < 90 ? 1 : 2);
  Dataset sub = stratified_subsample(ds, 50, 1);
  CHECK(sub.n() == 50);
  int c0 = 0, c1 = 0, c2 = 0;
  for (int l : sub.labels) (l == 0 ? c0 : l == 1 ? c1 : c2)++;
  CHECK(std::abs(c0 - 30) <= 1);
  CHECK(std::abs(c1 - 15) <= 1);
  CHECK(std::abs(c2 - 5) <= 1);
  CHECK_THROWS_AS(stratified_subsample(ds, 0, 1), Error);
  CHECK_THROWS_AS(stratified_subsample(ds, 101, 1), Error);
}

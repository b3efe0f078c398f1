#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dnys/datasets.hpp"

using namespace dnys;

namespace {

struct TempCsv {
  std::string path;
  explicit TempCsv(const std::string& content) {
    path = std::string("test_csv_") + std::to_string(rand()) + ".csv";
    std::ofstream out(path);
    out << content;
  }
  ~TempCsv() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_csv parses a plain numeric file") {
  TempCsv f("1,2\n3,4\n5,6\n");
  const DataMatrix d = load_csv(f.path);
  REQUIRE(d.rows() == 3);
  REQUIRE(d.cols() == 2);
  CHECK(d.values(0, 0) == 1.0);
  CHECK(d.values(2, 1) == 6.0);
  CHECK_FALSE(d.target.has_value());
}

TEST_CASE("load_csv splits off the target column") {
  TempCsv f("1,2\n3,4\n5,6\n");
  const DataMatrix d = load_csv(f.path, -1);
  REQUIRE(d.cols() == 1);
  REQUIRE(d.target.has_value());
  CHECK((*d.target)[0] == 2.0);
  CHECK((*d.target)[1] == 4.0);
  CHECK((*d.target)[2] == 6.0);
}

TEST_CASE("load_csv auto-detects a header row") {
  TempCsv f("a,b\n1,2\n3,4\n");
  const DataMatrix d = load_csv(f.path);
  CHECK(d.rows() == 2);
}

TEST_CASE("load_csv rejects degenerate input") {
  TempCsv empty("");
  CHECK_THROWS_WITH_AS(load_csv(empty.path), doctest::Contains("no rows"),
                       std::runtime_error);

  TempCsv ragged("1,2\n3\n");
  CHECK_THROWS_WITH_AS(load_csv(ragged.path), doctest::Contains("ragged"),
                       std::runtime_error);

  TempCsv bad("1,2\n3,x\n");
  CHECK_THROWS_WITH_AS(load_csv(bad.path), doctest::Contains("row 2"),
                       std::runtime_error);
}

TEST_CASE("standardize uses the population std convention") {
  DataMatrix d;
  d.values.resize(3, 1);
  d.values << 1, 2, 3;
  const auto [z, stats] = standardize(d);
  // mean 2, population std sqrt(2/3): z = +-sqrt(3/2)
  const double expected = std::sqrt(1.5);
  CHECK(z.values(0, 0) == doctest::Approx(-expected).epsilon(1e-12));
  CHECK(z.values(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z.values(2, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(stats.mean[0] == doctest::Approx(2.0));
  CHECK(stats.stddev[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("standardize maps constant columns to zero") {
  DataMatrix d;
  d.values.resize(3, 2);
  d.values << 5, 1, 5, 2, 5, 3;
  const auto [z, stats] = standardize(d);
  CHECK(z.values.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.values.col(1).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("standardize reuses supplied statistics verbatim") {
  DataMatrix train, test;
  train.values.resize(2, 1);
  train.values << 0, 10;
  test.values.resize(1, 1);
  test.values << 5;
  const auto [ztrain, stats] = standardize(train);
  const auto [ztest, stats2] = standardize(test, stats);
  CHECK(ztest.values(0, 0) == doctest::Approx((5.0 - 5.0) / 5.0));
  CHECK(stats2.mean[0] == stats.mean[0]);
}

TEST_CASE("standardize is reproducible with its returned stats") {
  DataMatrix d;
  d.values.resize(4, 3);
  d.values.setRandom();
  const auto [z1, stats] = standardize(d);
  const auto [z2, stats2] = standardize(d, stats);
  CHECK((z1.values - z2.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("split_half partitions with ceil/floor sizes") {
  DataMatrix d;
  d.values.resize(5, 2);
  d.values.setRandom();
  const SplitResult s = split_half(d, 42);
  CHECK(s.train.rows() == 3);
  CHECK(s.test.rows() == 2);
  std::vector<char> seen(5, 0);
  for (int i : s.train_indices) seen[i] = 1;
  for (int i : s.test_indices) {
    CHECK(seen[i] == 0);
    seen[i] = 1;
  }
  for (char c : seen) CHECK(c == 1);
}

TEST_CASE("split_half is deterministic given the seed") {
  DataMatrix d;
  d.values.resize(20, 2);
  d.values.setRandom();
  const SplitResult a = split_half(d, 7);
  const SplitResult b = split_half(d, 7);
  CHECK(a.train_indices == b.train_indices);
  const SplitResult c = split_half(d, 8);
  CHECK(a.train_indices != c.train_indices);
}

TEST_CASE("split_half partition holds for many n and seeds") {
  for (int n = 2; n <= 17; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      DataMatrix d;
      d.values = Matrix::Zero(n, 1);
      for (int i = 0; i < n; ++i) d.values(i, 0) = i;
      const SplitResult s = split_half(d, seed);
      CHECK(static_cast<int>(s.train_indices.size()) == (n + 1) / 2);
      CHECK(static_cast<int>(s.test_indices.size()) == n / 2);
      std::vector<char> seen(n, 0);
      for (int i : s.train_indices) seen[i] += 1;
      for (int i : s.test_indices) seen[i] += 1;
      for (char c : seen) REQUIRE(c == 1);
    }
  }
}

TEST_CASE("stratified split balances score deciles") {
  const int n = 200;
  DataMatrix d;
  d.values.resize(n, 1);
  Vector scores(n);
  for (int i = 0; i < n; ++i) {
    d.values(i, 0) = i;
    scores[i] = static_cast<double>(i) / n;  // strictly increasing
  }
  const SplitResult s = split_half(d, 3, &scores);
  // each decile (20 points) must be split 10/10
  std::vector<int> train_per_decile(10, 0);
  for (int i : s.train_indices) ++train_per_decile[i / 20];
  for (int b = 0; b < 10; ++b) CHECK(train_per_decile[b] == 10);
}

TEST_CASE("toy regression with zero noise is exactly linear") {
  const DataMatrix d = generate_toy_regression(50, 3, 20.0, 0.0, 5);
  REQUIRE(d.target.has_value());
  for (int i = 0; i < 50; ++i)
    CHECK((*d.target)[i] == doctest::Approx(d.values(i, 0) + 20.0).epsilon(1e-15));
}

TEST_CASE("toy regression mean matches the offset within the CLT bound") {
  const int n = 100000;
  const double noise = 0.1, b = 20.0;
  const DataMatrix d = generate_toy_regression(n, 2, b, noise, 11);
  const double mean = d.target->mean();
  CHECK(std::abs(mean - b) <= 3.0 * (1.0 + noise) / std::sqrt(n));
}

TEST_CASE("toy regression is deterministic given the seed") {
  const DataMatrix a = generate_toy_regression(30, 2, 20.0, 0.1, 9);
  const DataMatrix b = generate_toy_regression(30, 2, 20.0, 0.1, 9);
  CHECK(a.values == b.values);
  CHECK(*a.target == *b.target);
}

TEST_CASE("gaussian clusters: degenerate and counting behavior") {
  ClusterSpec spec;
  spec.center = Vector(2);
  spec.center << 3, -1;
  spec.stddev = 0.0;
  spec.count = 4;
  const DataMatrix d = generate_gaussian_clusters({spec}, 1);
  REQUIRE(d.rows() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(d.values(i, 0) == 3.0);
    CHECK(d.values(i, 1) == -1.0);
    CHECK((*d.labels)[i] == 0);
  }

  ClusterSpec a = spec, b = spec;
  a.stddev = b.stddev = 0.1;
  a.count = 100;
  b.count = 5;
  b.center = Vector(2);
  b.center << 100, 100;
  const DataMatrix two = generate_gaussian_clusters({a, b}, 2);
  REQUIRE(two.rows() == 105);
  int counts[2] = {0, 0};
  for (int label : *two.labels) ++counts[label];
  CHECK(counts[0] == 100);
  CHECK(counts[1] == 5);
}

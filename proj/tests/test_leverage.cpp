#include <doctest.h>

#include <cmath>

#include "dnys/leverage.hpp"
#include "dnys/rng.hpp"
#include "dnys/verify.hpp"

using namespace dnys;

namespace {

KernelMatrix identity_kernel(int n) {
  KernelMatrix k;
  k.entries = Matrix::Identity(n, n);
  k.sigma = 1.0;
  return k;
}

DataMatrix scattered_points(int n, int d, double scale, std::uint64_t seed) {
  Rng rng(seed);
  DataMatrix data;
  data.values.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) data.values(i, j) = scale * rng.normal();
  return data;
}

}  // namespace

TEST_CASE("marginal kernel closed forms") {
  const MarginalKernel half = marginal_kernel(identity_kernel(4), 1.0);
  CHECK((half.p - 0.5 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);

  const MarginalKernel quarter = marginal_kernel(identity_kernel(1), 3.0);
  CHECK(quarter.p(0, 0) == doctest::Approx(0.25).epsilon(1e-12));

  CHECK_THROWS_AS(marginal_kernel(identity_kernel(2), 0.0), std::invalid_argument);
}

TEST_CASE("marginal kernel satisfies P + alpha (K+alpha I)^{-1} = I") {
  const KernelMatrix k = random_test_kernel(5, 3);
  const double alpha = 0.7;
  const MarginalKernel m = marginal_kernel(k, alpha);
  Matrix shifted = k.entries;
  shifted.diagonal().array() += alpha;
  const Matrix residual =
      m.p + alpha * shifted.inverse() - Matrix::Identity(5, 5);
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("exact scores: identity kernel and trace identity") {
  const LeverageScores s = rls_exact(identity_kernel(10), 1.0);
  for (int i = 0; i < 10; ++i) CHECK(s.scores[i] == doctest::Approx(0.5));
  CHECK(effective_dimension(s) == doctest::Approx(5.0));
  CHECK(effective_dimension_size(s) == 5);

  const KernelMatrix k = random_test_kernel(20, 5);
  const MarginalKernel m = marginal_kernel(k, 0.3);
  const LeverageScores scores = rls_exact(k, 0.3);
  CHECK(scores.scores.sum() == doctest::Approx(m.p.trace()).epsilon(1e-8));
}

TEST_CASE("exact scores match the eigen-decomposition formula") {
  const KernelMatrix k = random_test_kernel(40, 17);
  const double alpha = 0.5;
  const LeverageScores s = rls_exact(k, alpha);

  Eigen::SelfAdjointEigenSolver<Matrix> es(k.entries);
  for (int i = 0; i < 40; ++i) {
    double expected = 0.0;
    for (int j = 0; j < 40; ++j) {
      const double lam = es.eigenvalues()[j];
      const double v = es.eigenvectors()(i, j);
      expected += lam / (lam + alpha) * v * v;
    }
    REQUIRE(s.scores[i] == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("scores stay in (0,1); duplicates share a score") {
  DataMatrix d = scattered_points(12, 2, 1.0, 5);
  d.values.row(3) = d.values.row(9);  // exact duplicate pair
  const KernelMatrix k = gram(d, 1.0);
  const LeverageScores s = rls_exact(k, 0.05);
  for (int i = 0; i < 12; ++i) {
    CHECK(s.scores[i] > 0.0);
    CHECK(s.scores[i] < 1.0);
  }
  CHECK(s.scores[3] == doctest::Approx(s.scores[9]).epsilon(1e-10));
}

TEST_CASE("an outlier carries a larger score than clustered points") {
  // two tight clusters plus one far point
  DataMatrix d;
  d.values.resize(21, 2);
  Rng rng(8);
  for (int i = 0; i < 10; ++i)
    d.values.row(i) << 0.05 * rng.normal(), 0.05 * rng.normal();
  for (int i = 10; i < 20; ++i)
    d.values.row(i) << 3 + 0.05 * rng.normal(), 0.05 * rng.normal();
  d.values.row(20) << 30.0, 30.0;
  const KernelMatrix k = gram(d, 1.0);
  const LeverageScores s = rls_exact(k, 0.02);
  for (int i = 0; i < 20; ++i) CHECK(s.scores[20] > s.scores[i]);
}

TEST_CASE("effective dimension strictly decreases in alpha") {
  const KernelMatrix k = random_test_kernel(15, 23);
  const double d1 = effective_dimension(rls_exact(k, 0.1));
  const double d2 = effective_dimension(rls_exact(k, 1.0));
  const double d3 = effective_dimension(rls_exact(k, 10.0));
  CHECK(d1 > d2);
  CHECK(d2 > d3);
}

TEST_CASE("recursive scores fall back to exact under the budget") {
  const DataMatrix d = scattered_points(50, 3, 1.0, 2);
  const KernelMatrix k = gram(d, 1.0);
  const LeverageScores exact = rls_exact(k, 0.1);
  const LeverageScores approx = rls_recursive(d, 1.0, 0.1, 100, 4);
  CHECK(approx.exact);
  CHECK((approx.scores - exact.scores).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("recursive scores approximate well-separated points") {
  // far-apart points: K ~ I, exact scores ~ 1/(1+alpha)
  const DataMatrix d = scattered_points(500, 3, 50.0, 6);
  const double alpha = 1.0;
  const KernelMatrix k = gram(d, 1.0);
  const double exact_deff = effective_dimension(rls_exact(k, alpha));

  const LeverageScores approx = rls_recursive(d, 1.0, alpha, 100, 7);
  CHECK_FALSE(approx.exact);
  const double approx_deff = approx.scores.sum();
  CHECK(approx_deff <= 3.0 * exact_deff);
  CHECK(approx_deff >= exact_deff / 3.0);
  for (int i = 0; i < 500; ++i) {
    CHECK(approx.scores[i] > 0.0);
    CHECK(approx.scores[i] < 1.0);
  }
}

TEST_CASE("recursive scores are deterministic given the seed") {
  const DataMatrix d = scattered_points(300, 2, 2.0, 12);
  const LeverageScores a = rls_recursive(d, 1.0, 0.05, 64, 10);
  const LeverageScores b = rls_recursive(d, 1.0, 0.05, 64, 10);
  CHECK(a.scores == b.scores);
  CHECK_THROWS_AS(rls_recursive(d, 1.0, 0.05, 0, 10), std::invalid_argument);
}

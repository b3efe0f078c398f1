#include <doctest.h>

#include <cmath>

#include "dnys/rng.hpp"
#include "dnys/sampling.hpp"
#include "dnys/verify.hpp"
#include "stat_helpers.hpp"

using namespace dnys;

namespace {

int subset_mask(const LandmarkSet& c) {
  int mask = 0;
  for (int i : c.indices) mask |= 1 << i;
  return mask;
}

LeverageScores constant_scores(int n, double value, double alpha = 1.0) {
  LeverageScores s;
  s.scores = Vector::Constant(n, value);
  s.alpha = alpha;
  return s;
}

}  // namespace

TEST_CASE("sample_uniform basics") {
  const LandmarkSet full = sample_uniform(6, 6, 1);
  CHECK(full.indices == LandmarkSet::full(6).indices);
  CHECK(sample_uniform(10, 4, 3).indices == sample_uniform(10, 4, 3).indices);
  CHECK_THROWS_AS(sample_uniform(4, 5, 0), std::invalid_argument);
}

TEST_CASE("sample_uniform inclusion frequencies are k/n") {
  const int n = 10, k = 3, trials = 100000;
  std::vector<long> hits(n, 0);
  for (int t = 0; t < trials; ++t)
    for (int i : sample_uniform(n, k, 1000 + t).indices) ++hits[i];
  const double p = static_cast<double>(k) / n;
  const double sigma = std::sqrt(trials * p * (1 - p));
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(hits[i] - trials * p) <= 3.0 * sigma);
}

TEST_CASE("sample_rls selects a dominant score almost surely") {
  LeverageScores s = constant_scores(8, 1e-4);
  s.scores[5] = 1.0 - 1e-4;
  int hits = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t)
    if (sample_rls(s, 1, t).indices[0] == 5) ++hits;
  CHECK(hits > 0.99 * trials);
  CHECK(sample_rls(s, 8, 0).indices == LandmarkSet::full(8).indices);
}

TEST_CASE("sample_rls with equal scores matches uniform statistically") {
  const int n = 8, k = 2, trials = 60000;
  std::vector<long> hits(n, 0);
  for (int t = 0; t < trials; ++t)
    for (int i : sample_rls(constant_scores(n, 0.3), k, 5000 + t).indices)
      ++hits[i];
  const double p = static_cast<double>(k) / n;
  const double sigma = std::sqrt(trials * p * (1 - p));
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(hits[i] - trials * p) <= 4.0 * sigma);
}

TEST_CASE("DPP subset frequencies match the enumeration oracle") {
  const KernelMatrix k = random_test_kernel(5, 71);
  const double alpha = 0.8;
  const DppEnumeration oracle = enumerate_dpp(k, alpha);
  const DppSampler sampler(k, alpha);

  const int trials = 50000;
  std::vector<long> counts(oracle.probabilities.size(), 0);
  for (int t = 0; t < trials; ++t)
    ++counts[subset_mask(sampler.draw(t))];
  const double p =
      testutil::chi2_gof_pvalue(counts, oracle.probabilities, trials);
  CHECK(p > 0.001);
}

TEST_CASE("DPP sample size concentrates on the effective dimension") {
  const KernelMatrix k = random_test_kernel(8, 13);
  const double alpha = 0.5;
  const LeverageScores scores = rls_exact(k, alpha);
  const double d_eff = effective_dimension(scores);
  // size variance of a DPP: sum l_i (1 - l_i)
  double var = 0.0;
  for (int i = 0; i < 8; ++i) var += scores.scores[i] * (1 - scores.scores[i]);

  const DppSampler sampler(k, alpha);
  const int trials = 10000;
  double mean = 0.0;
  for (int t = 0; t < trials; ++t) mean += sampler.draw(77000 + t).size();
  mean /= trials;
  CHECK(std::abs(mean - d_eff) <= 3.0 * std::sqrt(var / trials));
}

TEST_CASE("k-DPP frequencies match the size-conditioned enumeration") {
  const KernelMatrix k = random_test_kernel(6, 29);
  const double alpha = 1.0;
  const int size = 3;
  const DppEnumeration oracle = enumerate_dpp(k, alpha);

  // conditional distribution over subsets of the given size
  std::vector<double> conditional(oracle.probabilities.size(), 0.0);
  double mass = 0.0;
  for (std::size_t mask = 0; mask < conditional.size(); ++mask)
    if (__builtin_popcount(static_cast<unsigned>(mask)) == size)
      mass += oracle.probabilities[mask];
  for (std::size_t mask = 0; mask < conditional.size(); ++mask)
    if (__builtin_popcount(static_cast<unsigned>(mask)) == size)
      conditional[mask] = oracle.probabilities[mask] / mass;

  const DppSampler sampler(k, alpha);
  const int trials = 50000;
  std::vector<long> counts(conditional.size(), 0);
  for (int t = 0; t < trials; ++t) {
    const LandmarkSet c = sampler.draw_k(size, 31000 + t);
    REQUIRE(c.size() == size);
    ++counts[subset_mask(c)];
  }
  CHECK(testutil::chi2_gof_pvalue(counts, conditional, trials) > 0.001);
}

TEST_CASE("k-DPP with k=1 follows the diagonal of L") {
  const KernelMatrix k = random_test_kernel(6, 51);
  const double alpha = 0.7;
  // Pr(i) = L_ii / tr(L) for singletons
  const Vector diag = k.entries.diagonal() / alpha;
  std::vector<double> probs(6);
  for (int i = 0; i < 6; ++i) probs[i] = diag[i] / diag.sum();

  const DppSampler sampler(k, alpha);
  const int trials = 40000;
  std::vector<long> counts(6, 0);
  for (int t = 0; t < trials; ++t)
    ++counts[sampler.draw_k(1, 777 + t).indices[0]];
  CHECK(testutil::chi2_gof_pvalue(counts, probs, trials) > 0.001);
}

TEST_CASE("k-DPP edge cases") {
  const KernelMatrix k = random_test_kernel(5, 9);
  CHECK(sample_kdpp(k, 1.0, 5, 0).indices == LandmarkSet::full(5).indices);
  CHECK_THROWS_AS(sample_kdpp(k, 1.0, 6, 0), std::invalid_argument);
  CHECK(sample_kdpp(k, 1.0, 2, 4).indices == sample_kdpp(k, 1.0, 2, 4).indices);
}

TEST_CASE("every sampler returns a valid landmark set") {
  const KernelMatrix k = random_test_kernel(9, 33);
  const LeverageScores s = rls_exact(k, 0.5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const LandmarkSet& c :
         {sample_uniform(9, 4, seed), sample_rls(s, 4, seed),
          sample_kdpp(k, 0.5, 4, seed), sample_dpp(k, 0.5, seed)}) {
      c.validate(9);
      for (std::size_t i = 1; i < c.indices.size(); ++i)
        REQUIRE(c.indices[i - 1] < c.indices[i]);
    }
  }
}

TEST_CASE("greedy_swap converges immediately when already on target") {
  const KernelMatrix k = random_test_kernel(10, 3);
  const LeverageScores s = rls_exact(k, 0.5);
  // huge epsilon: the initial subset always satisfies the break condition
  SwapConfig cfg;
  cfg.k = 4;
  cfg.target_logdet = 0.0;
  cfg.epsilon = 1e6;
  cfg.seed = 5;
  const SwapResult r = greedy_swap(k, s, cfg);
  CHECK(r.iterations == 0);
  CHECK(r.converged);
  r.landmarks.validate(10);
}

TEST_CASE("greedy_swap achieved logdet matches a fresh factorization") {
  const KernelMatrix k = random_test_kernel(30, 17);
  const LeverageScores s = rls_exact(k, 0.2);
  SwapConfig cfg;
  cfg.k = 8;
  cfg.epsilon = 0.05;
  cfg.max_iter = 500;
  cfg.seed = 11;
  // aim somewhere inside the attainable range
  cfg.target_logdet =
      logdet(cholesky(submatrix(k, sample_uniform(30, 8, 1)))) - 0.5;
  const SwapResult r = greedy_swap(k, s, cfg);
  const double fresh = logdet(cholesky(submatrix(k, r.landmarks)));
  CHECK(std::abs(r.achieved_logdet - fresh) <= 1e-8);
  CHECK(r.converged == (std::abs(r.achieved_logdet - cfg.target_logdet) <=
                        cfg.epsilon));
}

TEST_CASE("greedy_swap handles the k = n edge") {
  const KernelMatrix k = random_test_kernel(6, 23);
  const LeverageScores s = rls_exact(k, 0.5);
  SwapConfig cfg;
  cfg.k = 6;
  cfg.target_logdet = -100.0;
  cfg.epsilon = 0.1;
  const SwapResult r = greedy_swap(k, s, cfg);
  CHECK(r.landmarks.indices == LandmarkSet::full(6).indices);
  CHECK(r.iterations == 0);
  CHECK_FALSE(r.converged);
}

TEST_CASE("mean log-determinant orders uniform < RLS < k-DPP") {
  // clustered data gives a spread-out leverage distribution
  Rng rng(1234);
  DataMatrix d;
  d.values.resize(120, 2);
  for (int i = 0; i < 100; ++i)
    d.values.row(i) << 0.3 * rng.normal(), 0.3 * rng.normal();
  for (int i = 100; i < 120; ++i)
    d.values.row(i) << 4 + 2.0 * rng.normal(), 2.0 * rng.normal();
  const KernelMatrix k = gram(d, 1.0);
  const double alpha = 120 * 1e-3;
  const LeverageScores s = rls_exact(k, alpha);
  const DppSampler sampler(k, alpha);
  const int size = 12, trials = 10;

  double mean_unif = 0, mean_rls = 0, mean_kdpp = 0;
  for (int t = 0; t < trials; ++t) {
    mean_unif += logdet(cholesky(submatrix(k, sample_uniform(120, size, t))));
    mean_rls += logdet(cholesky(submatrix(k, sample_rls(s, size, 100 + t))));
    mean_kdpp += logdet(cholesky(submatrix(k, sampler.draw_k(size, 200 + t))));
  }
  CHECK(mean_unif < mean_rls);
  CHECK(mean_rls < mean_kdpp);
}

#include "dnys/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dnys/rng.hpp"

namespace dnys {

namespace {

// Projection-DPP phase over the span of the selected eigenvector columns
// (n x m, orthonormal). Sequential chain rule: pick a point proportional to
// the squared residual row norm, then Gram-Schmidt all rows against the
// chosen one. O(n m) per step.
std::vector<int> projection_sample(Matrix v, Rng& rng) {
  const int n = static_cast<int>(v.rows());
  const int m = static_cast<int>(v.cols());
  std::vector<int> picked;
  picked.reserve(m);
  for (int step = 0; step < m; ++step) {
    Vector w = v.rowwise().squaredNorm();
    for (int i : picked) w[i] = 0.0;
    const int i = rng.weighted(w);
    picked.push_back(i);
    if (step + 1 == m) break;
    const Vector u = v.row(i).normalized();
    const Vector coef = v * u;
    v.noalias() -= coef * u.transpose();
  }
  return picked;
}

// Table of elementary symmetric polynomials of the eigenvalues scaled by
// the largest one: esp[l][m] = e_l(scaled[0..m-1]). Linear-space recursion.
std::vector<std::vector<double>> esp_table(const Vector& scaled, int k) {
  const int n = static_cast<int>(scaled.size());
  std::vector<std::vector<double>> e(k + 1, std::vector<double>(n + 1, 0.0));
  for (int m = 0; m <= n; ++m) e[0][m] = 1.0;
  for (int l = 1; l <= k; ++l)
    for (int m = 1; m <= n; ++m)
      e[l][m] = e[l][m - 1] + scaled[m - 1] * e[l - 1][m - 1];
  return e;
}

// Log-space fallback, used only when the linear table degenerates.
std::vector<std::vector<double>> esp_table_log(const Vector& scaled, int k) {
  const int n = static_cast<int>(scaled.size());
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> e(k + 1, std::vector<double>(n + 1, neg_inf));
  for (int m = 0; m <= n; ++m) e[0][m] = 0.0;
  const auto logaddexp = [](double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
  };
  for (int l = 1; l <= k; ++l)
    for (int m = 1; m <= n; ++m)
      e[l][m] =
          logaddexp(e[l][m - 1], std::log(scaled[m - 1]) + e[l - 1][m - 1]);
  return e;
}

// Choose k eigenvector indices with probability proportional to the product
// of their eigenvalues (the k-DPP mixture weights).
std::vector<int> select_kdpp_eigenvectors(const Vector& evals, int k, Rng& rng) {
  const int n = static_cast<int>(evals.size());
  const double lmax = evals.maxCoeff();
  Vector scaled = evals / lmax;

  auto table = esp_table(scaled, k);
  const bool degenerate = !(table[k][n] > 0.0) || !std::isfinite(table[k][n]);
  std::vector<std::vector<double>> log_table;
  if (degenerate) log_table = esp_table_log(scaled, k);

  std::vector<int> chosen;
  chosen.reserve(k);
  int remaining = k;
  for (int m = n; m >= 1 && remaining >= 1; --m) {
    double marginal;
    if (m == remaining) {
      marginal = 1.0;  // must take everything that is left
    } else if (degenerate) {
      marginal =
          std::exp(std::log(scaled[m - 1]) + log_table[remaining - 1][m - 1] -
                   log_table[remaining][m]);
    } else {
      marginal = table[remaining][m] > 0.0
                     ? scaled[m - 1] * table[remaining - 1][m - 1] /
                           table[remaining][m]
                     : 0.0;
    }
    if (rng.uniform() < marginal) {
      chosen.push_back(m - 1);
      --remaining;
    }
  }
  return chosen;
}

}  // namespace

DppSampler::DppSampler(const KernelMatrix& k, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("DppSampler: alpha must be > 0");
  Eigen::SelfAdjointEigenSolver<Matrix> es(k.entries / alpha);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("DppSampler: eigendecomposition failed");
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
}

LandmarkSet DppSampler::draw(std::uint64_t seed) const {
  Rng rng(seed);
  const int n = static_cast<int>(evals_.size());
  std::vector<int> cols;
  for (int i = 0; i < n; ++i) {
    const double lam = evals_[i];
    if (rng.uniform() < lam / (1.0 + lam)) cols.push_back(i);
  }
  if (cols.empty()) return LandmarkSet{};
  Matrix v(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    v.col(static_cast<int>(j)) = evecs_.col(cols[j]);
  return LandmarkSet(projection_sample(std::move(v), rng));
}

LandmarkSet DppSampler::draw_k(int k, std::uint64_t seed) const {
  const int n = static_cast<int>(evals_.size());
  if (k < 1 || k > n) throw std::invalid_argument("draw_k: bad subset size");
  if (k == n) return LandmarkSet::full(n);
  Rng rng(seed);
  const std::vector<int> cols = select_kdpp_eigenvectors(evals_, k, rng);
  Matrix v(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    v.col(static_cast<int>(j)) = evecs_.col(cols[j]);
  return LandmarkSet(projection_sample(std::move(v), rng));
}

LandmarkSet sample_uniform(int n, int k, std::uint64_t seed) {
  if (k < 0 || k > n) throw std::invalid_argument("sample_uniform: bad k");
  Rng rng(seed);
  return LandmarkSet(rng.sample_without_replacement(n, k));
}

LandmarkSet sample_rls(const LeverageScores& scores, int k, std::uint64_t seed) {
  const int n = static_cast<int>(scores.scores.size());
  if (k < 0 || k > n) throw std::invalid_argument("sample_rls: bad k");
  Rng rng(seed);
  Vector weights = scores.scores;
  std::vector<int> picked;
  picked.reserve(k);
  for (int t = 0; t < k; ++t) {
    const int i = rng.weighted(weights);
    picked.push_back(i);
    weights[i] = 0.0;
  }
  return LandmarkSet(std::move(picked));
}

LandmarkSet sample_dpp(const KernelMatrix& k, double alpha, std::uint64_t seed) {
  return DppSampler(k, alpha).draw(seed);
}

LandmarkSet sample_kdpp(const KernelMatrix& k, double alpha, int k_size,
                        std::uint64_t seed) {
  return DppSampler(k, alpha).draw_k(k_size, seed);
}

SwapResult greedy_swap(const KernelMatrix& k, const LeverageScores& scores,
                       const SwapConfig& config) {
  const int n = k.size();
  if (config.k < 1 || config.k > n)
    throw std::invalid_argument("greedy_swap: bad subset size");
  if (!(config.epsilon > 0.0))
    throw std::invalid_argument("greedy_swap: epsilon must be > 0");
  if (config.max_iter < 1)
    throw std::invalid_argument("greedy_swap: max_iter must be >= 1");
  if (scores.scores.size() != n)
    throw std::invalid_argument("greedy_swap: score length mismatch");

  Rng rng(config.seed);

  if (config.k == n) {
    // Empty complement: Algorithm 1 has nothing to swap.
    const double d = logdet(cholesky(k.entries, LandmarkSet::full(n).indices));
    return {LandmarkSet::full(n), d, 0,
            std::abs(d - config.target_logdet) <= config.epsilon};
  }

  // Uniform initial subset; resample if it is numerically singular.
  std::vector<int> members;
  CholeskyFactor factor;
  bool initialized = false;
  for (int attempt = 0; attempt < 100 && !initialized; ++attempt) {
    members = rng.sample_without_replacement(n, config.k);
    Matrix kcc(config.k, config.k);
    for (int i = 0; i < config.k; ++i)
      for (int j = 0; j < config.k; ++j)
        kcc(i, j) = k.entries(members[i], members[j]);
    try {
      factor = cholesky(kcc, members);
      initialized = true;
    } catch (const NotPositiveDefinite&) {
    }
  }
  if (!initialized) throw NotPositiveDefinite(0, 0.0);

  std::vector<char> in_set(n, 0);
  for (int i : members) in_set[i] = 1;

  double d = logdet(factor);
  int iterations = 0;
  bool converged = false;

  while (true) {
    if (std::abs(d - config.target_logdet) <= config.epsilon) {
      converged = true;
      break;
    }
    if (iterations >= config.max_iter) break;
    ++iterations;

    // Candidate from the complement: p ~ l when too small, p ~ 1 - l otherwise.
    const bool too_small = d < config.target_logdet;
    Vector weights = Vector::Zero(n);
    for (int i = 0; i < n; ++i)
      if (!in_set[i])
        weights[i] = too_small ? scores.scores[i] : 1.0 - scores.scores[i];
    const int candidate = rng.weighted(weights);
    const int out_pos = rng.uniform_int(config.k);

    try {
      CholeskyFactor shrunk = chol_remove(factor, out_pos);
      Vector col(config.k - 1);
      for (int i = 0; i < config.k - 1; ++i)
        col[i] = k.entries(shrunk.order[i], candidate);
      CholeskyFactor grown = chol_append(shrunk, col, 1.0, candidate);
      const double d_new = logdet(grown);
      if (std::abs(d_new - config.target_logdet) <=
          std::abs(d - config.target_logdet)) {
        in_set[factor.order[out_pos]] = 0;
        in_set[candidate] = 1;
        factor = std::move(grown);
        d = d_new;
      }
    } catch (const NotPositiveDefinite&) {
      // Singular candidate submatrix: reject the swap, keep iterating.
    }
  }

  SwapResult out;
  out.landmarks = LandmarkSet(factor.order);
  out.achieved_logdet = d;
  out.iterations = iterations;
  out.converged = converged;
  return out;
}

}  // namespace dnys

#include "dnys/leverage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dnys/rng.hpp"

namespace dnys {

MarginalKernel marginal_kernel(const KernelMatrix& k, double alpha) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("marginal_kernel: alpha must be > 0");
  const int n = k.size();
  Matrix shifted = k.entries;
  shifted.diagonal().array() += alpha;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("marginal_kernel: K + alpha*I not positive definite");
  Matrix p = llt.solve(k.entries);
  p = 0.5 * (p + p.transpose()).eval();  // enforce symmetry
  return {std::move(p), alpha};
}

LeverageScores rls_exact(const KernelMatrix& k, double alpha) {
  MarginalKernel m = marginal_kernel(k, alpha);
  return {m.p.diagonal(), alpha, true};
}

double effective_dimension(const LeverageScores& scores) {
  return scores.scores.sum();
}

int effective_dimension_size(const LeverageScores& scores) {
  return std::max(1, static_cast<int>(std::llround(effective_dimension(scores))));
}

namespace {

// Score `active` rows against a sketch: l_i = (K_ii - k_iS (K_SS+aI)^{-1} k_iS^T)/a,
// clipped into (0,1). K_ii = 1 for the Gaussian kernel.
Vector score_against_sketch(const DataMatrix& data,
                            const std::vector<int>& active,
                            const std::vector<int>& sketch, double sigma,
                            double alpha) {
  const int m = static_cast<int>(sketch.size());
  DataMatrix active_data = select_rows(data, active);
  DataMatrix sketch_data = select_rows(data, sketch);

  const double inv_sigma2 = 1.0 / (sigma * sigma);
  Matrix k_ss(m, m);
  for (int i = 0; i < m; ++i) {
    k_ss(i, i) = 1.0 + alpha;
    for (int j = 0; j < i; ++j) {
      const double d2 =
          (sketch_data.values.row(i) - sketch_data.values.row(j)).squaredNorm();
      k_ss(i, j) = k_ss(j, i) = std::exp(-d2 * inv_sigma2);
    }
  }
  Eigen::LLT<Matrix> llt(k_ss);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("rls_recursive: sketch system not positive definite");

  const int n_active = static_cast<int>(active.size());
  Matrix k_as(n_active, m);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_active; ++i)
    for (int j = 0; j < m; ++j) {
      const double d2 =
          (active_data.values.row(i) - sketch_data.values.row(j)).squaredNorm();
      k_as(i, j) = std::exp(-d2 * inv_sigma2);
    }

  Matrix solved = llt.solve(k_as.transpose());  // m x n_active
  Vector out(n_active);
  const double lo = 1e-12, hi = 1.0 - 1e-12;
  for (int i = 0; i < n_active; ++i) {
    const double quad = k_as.row(i).dot(solved.col(i));
    out[i] = std::clamp((1.0 - quad) / alpha, lo, hi);
  }
  return out;
}

Vector rrls_recurse(const DataMatrix& data, const std::vector<int>& active,
                    double sigma, double alpha, int n_rrls, double oversample,
                    Rng& rng) {
  const int n_active = static_cast<int>(active.size());
  if (n_active <= n_rrls) {
    KernelMatrix k = gram(select_rows(data, active), sigma);
    return rls_exact(k, alpha).scores;
  }

  // Uniform half, recursively scored.
  std::vector<int> half_pos = rng.sample_without_replacement(n_active, (n_active + 1) / 2);
  std::sort(half_pos.begin(), half_pos.end());
  std::vector<int> half(half_pos.size());
  for (std::size_t i = 0; i < half_pos.size(); ++i) half[i] = active[half_pos[i]];
  Vector half_scores = rrls_recurse(data, half, sigma, alpha, n_rrls, oversample, rng);

  // Oversampled sketch proportional to the estimated scores.
  const double d_est = half_scores.sum();
  int m = std::min<int>(static_cast<int>(half.size()),
                        std::max(1, static_cast<int>(std::ceil(oversample * d_est))));
  Vector weights = half_scores;
  std::vector<int> sketch;
  sketch.reserve(m);
  for (int t = 0; t < m; ++t) {
    const int pick = rng.weighted(weights);
    sketch.push_back(half[pick]);
    weights[pick] = 0.0;
  }
  std::sort(sketch.begin(), sketch.end());
  return score_against_sketch(data, active, sketch, sigma, alpha);
}

}  // namespace

LeverageScores rls_recursive(const DataMatrix& data, double sigma, double alpha,
                             int n_rrls, std::uint64_t seed, double oversample) {
  if (n_rrls < 1) throw std::invalid_argument("rls_recursive: budget must be >= 1");
  const int n = data.rows();
  if (n_rrls > n) n_rrls = n;
  if (n <= n_rrls) {
    LeverageScores s = rls_exact(gram(data, sigma), alpha);
    return s;  // exact fallback
  }
  Rng rng(seed);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  Vector scores = rrls_recurse(data, all, sigma, alpha, n_rrls, oversample, rng);
  return {std::move(scores), alpha, false};
}

}  // namespace dnys

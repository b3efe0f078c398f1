#ifndef DNYS_SAMPLING_HPP
#define DNYS_SAMPLING_HPP

#include <cstdint>

#include "dnys/kernel.hpp"
#include "dnys/leverage.hpp"
#include "dnys/types.hpp"

namespace dnys {

LandmarkSet sample_uniform(int n, int k, std::uint64_t seed);

/// k distinct indices drawn sequentially without replacement, each draw
/// proportional to the leverage score among the remaining points.
LandmarkSet sample_rls(const LeverageScores& scores, int k, std::uint64_t seed);

/// Exact spectral sampler for DPP_L(K/alpha). Holds the eigendecomposition
/// so repeated draws share it.
class DppSampler {
 public:
  DppSampler(const KernelMatrix& k, double alpha);

  /// Unconstrained draw; the subset size is random with mean d_eff(K/alpha).
  LandmarkSet draw(std::uint64_t seed) const;

  /// k-DPP draw: eigenvectors chosen through the elementary-symmetric-
  /// polynomial recursion, then the projection phase. Exactly k landmarks.
  LandmarkSet draw_k(int k, std::uint64_t seed) const;

  const Vector& eigenvalues() const { return evals_; }

 private:
  Vector evals_;  // of L = K/alpha, ascending
  Matrix evecs_;
};

LandmarkSet sample_dpp(const KernelMatrix& k, double alpha, std::uint64_t seed);
LandmarkSet sample_kdpp(const KernelMatrix& k, double alpha, int k_size,
                        std::uint64_t seed);

/// Greedy determinant-targeting swap configuration: subset size k, target
/// log-determinant, tolerance, iteration cap.
struct SwapConfig {
  int k = 1;
  double target_logdet = 0.0;
  double epsilon = 0.1;
  int max_iter = 2000;
  std::uint64_t seed = 0;
};

struct SwapResult {
  LandmarkSet landmarks;
  double achieved_logdet = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Swap points in and out of a uniform initial subset until
/// |log det(K_CC) - target| <= epsilon. Candidates come from the complement
/// with probability proportional to l_i when the determinant is too small
/// and to 1 - l_i when too large; a swap is accepted when it does not move
/// the log-determinant away from the target. The Cholesky factor is
/// maintained incrementally.
SwapResult greedy_swap(const KernelMatrix& k, const LeverageScores& scores,
                       const SwapConfig& config);

}  // namespace dnys

#endif

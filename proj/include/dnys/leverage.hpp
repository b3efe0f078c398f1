#ifndef DNYS_LEVERAGE_HPP
#define DNYS_LEVERAGE_HPP

#include <cstdint>

#include "dnys/datasets.hpp"
#include "dnys/kernel.hpp"
#include "dnys/types.hpp"

namespace dnys {

/// P = K (K + alpha I)^{-1}, the marginal kernel of DPP_L(K/alpha).
struct MarginalKernel {
  Matrix p;
  double alpha = 0.0;
};

/// Ridge leverage scores l_i = P_ii, each in (0, 1).
struct LeverageScores {
  Vector scores;
  double alpha = 0.0;
  bool exact = true;
};

MarginalKernel marginal_kernel(const KernelMatrix& k, double alpha);

LeverageScores rls_exact(const KernelMatrix& k, double alpha);

/// sum(l_i) = trace(P), the expected DPP sample size.
double effective_dimension(const LeverageScores& scores);

/// Subset size used by the experiments: max(1, round(sum(l_i))).
int effective_dimension_size(const LeverageScores& scores);

/// Recursive approximate scores for large n: uniformly halve until the
/// active set fits the budget, score the half, oversample a Nystrom sketch
/// proportionally to those scores, then score all points against the
/// sketch. Falls back to rls_exact when n <= n_rrls.
LeverageScores rls_recursive(const DataMatrix& data, double sigma, double alpha,
                             int n_rrls, std::uint64_t seed,
                             double oversample = 2.0);

}  // namespace dnys

#endif

#ifndef DNYS_VERIFY_HPP
#define DNYS_VERIFY_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dnys/kernel.hpp"
#include "dnys/types.hpp"

namespace dnys {

/// Exhaustive enumeration of DPP_L(K/alpha): probability of every subset,
/// indexed by bitmask. Capped at n = 14 (16384 subsets).
struct DppEnumeration {
  int n = 0;
  double alpha = 0.0;
  std::vector<double> probabilities;  // probabilities[mask] = det(L_CC)/det(I+L)
  double normalization = 0.0;         // det(I + L)
};

DppEnumeration enumerate_dpp(const KernelMatrix& k, double alpha);

/// The enumeration-weighted sums behind Theorem 1 and Corollary 3. The empty
/// subset contributes zero matrices.
struct SubsetExpectations {
  Matrix inv_embed;     // E[C K_CC^{-1} C^T]
  Matrix sub_embed;     // E[C K_CC C^T]
  Matrix nystrom_gap;   // E[K - L(K,C)]
  Matrix projector;     // E[proj onto range(K^{1/2} C)]
  double trace_gap = 0.0;  // E[Tr(K - L(K,C))]
};

SubsetExpectations subset_expectations(const KernelMatrix& k,
                                       const DppEnumeration& e);

namespace ref {
// Serial reference of the enumeration sums, for tests and the benchmark.
SubsetExpectations subset_expectations(const KernelMatrix& k,
                                       const DppEnumeration& e);
}  // namespace ref

struct Theorem1Check {
  double dev_inverse;    // |E[C K_CC^{-1} C^T] - (K+aI)^{-1}|_max
  double dev_submatrix;  // |E[C K_CC C^T] - P_(2) o K|_max
  double eq5_slack;      // (|l|_inf + |l|_2^2) - lmax(E[C K_CC C^T]), >= 0
};
Theorem1Check check_theorem1(const KernelMatrix& k, double alpha);

struct Corollary3Check {
  double dev_nystrom;    // |E[K - L(K,C)] - alpha P|_max
  double dev_projector;  // |E[proj] - P|_max
  double dev_trace;      // |E[Tr(K-L)] - alpha d_eff|
};
Corollary3Check check_corollary3(const KernelMatrix& k, double alpha);

struct Lemma5Corollary6Check {
  double dev_mean;      // |E[v_C^T w_C] - v^T Diag(l) w|
  double dev_variance;  // |Var[v_C^T w_C] - (v o w)^T (Diag(l) - P o P)(v o w)|
  double dev_k2;        // |E[K_C Diag(l_C)^{-1} K_C^T] - K^2|_max
};
Lemma5Corollary6Check check_lemma5_corollary6(const KernelMatrix& k,
                                              double alpha, const Vector& v,
                                              const Vector& w);

struct Theorem3Check {
  double lower_slack;  // E[Tr(L - XLX)] + c(alpha) - Tr(K - XKX)
  double upper_slack;  // Tr(K - XKX) + min(alpha k, c(alpha)) - lhs
};
Theorem3Check check_theorem3(const KernelMatrix& k, double alpha,
                             const Matrix& projector);

struct Theorem4Check {
  double lhs;  // E[sqrt(R(z_L)/R(z_K))]
  double rhs;  // 1 + alpha d_eff / (n gamma)
};
Theorem4Check check_theorem4(const KernelMatrix& k, double alpha,
                             const Vector& z, double gamma, double noise_var);

struct Corollary2Check {
  double exceed_rate;  // fraction of samples beyond the concentration bound
  double bound;        // sqrt(48 n log(5/delta)) / lmin(K)
  int samples = 0;
};
Corollary2Check check_corollary2(const KernelMatrix& k, double alpha,
                                 const Vector& w, int n_samples, double delta,
                                 std::uint64_t seed);

/// Random Gaussian-kernel test instance: n uniform points in [0,1]^3, sigma 1.
KernelMatrix random_test_kernel(int n, std::uint64_t seed);

/// Runs every check on 20 random instances (n in 4..8, alpha in {0.1,1,10}),
/// printing one line per check. Returns true iff all pass.
bool run_verify_checks(std::ostream& out, std::uint64_t seed);

}  // namespace dnys

#endif

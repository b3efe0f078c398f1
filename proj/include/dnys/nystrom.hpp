#ifndef DNYS_NYSTROM_HPP
#define DNYS_NYSTROM_HPP

#include <cstdint>

#include "dnys/datasets.hpp"
#include "dnys/kernel.hpp"
#include "dnys/types.hpp"

namespace dnys {

/// Reusable product of every sampler: landmark set, cross-kernel block K_C
/// and the Cholesky factor of K_CC. The implied approximation is
/// K_hat = K_C (K_CC)^{-1} K_C^T; it is never materialized here.
struct NystromFactor {
  LandmarkSet landmarks;
  Matrix k_cross;          // n x k, columns in landmark order
  CholeskyFactor chol_cc;  // factor of K_CC
  double jitter = 1e-12;   // used only inside error evaluation
};

NystromFactor build(const KernelMatrix& k, const LandmarkSet& landmarks);

/// Build from raw features without materializing the full Gram matrix.
NystromFactor build(const DataMatrix& data, double sigma,
                    const LandmarkSet& landmarks);

/// ||K - K_hat||_F / ||K||_F with K_hat = K_C (K_CC + jitter I)^{-1} K_C^T.
/// Evaluated in row blocks; K_hat is never formed as an n x n matrix.
double frobenius_rel_error(const KernelMatrix& k, const NystromFactor& factor);

/// Mean over random principal blocks of ||K_BB - K_hat_BB||_F, for data too
/// large to materialize K. Blocks are drawn independently (with replacement
/// between blocks, without within).
double frobenius_error_sampled(const DataMatrix& data, double sigma,
                               const NystromFactor& factor, int n_blocks,
                               int block_size, std::uint64_t seed);

namespace ref {
double frobenius_error_sampled(const DataMatrix& data, double sigma,
                               const NystromFactor& factor, int n_blocks,
                               int block_size, std::uint64_t seed);
}  // namespace ref

/// Spectral summary of K_CC plus the relative Frobenius error of K_hat.
struct Diagnostics {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double condition_number = 0.0;
  double logdet = 0.0;
  double frob_rel_error = 0.0;
};

Diagnostics diagnostics(const KernelMatrix& k, const LandmarkSet& landmarks);

/// One CSV row: logdet, lambda_min, lambda_max, kappa, frob_rel_error.
std::string diagnostics_csv_row(const Diagnostics& d);

}  // namespace dnys

#endif

#ifndef DNYS_KPCA_HPP
#define DNYS_KPCA_HPP

#include "dnys/nystrom.hpp"
#include "dnys/types.hpp"

namespace dnys {

/// Nystrom-approximate kernel PCA model: eigenpairs of M/n with
/// M = K_CC^{-1/2} K_C^T K_C K_CC^{-1/2}, eigenvalues descending.
struct KpcaModel {
  Vector eigvals_c;  // all k eigenvalues of M/n, descending
  Matrix eigvecs;    // k x k, columns orthonormal, same order
  int components = 0;
  LandmarkSet landmarks;
};

/// M is formed through triangular solves against the stored Cholesky factor,
/// never an explicit inverse square root.
KpcaModel fit_kpca(const NystromFactor& factor, int components);

/// Eq.-style reconstruction error: trace(K)/n - sum of the leading
/// `components` Nystrom eigenvalues.
double reconstruction_error(const KernelMatrix& k, const KpcaModel& model);

}  // namespace dnys

#endif

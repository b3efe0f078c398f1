#include "dnys/kpca.hpp"

namespace dnys {

KpcaModel fit_kpca(const NystromFactor& factor, int components) {
  const int k = factor.chol_cc.size();
  if (components < 1 || components > k)
    throw std::invalid_argument("fit_kpca: component count out of range");
  const int n = static_cast<int>(factor.k_cross.rows());

  // W = K_C R^{-1}; M = W^T W is similar to the symmetric definition.
  Matrix w = factor.chol_cc.r.transpose()
                 .triangularView<Eigen::Lower>()
                 .solve(factor.k_cross.transpose())
                 .transpose();
  Matrix m = (w.transpose() * w) / static_cast<double>(n);
  m = 0.5 * (m + m.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("fit_kpca: eigendecomposition failed");

  KpcaModel model;
  model.components = components;
  model.landmarks = factor.landmarks;
  model.eigvals_c = es.eigenvalues().reverse();
  model.eigvecs = es.eigenvectors().rowwise().reverse();
  return model;
}

double reconstruction_error(const KernelMatrix& k, const KpcaModel& model) {
  const double total = k.entries.trace() / k.size();  // = 1 for unit diagonal
  double captured = 0.0;
  for (int i = 0; i < model.components; ++i) captured += model.eigvals_c[i];
  return total - captured;
}

}  // namespace dnys

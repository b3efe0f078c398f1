#ifndef DNYS_KRR_HPP
#define DNYS_KRR_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "dnys/datasets.hpp"
#include "dnys/kernel.hpp"
#include "dnys/types.hpp"

namespace dnys {

/// Nystrom KRR model: f(x) = sum_j coefficients[j] k(landmark_j, x).
struct KrrModel {
  LandmarkSet landmarks;
  Vector coefficients;
  double sigma = 0.0;
  double gamma = 0.0;
};

/// Solves (K_C^T K_C + n gamma K_CC) a = K_C^T y by Cholesky; no jitter is
/// added, so a near-singular K_CC with tiny gamma raises NotPositiveDefinite.
KrrModel fit_direct(const Matrix& k_cross, const CholeskyFactor& chol_cc,
                    const Vector& y, double gamma);

/// Predictions at new standardized rows given the landmark feature rows.
Vector predict(const KrrModel& model, const Matrix& x_new,
               const Matrix& landmark_points);

enum class DChoice { kUniform, kInverseLeverage };

/// Triangular factor B with B B^T = (K_CC D K_CC + n gamma K_CC)^{-1};
/// D = (n/k) I for the uniform choice, Diag(l_C)^{-1} for inverse-leverage.
struct Preconditioner {
  Matrix b;  // k x k upper triangular
  DChoice d_choice = DChoice::kUniform;

  static Preconditioner identity(int k) {
    return {Matrix::Identity(k, k), DChoice::kUniform};
  }
};

Preconditioner build_preconditioner(const CholeskyFactor& chol_cc,
                                    const Vector* scores_at_landmarks, int n,
                                    double gamma, DChoice d_choice);

struct PcgResult {
  KrrModel model;
  int iterations = 0;
  bool converged = false;
};

/// Preconditioned conjugate gradient on B^T (K_C^T K_C + n gamma K_CC) B.
PcgResult fit_pcg(const Matrix& k_cross, const CholeskyFactor& chol_cc,
                  const Vector& y, double gamma, const Preconditioner& precond,
                  double tol = 1e-10, int max_iter = 0);

/// Bias/variance of the ridge estimator z_hat = K_hat (K_hat + n gamma I)^{-1} y
/// under y = z + noise: bias = sqrt(n gamma^2 z^T (K_hat + n gamma I)^{-2} z),
/// variance = (noise_var/n) tr[K_hat^2 (K_hat + n gamma I)^{-2}].
std::pair<double, double> risk_components(const Matrix& k_hat, const Vector& z,
                                          double gamma, double noise_var);

/// k-fold CV over the gamma grid minimizing validation MSE; smallest gamma
/// wins ties. Landmarks act as fixed inducing points.
double cross_validate_gamma(const DataMatrix& train, const LandmarkSet& landmarks,
                            double sigma, const std::vector<double>& grid,
                            int folds, std::uint64_t seed);

/// Default CV grid: 8 log-spaced values in [1e-8, 1].
std::vector<double> default_gamma_grid();

}  // namespace dnys

#endif

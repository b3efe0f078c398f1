#ifndef DNYS_KERNEL_HPP
#define DNYS_KERNEL_HPP

#include <string>
#include <vector>

#include "dnys/datasets.hpp"
#include "dnys/types.hpp"

namespace dnys {

/// Gaussian Gram matrix K_ij = exp(-||x_i - x_j||^2 / sigma^2).
/// Symmetric, unit diagonal, entries in (0, 1].
struct KernelMatrix {
  Matrix entries;
  double sigma = 0.0;

  int size() const { return static_cast<int>(entries.rows()); }
};

/// Upper-triangular Cholesky factor R with R^T R = K_CC, together with the
/// landmark ordering it factorizes. Append/remove return new factors; the
/// ordering tracks which landmark sits at which pivot.
struct CholeskyFactor {
  Matrix r;                // k x k upper triangular, positive diagonal
  std::vector<int> order;  // landmark id per pivot position

  int size() const { return static_cast<int>(order.size()); }
};

KernelMatrix gram(const DataMatrix& data, double sigma);

/// n x k block of kernel values against the landmark columns.
Matrix cross_gram(const DataMatrix& data, const LandmarkSet& landmarks,
                  double sigma);

/// Principal submatrix K_CC.
Matrix submatrix(const KernelMatrix& k, const LandmarkSet& landmarks);

/// Pivot^2 below this raises NotPositiveDefinite instead of producing NaN.
inline constexpr double kCholPivotFloor = 1e-14;

/// Plain upper Cholesky of a symmetric matrix. `order` labels the rows; it
/// defaults to 0..k-1.
CholeskyFactor cholesky(const Matrix& a, std::vector<int> order = {});

/// Factor of the (k+1)x(k+1) matrix with the new row/column appended last.
/// new_column holds the kernel values against the existing order.
CholeskyFactor chol_append(const CholeskyFactor& factor,
                           const Vector& new_column, double new_diagonal,
                           int new_id);

/// Factor of the principal submatrix with the given position deleted;
/// the trailing block is re-triangularized with Givens rotations, O(k^2).
CholeskyFactor chol_remove(const CholeskyFactor& factor, int position);

/// 2 * sum(log R_ii); 0 for the empty factor (det of 0x0 = 1).
double logdet(const CholeskyFactor& factor);

/// Binary Gram cache: 8-byte little-endian row count, then n*n row-major
/// doubles, then the bandwidth.
void save_gram(const KernelMatrix& k, const std::string& path);
KernelMatrix load_gram(const std::string& path);

namespace ref {
// Serial reference implementations, kept for tests and the benchmark.
KernelMatrix gram(const DataMatrix& data, double sigma);
Matrix cross_gram(const DataMatrix& data, const LandmarkSet& landmarks,
                  double sigma);
}  // namespace ref

}  // namespace dnys

#endif

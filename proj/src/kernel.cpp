#include "dnys/kernel.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace dnys {

namespace {

inline double gauss_entry(const Matrix& x, int i, int j, double inv_sigma2) {
  const double d2 = (x.row(i) - x.row(j)).squaredNorm();
  return std::exp(-d2 * inv_sigma2);
}

void fill_gram_row(const Matrix& x, int i, double inv_sigma2, Matrix& k) {
  // Lower triangle of row i; the mirror is filled afterwards.
  for (int j = 0; j < i; ++j) k(i, j) = gauss_entry(x, i, j, inv_sigma2);
  k(i, i) = 1.0;
}

}  // namespace

KernelMatrix gram(const DataMatrix& data, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gram: sigma must be > 0");
  const int n = data.rows();
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  KernelMatrix k;
  k.sigma = sigma;
  k.entries.resize(n, n);
  // Each entry is independent, so the parallel result is bit-identical to
  // the serial one.
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) fill_gram_row(data.values, i, inv_sigma2, k.entries);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) k.entries(j, i) = k.entries(i, j);
  return k;
}

Matrix cross_gram(const DataMatrix& data, const LandmarkSet& landmarks,
                  double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("cross_gram: sigma must be > 0");
  const int n = data.rows();
  landmarks.validate(n);
  const int k = landmarks.size();
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  Matrix out(n, k);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      out(i, j) = i == landmarks.indices[j]
                      ? 1.0
                      : gauss_entry(data.values, i, landmarks.indices[j],
                                    inv_sigma2);
  return out;
}

namespace ref {

KernelMatrix gram(const DataMatrix& data, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gram: sigma must be > 0");
  const int n = data.rows();
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  KernelMatrix k;
  k.sigma = sigma;
  k.entries.resize(n, n);
  for (int i = 0; i < n; ++i) fill_gram_row(data.values, i, inv_sigma2, k.entries);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) k.entries(j, i) = k.entries(i, j);
  return k;
}

Matrix cross_gram(const DataMatrix& data, const LandmarkSet& landmarks,
                  double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("cross_gram: sigma must be > 0");
  const int n = data.rows();
  landmarks.validate(n);
  const int k = landmarks.size();
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  Matrix out(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      out(i, j) = i == landmarks.indices[j]
                      ? 1.0
                      : gauss_entry(data.values, i, landmarks.indices[j],
                                    inv_sigma2);
  return out;
}

}  // namespace ref

Matrix submatrix(const KernelMatrix& k, const LandmarkSet& landmarks) {
  landmarks.validate(k.size());
  const int m = landmarks.size();
  Matrix out(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      out(i, j) = k.entries(landmarks.indices[i], landmarks.indices[j]);
  return out;
}

CholeskyFactor cholesky(const Matrix& a, std::vector<int> order) {
  const int k = static_cast<int>(a.rows());
  if (a.cols() != k) throw std::invalid_argument("cholesky: square matrix required");
  if (order.empty()) {
    order.resize(k);
    for (int i = 0; i < k; ++i) order[i] = i;
  } else if (static_cast<int>(order.size()) != k) {
    throw std::invalid_argument("cholesky: order size mismatch");
  }

  CholeskyFactor f;
  f.order = std::move(order);
  f.r = Matrix::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    double pivot2 = a(j, j) - f.r.col(j).head(j).squaredNorm();
    if (pivot2 <= kCholPivotFloor) throw NotPositiveDefinite(j, pivot2);
    const double pivot = std::sqrt(pivot2);
    f.r(j, j) = pivot;
    for (int c = j + 1; c < k; ++c) {
      const double s = a(j, c) - f.r.col(j).head(j).dot(f.r.col(c).head(j));
      f.r(j, c) = s / pivot;
    }
  }
  return f;
}

CholeskyFactor chol_append(const CholeskyFactor& factor,
                           const Vector& new_column, double new_diagonal,
                           int new_id) {
  const int k = factor.size();
  if (new_column.size() != k)
    throw std::invalid_argument("chol_append: column length mismatch");

  CholeskyFactor out;
  out.r = Matrix::Zero(k + 1, k + 1);
  out.r.topLeftCorner(k, k) = factor.r;
  // Solve R^T r = new_column (forward substitution on the transpose).
  Vector r(k);
  for (int i = 0; i < k; ++i) {
    double s = new_column[i];
    for (int j = 0; j < i; ++j) s -= factor.r(j, i) * r[j];
    r[i] = s / factor.r(i, i);
  }
  const double pivot2 = new_diagonal - r.squaredNorm();
  if (pivot2 <= kCholPivotFloor) throw NotPositiveDefinite(k, pivot2);
  out.r.col(k).head(k) = r;
  out.r(k, k) = std::sqrt(pivot2);
  out.order = factor.order;
  out.order.push_back(new_id);
  return out;
}

CholeskyFactor chol_remove(const CholeskyFactor& factor, int position) {
  const int k = factor.size();
  if (position < 0 || position >= k)
    throw std::out_of_range("chol_remove: position out of range");

  // Drop the column; the trailing block gains one subdiagonal, zeroed out
  // by Givens rotations on adjacent row pairs.
  Matrix r(k, k - 1);
  if (position > 0) r.leftCols(position) = factor.r.leftCols(position);
  r.rightCols(k - 1 - position) = factor.r.rightCols(k - 1 - position);

  for (int j = position; j < k - 1; ++j) {
    const double a = r(j, j);
    const double b = r(j + 1, j);
    const double rad = std::hypot(a, b);
    if (rad == 0.0) throw NotPositiveDefinite(j, 0.0);
    const double c = a / rad;
    const double s = b / rad;
    for (int col = j; col < k - 1; ++col) {
      const double top = r(j, col);
      const double bot = r(j + 1, col);
      r(j, col) = c * top + s * bot;
      r(j + 1, col) = -s * top + c * bot;
    }
    r(j + 1, j) = 0.0;
    if (r(j, j) < 0.0) r.row(j).tail(k - 1 - j) = -r.row(j).tail(k - 1 - j);
  }

  CholeskyFactor out;
  out.r = r.topRows(k - 1);
  out.order = factor.order;
  out.order.erase(out.order.begin() + position);
  return out;
}

double logdet(const CholeskyFactor& factor) {
  double s = 0.0;
  for (int i = 0; i < factor.size(); ++i) s += std::log(factor.r(i, i));
  return 2.0 * s;
}

void save_gram(const KernelMatrix& k, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const std::uint64_t n = static_cast<std::uint64_t>(k.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  std::vector<double> row(k.size());
  for (int i = 0; i < k.size(); ++i) {
    for (int j = 0; j < k.size(); ++j) row[j] = k.entries(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double)) * k.size());
  }
  out.write(reinterpret_cast<const char*>(&k.sigma), sizeof(double));
  if (!out) throw std::runtime_error("short write to " + path);
}

KernelMatrix load_gram(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || n == 0) throw std::runtime_error(path + ": bad gram header");
  KernelMatrix k;
  k.entries.resize(static_cast<int>(n), static_cast<int>(n));
  std::vector<double> row(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * n));
    for (std::uint64_t j = 0; j < n; ++j)
      k.entries(static_cast<int>(i), static_cast<int>(j)) = row[j];
  }
  in.read(reinterpret_cast<char*>(&k.sigma), sizeof(double));
  if (!in) throw std::runtime_error(path + ": truncated gram file");
  return k;
}

}  // namespace dnys

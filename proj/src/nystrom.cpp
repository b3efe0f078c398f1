#include "dnys/nystrom.hpp"

#include <cmath>
#include <sstream>

#include "dnys/rng.hpp"

namespace dnys {

NystromFactor build(const KernelMatrix& k, const LandmarkSet& landmarks) {
  if (landmarks.empty()) throw std::invalid_argument("build: empty landmark set");
  landmarks.validate(k.size());
  NystromFactor f;
  f.landmarks = landmarks;
  f.k_cross.resize(k.size(), landmarks.size());
  for (int j = 0; j < landmarks.size(); ++j)
    f.k_cross.col(j) = k.entries.col(landmarks.indices[j]);
  f.chol_cc = cholesky(submatrix(k, landmarks), landmarks.indices);
  return f;
}

NystromFactor build(const DataMatrix& data, double sigma,
                    const LandmarkSet& landmarks) {
  if (landmarks.empty()) throw std::invalid_argument("build: empty landmark set");
  landmarks.validate(data.rows());
  NystromFactor f;
  f.landmarks = landmarks;
  f.k_cross = cross_gram(data, landmarks, sigma);
  Matrix kcc(landmarks.size(), landmarks.size());
  for (int i = 0; i < landmarks.size(); ++i)
    kcc.row(i) = f.k_cross.row(landmarks.indices[i]);
  kcc = 0.5 * (kcc + kcc.transpose()).eval();
  f.chol_cc = cholesky(kcc, landmarks.indices);
  return f;
}

namespace {

// Solver for K_hat rows: given rows K_BC, returns K_BC (K_CC + jitter I)^{-1} K_C^T
// applied blockwise. Prepares the jittered factor once.
struct HatApplier {
  Eigen::LLT<Matrix> llt;

  HatApplier(const CholeskyFactor& chol_cc, double jitter) {
    Matrix kcc = chol_cc.r.transpose() * chol_cc.r;
    kcc.diagonal().array() += jitter;
    llt.compute(kcc);
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite(0, 0.0);
  }

  // rows: b x k block K_BC; returns K_BC (K_CC + jitter)^{-1} rows2^T
  Matrix apply(const Matrix& rows, const Matrix& rows2) const {
    return rows * llt.solve(rows2.transpose());
  }
};

}  // namespace

double frobenius_rel_error(const KernelMatrix& k, const NystromFactor& factor) {
  const int n = k.size();
  const HatApplier hat(factor.chol_cc, factor.jitter);

  constexpr int kBlock = 256;
  const int n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> err2(n_blocks, 0.0), norm2(n_blocks, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < n_blocks; ++b) {
    const int begin = b * kBlock;
    const int len = std::min(kBlock, n - begin);
    const Matrix rows = factor.k_cross.middleRows(begin, len);
    const Matrix hat_rows = hat.apply(rows, factor.k_cross);
    err2[b] = (k.entries.middleRows(begin, len) - hat_rows).squaredNorm();
    norm2[b] = k.entries.middleRows(begin, len).squaredNorm();
  }
  double e = 0.0, f = 0.0;
  for (int b = 0; b < n_blocks; ++b) {
    e += err2[b];
    f += norm2[b];
  }
  return std::sqrt(e / f);
}

namespace {

double block_error(const DataMatrix& data, double sigma,
                   const NystromFactor& factor, const HatApplier& hat,
                   int block_size, std::uint64_t block_seed) {
  Rng rng(block_seed);
  std::vector<int> block = rng.sample_without_replacement(data.rows(), block_size);
  std::sort(block.begin(), block.end());

  const DataMatrix rows_data = select_rows(data, block);
  const Matrix k_bb = gram(rows_data, sigma).entries;
  Matrix k_bc(block_size, factor.landmarks.size());
  for (int i = 0; i < block_size; ++i) k_bc.row(i) = factor.k_cross.row(block[i]);
  return (k_bb - hat.apply(k_bc, k_bc)).norm();
}

}  // namespace

double frobenius_error_sampled(const DataMatrix& data, double sigma,
                               const NystromFactor& factor, int n_blocks,
                               int block_size, std::uint64_t seed) {
  if (block_size > data.rows())
    throw std::invalid_argument("frobenius_error_sampled: block larger than data");
  if (n_blocks < 1)
    throw std::invalid_argument("frobenius_error_sampled: need >= 1 block");
  const HatApplier hat(factor.chol_cc, factor.jitter);
  std::vector<double> errs(n_blocks, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < n_blocks; ++b)
    errs[b] = block_error(data, sigma, factor, hat, block_size,
                          seed + static_cast<std::uint64_t>(b));
  double mean = 0.0;
  for (int b = 0; b < n_blocks; ++b) mean += errs[b];
  return mean / n_blocks;
}

namespace ref {

double frobenius_error_sampled(const DataMatrix& data, double sigma,
                               const NystromFactor& factor, int n_blocks,
                               int block_size, std::uint64_t seed) {
  if (block_size > data.rows())
    throw std::invalid_argument("frobenius_error_sampled: block larger than data");
  if (n_blocks < 1)
    throw std::invalid_argument("frobenius_error_sampled: need >= 1 block");
  const HatApplier hat(factor.chol_cc, factor.jitter);
  double mean = 0.0;
  for (int b = 0; b < n_blocks; ++b)
    mean += block_error(data, sigma, factor, hat, block_size,
                        seed + static_cast<std::uint64_t>(b));
  return mean / n_blocks;
}

}  // namespace ref

Diagnostics diagnostics(const KernelMatrix& k, const LandmarkSet& landmarks) {
  const NystromFactor factor = build(k, landmarks);
  const Matrix kcc = submatrix(k, landmarks);
  Eigen::SelfAdjointEigenSolver<Matrix> es(kcc);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("diagnostics: eigendecomposition failed");

  Diagnostics d;
  d.lambda_min = es.eigenvalues().minCoeff();
  d.lambda_max = es.eigenvalues().maxCoeff();
  d.condition_number = d.lambda_max / d.lambda_min;
  d.logdet = logdet(factor.chol_cc);
  d.frob_rel_error = frobenius_rel_error(k, factor);
  return d;
}

std::string diagnostics_csv_row(const Diagnostics& d) {
  std::ostringstream os;
  os.precision(17);
  os << d.logdet << "," << d.lambda_min << "," << d.lambda_max << ","
     << d.condition_number << "," << d.frob_rel_error;
  return os.str();
}

}  // namespace dnys

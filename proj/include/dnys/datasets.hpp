#ifndef DNYS_DATASETS_HPP
#define DNYS_DATASETS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dnys/types.hpp"

namespace dnys {

/// n x d feature matrix with optional regression target and class labels.
struct DataMatrix {
  Matrix values;
  std::optional<Vector> target;
  std::optional<std::vector<int>> labels;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

/// Per-column mean and standard deviation, reusable on held-out data.
struct StandardizeStats {
  Vector mean;
  Vector stddev;  // population convention (divide by n); 0 marks a constant column
};

struct SplitResult {
  DataMatrix train;
  DataMatrix test;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

/// Column selector: non-negative = column index, negative = from the end
/// (-1 is the last column).
using ColumnSelector = std::optional<int>;

/// Load a CSV of numeric cells. A single header row is auto-detected (first
/// row non-numeric). Target/label columns are removed from the feature block.
DataMatrix load_csv(const std::string& path, ColumnSelector target_column = {},
                    ColumnSelector label_column = {});

/// Z-score each column. When stats are supplied (e.g. from the training
/// half) they are used verbatim instead of being recomputed. Constant
/// columns map to all-zero.
std::pair<DataMatrix, StandardizeStats> standardize(
    const DataMatrix& data, const std::optional<StandardizeStats>& stats = {});

/// 50/50 split: |train| = ceil(n/2). When leverage scores are given, the
/// split is stratified by score decile so both halves carry a similar
/// score distribution.
SplitResult split_half(const DataMatrix& data, std::uint64_t seed,
                       const Vector* leverage_scores = nullptr);

/// x_i ~ N(0, I_d), y_i = x_i[0] + b + eps_i with eps_i ~ N(0, noise_sigma^2).
DataMatrix generate_toy_regression(int n, int d, double b, double noise_sigma,
                                   std::uint64_t seed);

struct ClusterSpec {
  Vector center;
  double stddev = 1.0;
  int count = 0;
};

/// Isotropic Gaussian bumps; labels record the generating component.
DataMatrix generate_gaussian_clusters(const std::vector<ClusterSpec>& specs,
                                      std::uint64_t seed);

/// Gather rows (and target/labels if present).
DataMatrix select_rows(const DataMatrix& data, const std::vector<int>& rows);

}  // namespace dnys

#endif

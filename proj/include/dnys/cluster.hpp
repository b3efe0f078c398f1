#ifndef DNYS_CLUSTER_HPP
#define DNYS_CLUSTER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "dnys/nystrom.hpp"
#include "dnys/types.hpp"

namespace dnys {

struct ClusterResult {
  std::vector<int> assignments;
  double inertia = 0.0;
  std::optional<double> nmi_vs_truth;
};

/// Rank-s spectral embedding of the Nystrom feature map F = K_C R^{-1}:
/// the top-s left singular directions scaled by their singular values, so
/// the embedding Gram matches the best rank-s part of K_hat.
Matrix nystrom_features(const NystromFactor& factor, int s);

/// Lloyd's algorithm with k-means++ seeding; best inertia over restarts
/// (smallest restart index wins ties). Empty clusters are reseeded at the
/// point farthest from its assigned centroid.
ClusterResult kmeans(const Matrix& features, int s, int restarts, int max_iter,
                     std::uint64_t seed);

/// Normalized mutual information, sqrt normalization, in [0, 1].
double nmi(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace dnys

#endif

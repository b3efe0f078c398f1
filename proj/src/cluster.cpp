#include "dnys/cluster.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "dnys/rng.hpp"

namespace dnys {

Matrix nystrom_features(const NystromFactor& factor, int s) {
  const int k = factor.chol_cc.size();
  if (s < 1 || s > k)
    throw std::invalid_argument("nystrom_features: dimension out of range");

  Matrix w = factor.chol_cc.r.transpose()
                 .triangularView<Eigen::Lower>()
                 .solve(factor.k_cross.transpose())
                 .transpose();  // n x k, F F^T = K_hat
  Matrix g = w.transpose() * w;
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("nystrom_features: eigendecomposition failed");

  // F = U S V^T; F V_s = U_s S_s, the scaled top-s left singular directions.
  return w * es.eigenvectors().rightCols(s).rowwise().reverse();
}

namespace {

struct LloydRun {
  std::vector<int> assignments;
  double inertia = std::numeric_limits<double>::infinity();
};

LloydRun lloyd_once(const Matrix& x, int s, int max_iter, std::uint64_t seed) {
  const int n = static_cast<int>(x.rows());
  Rng rng(seed);

  // k-means++ seeding
  Matrix centroids(s, x.cols());
  centroids.row(0) = x.row(rng.uniform_int(n));
  Vector dist2 = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < s; ++c) {
    const double total = dist2.sum();
    int pick;
    if (total > 0.0) {
      pick = rng.weighted(dist2);
    } else {
      pick = rng.uniform_int(n);  // all points coincide with a centroid
    }
    centroids.row(c) = x.row(pick);
    dist2 = dist2.cwiseMin(
        (x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(n, 0);
  LloydRun run;
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (x.row(i) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < s; ++c) {
        const double d = (x.row(i) - centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) changed = true;
      assign[i] = best;
      inertia += best_d;
    }
    run.assignments = assign;
    run.inertia = inertia;
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(s, x.cols());
    std::vector<int> counts(s, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(assign[i]) += x.row(i);
      ++counts[assign[i]];
    }
    for (int c = 0; c < s; ++c) {
      if (counts[c] > 0) {
        centroids.row(c) = sums.row(c) / counts[c];
      } else {
        // reseed at the point farthest from its assigned centroid
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d = (x.row(i) - centroids.row(assign[i])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centroids.row(c) = x.row(far);
      }
    }
  }
  return run;
}

}  // namespace

ClusterResult kmeans(const Matrix& features, int s, int restarts, int max_iter,
                     std::uint64_t seed) {
  const int n = static_cast<int>(features.rows());
  if (s < 1 || s > n) throw std::invalid_argument("kmeans: bad cluster count");
  if (restarts < 1) throw std::invalid_argument("kmeans: need >= 1 restart");

  std::vector<LloydRun> runs(restarts);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < restarts; ++r)
    runs[r] = lloyd_once(features, s, max_iter,
                         seed + static_cast<std::uint64_t>(r));

  int best = 0;
  for (int r = 1; r < restarts; ++r)
    if (runs[r].inertia < runs[best].inertia) best = r;  // ties keep earliest

  ClusterResult out;
  out.assignments = std::move(runs[best].assignments);
  out.inertia = runs[best].inertia;
  return out;
}

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("nmi: partitions must be same nonempty length");
  const double n = static_cast<double>(a.size());

  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }

  // identical up to relabeling <=> the joint support is a bijection
  const bool same_partition = joint.size() == pa.size() && pa.size() == pb.size();
  if (same_partition) return 1.0;

  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (const auto& [label, cnt] : pa) ha -= cnt / n * std::log(cnt / n);
  for (const auto& [label, cnt] : pb) hb -= cnt / n * std::log(cnt / n);
  if (ha <= 0.0 || hb <= 0.0) return 0.0;
  for (const auto& [labels, cnt] : joint) {
    const double pij = cnt / n;
    mi += pij * std::log(pij * n * n / (pa[labels.first] * pb[labels.second]));
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

}  // namespace dnys

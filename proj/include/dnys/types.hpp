#ifndef DNYS_TYPES_HPP
#define DNYS_TYPES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnys {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when a (sub)matrix that should be positive definite is not,
/// e.g. K_CC assembled from near-duplicate landmarks. Carries the pivot
/// at which the factorization broke down.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(int pivot, double value)
      : std::runtime_error("matrix not positive definite at pivot " +
                           std::to_string(pivot) +
                           " (pivot^2 = " + std::to_string(value) + ")"),
        pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

/// Strictly increasing sequence of distinct row indices in [0, n).
struct LandmarkSet {
  std::vector<int> indices;

  LandmarkSet() = default;
  explicit LandmarkSet(std::vector<int> idx) : indices(std::move(idx)) {
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
      throw std::invalid_argument("landmark indices must be distinct");
  }

  int size() const { return static_cast<int>(indices.size()); }
  bool empty() const { return indices.empty(); }

  void validate(int n) const {
    if (!indices.empty() && (indices.front() < 0 || indices.back() >= n))
      throw std::out_of_range("landmark index out of range [0, " +
                              std::to_string(n) + ")");
  }

  static LandmarkSet full(int n) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    LandmarkSet c;
    c.indices = std::move(all);
    return c;
  }
};

}  // namespace dnys

#endif

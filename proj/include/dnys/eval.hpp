#ifndef DNYS_EVAL_HPP
#define DNYS_EVAL_HPP

#include <string>
#include <utility>
#include <vector>

#include "dnys/types.hpp"

namespace dnys {

/// Mean absolute percentage error (%), skipping targets with |y| <= 1e-12.
double mape(const Vector& y_true, const Vector& y_pred);

/// Symmetric MAPE (%), skipping points with |y| + |y_hat| <= 1e-12.
double smape(const Vector& y_true, const Vector& y_pred);

/// Type-7 quantile (linear interpolation between order statistics).
double quantile_type7(std::vector<double> values, double q);

/// Bulk = scores at or below the quantile value (ties to bulk), tail above.
std::pair<std::vector<int>, std::vector<int>> stratify(const Vector& test_scores,
                                                       double quantile = 0.7);

struct BinnedError {
  std::vector<double> edges;   // n_bins + 1 edges over [min, max]
  std::vector<double> metric;  // per-bin MAPE; NaN when undefined
  std::vector<int> counts;
};

BinnedError binned_error(const Vector& test_scores, const Vector& y_true,
                         const Vector& y_pred, int n_bins);

struct StratifiedReport {
  double bulk_metric = 0.0;
  double tail_metric = 0.0;
  double overall_metric = 0.0;
  double quantile = 0.7;
  BinnedError bins;

  std::string to_json() const;
  std::string csv_row() const;  // bulk, tail, overall, quantile
};

/// MAPE stratified by the score quantile; the tail may be empty (its metric
/// is then NaN).
StratifiedReport stratified_mape(const Vector& test_scores, const Vector& y_true,
                                 const Vector& y_pred, double quantile = 0.7,
                                 int n_bins = 10);

}  // namespace dnys

#endif

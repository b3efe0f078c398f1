#include "dnys/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dnys {

double mape(const Vector& y_true, const Vector& y_pred) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("mape: length mismatch");
  double acc = 0.0;
  int counted = 0;
  for (int i = 0; i < y_true.size(); ++i) {
    if (std::abs(y_true[i]) <= 1e-12) continue;
    acc += std::abs(y_true[i] - y_pred[i]) / std::abs(y_true[i]);
    ++counted;
  }
  if (counted == 0) throw std::runtime_error("MAPE undefined: all targets ~ 0");
  return 100.0 * acc / counted;
}

double smape(const Vector& y_true, const Vector& y_pred) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("smape: length mismatch");
  double acc = 0.0;
  int counted = 0;
  for (int i = 0; i < y_true.size(); ++i) {
    const double denom = std::abs(y_true[i]) + std::abs(y_pred[i]);
    if (denom <= 1e-12) continue;
    acc += 2.0 * std::abs(y_true[i] - y_pred[i]) / denom;
    ++counted;
  }
  if (counted == 0) throw std::runtime_error("SMAPE undefined: all pairs ~ 0");
  return 100.0 * acc / counted;
}

double quantile_type7(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile out of [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::pair<std::vector<int>, std::vector<int>> stratify(const Vector& test_scores,
                                                       double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0))
    throw std::invalid_argument("stratify: quantile must be in (0,1)");
  std::vector<double> vals(test_scores.data(),
                           test_scores.data() + test_scores.size());
  const double cut = quantile_type7(std::move(vals), quantile);
  std::vector<int> bulk, tail;
  for (int i = 0; i < test_scores.size(); ++i)
    (test_scores[i] <= cut ? bulk : tail).push_back(i);
  return {std::move(bulk), std::move(tail)};
}

BinnedError binned_error(const Vector& test_scores, const Vector& y_true,
                         const Vector& y_pred, int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("binned_error: need >= 1 bin");
  if (test_scores.size() != y_true.size() || y_true.size() != y_pred.size())
    throw std::invalid_argument("binned_error: length mismatch");
  const double lo = test_scores.minCoeff();
  const double hi = test_scores.maxCoeff();
  const double width = hi > lo ? (hi - lo) / n_bins : 1.0;

  BinnedError out;
  out.edges.resize(n_bins + 1);
  for (int b = 0; b <= n_bins; ++b) out.edges[b] = lo + b * width;
  out.counts.assign(n_bins, 0);
  std::vector<double> acc(n_bins, 0.0);
  std::vector<int> metric_counts(n_bins, 0);
  for (int i = 0; i < test_scores.size(); ++i) {
    int b = static_cast<int>((test_scores[i] - lo) / width);
    b = std::clamp(b, 0, n_bins - 1);  // max lands in the last bin
    ++out.counts[b];
    if (std::abs(y_true[i]) <= 1e-12) continue;
    acc[b] += std::abs(y_true[i] - y_pred[i]) / std::abs(y_true[i]);
    ++metric_counts[b];
  }
  out.metric.assign(n_bins, std::numeric_limits<double>::quiet_NaN());
  for (int b = 0; b < n_bins; ++b)
    if (metric_counts[b] > 0) out.metric[b] = 100.0 * acc[b] / metric_counts[b];
  return out;
}

StratifiedReport stratified_mape(const Vector& test_scores, const Vector& y_true,
                                 const Vector& y_pred, double quantile,
                                 int n_bins) {
  const auto [bulk, tail] = stratify(test_scores, quantile);
  const auto take = [&](const std::vector<int>& idx, const Vector& v) {
    Vector out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      out[static_cast<int>(i)] = v[idx[i]];
    return out;
  };

  StratifiedReport r;
  r.quantile = quantile;
  r.overall_metric = mape(y_true, y_pred);
  r.bulk_metric = bulk.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : mape(take(bulk, y_true), take(bulk, y_pred));
  r.tail_metric = tail.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : mape(take(tail, y_true), take(tail, y_pred));
  r.bins = binned_error(test_scores, y_true, y_pred, n_bins);
  return r;
}

std::string StratifiedReport::to_json() const {
  std::ostringstream os;
  os.precision(12);
  os << "{\"bulk_mape\":" << bulk_metric << ",\"tail_mape\":" << tail_metric
     << ",\"overall_mape\":" << overall_metric << ",\"quantile\":" << quantile
     << ",\"bin_edges\":[";
  for (std::size_t i = 0; i < bins.edges.size(); ++i)
    os << (i ? "," : "") << bins.edges[i];
  os << "],\"bin_mape\":[";
  for (std::size_t i = 0; i < bins.metric.size(); ++i) {
    os << (i ? "," : "");
    if (std::isnan(bins.metric[i]))
      os << "null";
    else
      os << bins.metric[i];
  }
  os << "],\"bin_counts\":[";
  for (std::size_t i = 0; i < bins.counts.size(); ++i)
    os << (i ? "," : "") << bins.counts[i];
  os << "]}";
  return os.str();
}

std::string StratifiedReport::csv_row() const {
  std::ostringstream os;
  os.precision(12);
  os << bulk_metric << "," << tail_metric << "," << overall_metric << ","
     << quantile;
  return os.str();
}

}  // namespace dnys

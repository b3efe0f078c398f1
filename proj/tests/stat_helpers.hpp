#ifndef DNYS_TESTS_STAT_HELPERS_HPP
#define DNYS_TESTS_STAT_HELPERS_HPP

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

// Test-only statistics: chi-square goodness of fit against enumerated
// probabilities, with small-expectation cells pooled.

namespace dnys::testutil {

// Regularized upper incomplete gamma Q(a, x) (series + continued fraction).
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // lower series, then complement
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-14) break;
    }
    const double p = sum * std::exp(-x + a * std::log(x) - gln);
    return 1.0 - p;
  }
  // Lentz continued fraction for Q directly
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-14) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

/// p-value of the chi-square statistic with `dof` degrees of freedom.
inline double chi2_sf(double stat, int dof) {
  return gamma_q(0.5 * dof, 0.5 * stat);
}

/// Goodness-of-fit p-value of observed counts against probabilities.
/// Cells with expected count below `min_expected` are pooled.
inline double chi2_gof_pvalue(const std::vector<long>& counts,
                              const std::vector<double>& probabilities,
                              long total, double min_expected = 5.0) {
  if (counts.size() != probabilities.size())
    throw std::invalid_argument("chi2_gof: size mismatch");
  double stat = 0.0;
  int cells = 0;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = probabilities[i] * total;
    if (expected < min_expected) {
      pooled_obs += counts[i];
      pooled_exp += expected;
      continue;
    }
    const double diff = counts[i] - expected;
    stat += diff * diff / expected;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    const double diff = pooled_obs - pooled_exp;
    stat += diff * diff / pooled_exp;
    ++cells;
  }
  if (cells < 2) throw std::runtime_error("chi2_gof: not enough cells");
  return chi2_sf(stat, cells - 1);
}

}  // namespace dnys::testutil

#endif

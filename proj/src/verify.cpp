#include "dnys/verify.hpp"

#include <cmath>
#include <functional>
#include <ostream>

#include "dnys/datasets.hpp"
#include "dnys/krr.hpp"
#include "dnys/leverage.hpp"
#include "dnys/rng.hpp"
#include "dnys/sampling.hpp"

namespace dnys {

namespace {

std::vector<int> mask_to_subset(int mask, int n) {
  std::vector<int> subset;
  for (int i = 0; i < n; ++i)
    if (mask & (1 << i)) subset.push_back(i);
  return subset;
}

Matrix gather(const Matrix& a, const std::vector<int>& rows,
              const std::vector<int>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<int>(i), static_cast<int>(j)) = a(rows[i], cols[j]);
  return out;
}

// Weighted sum of per-subset n x n contributions over all 2^n subsets.
// The work is split over a fixed chunk grid and the chunk results are
// combined in index order, so the sum does not depend on thread count.
constexpr int kChunks = 64;

Matrix accumulate_subsets(
    const DppEnumeration& e,
    const std::function<void(int, const std::vector<int>&, Matrix&)>& add,
    bool parallel) {
  const int n = e.n;
  const int total = 1 << n;
  const int chunk_len = (total + kChunks - 1) / kChunks;
  std::vector<Matrix> partial(kChunks, Matrix::Zero(n, n));

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int c = 0; c < kChunks; ++c) {
    const int begin = c * chunk_len;
    const int end = std::min(total, begin + chunk_len);
    for (int mask = begin; mask < end; ++mask) {
      if (mask == 0) continue;  // empty subset contributes zero
      add(mask, mask_to_subset(mask, n), partial[c]);
    }
  }
  Matrix out = Matrix::Zero(n, n);
  for (int c = 0; c < kChunks; ++c) out += partial[c];
  return out;
}

SubsetExpectations subset_expectations_impl(const KernelMatrix& k,
                                            const DppEnumeration& e,
                                            bool parallel) {
  const int n = k.size();
  Eigen::SelfAdjointEigenSolver<Matrix> es(k.entries);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("subset_expectations: eigendecomposition failed");
  Matrix sqrt_k = es.operatorSqrt();

  SubsetExpectations out;
  out.inv_embed = accumulate_subsets(
      e,
      [&](int mask, const std::vector<int>& subset, Matrix& acc) {
        const Matrix inv = gather(k.entries, subset, subset).inverse();
        const double p = e.probabilities[mask];
        for (std::size_t a = 0; a < subset.size(); ++a)
          for (std::size_t b = 0; b < subset.size(); ++b)
            acc(subset[a], subset[b]) += p * inv(static_cast<int>(a),
                                                 static_cast<int>(b));
      },
      parallel);

  out.sub_embed = accumulate_subsets(
      e,
      [&](int mask, const std::vector<int>& subset, Matrix& acc) {
        const double p = e.probabilities[mask];
        for (std::size_t a = 0; a < subset.size(); ++a)
          for (std::size_t b = 0; b < subset.size(); ++b)
            acc(subset[a], subset[b]) += p * k.entries(subset[a], subset[b]);
      },
      parallel);

  out.nystrom_gap = accumulate_subsets(
      e,
      [&](int mask, const std::vector<int>& subset, Matrix& acc) {
        std::vector<int> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        const Matrix kc = gather(k.entries, all, subset);
        const Matrix kcc_inv = gather(k.entries, subset, subset).inverse();
        acc += e.probabilities[mask] *
               (k.entries - kc * kcc_inv * kc.transpose());
      },
      parallel);
  // the empty subset contributes K - L(K, {}) = K
  out.nystrom_gap += e.probabilities[0] * k.entries;

  out.projector = accumulate_subsets(
      e,
      [&](int mask, const std::vector<int>& subset, Matrix& acc) {
        std::vector<int> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        const Matrix s = gather(sqrt_k, all, subset);
        const Matrix kcc_inv = gather(k.entries, subset, subset).inverse();
        acc += e.probabilities[mask] * (s * kcc_inv * s.transpose());
      },
      parallel);

  out.trace_gap = out.nystrom_gap.trace();
  return out;
}

}  // namespace

DppEnumeration enumerate_dpp(const KernelMatrix& k, double alpha) {
  const int n = k.size();
  if (n > 14) throw std::invalid_argument("enumerate_dpp: n capped at 14");
  if (!(alpha > 0.0))
    throw std::invalid_argument("enumerate_dpp: alpha must be > 0");

  const Matrix l = k.entries / alpha;
  Matrix shifted = l;
  shifted.diagonal().array() += 1.0;
  const double norm = shifted.determinant();

  DppEnumeration e;
  e.n = n;
  e.alpha = alpha;
  e.normalization = norm;
  const int total = 1 << n;
  e.probabilities.assign(total, 0.0);
  e.probabilities[0] = 1.0 / norm;
#pragma omp parallel for schedule(dynamic, 256)
  for (int mask = 1; mask < total; ++mask) {
    const auto subset = mask_to_subset(mask, n);
    e.probabilities[mask] = gather(l, subset, subset).determinant() / norm;
  }
  return e;
}

SubsetExpectations subset_expectations(const KernelMatrix& k,
                                       const DppEnumeration& e) {
  return subset_expectations_impl(k, e, true);
}

namespace ref {
SubsetExpectations subset_expectations(const KernelMatrix& k,
                                       const DppEnumeration& e) {
  return subset_expectations_impl(k, e, false);
}
}  // namespace ref

Theorem1Check check_theorem1(const KernelMatrix& k, double alpha) {
  const DppEnumeration e = enumerate_dpp(k, alpha);
  const SubsetExpectations se = subset_expectations(k, e);
  const MarginalKernel m = marginal_kernel(k, alpha);
  const Vector ell = m.p.diagonal();

  Matrix shifted = k.entries;
  shifted.diagonal().array() += alpha;
  const Matrix inv_expected = shifted.inverse();

  const Matrix p2 = Matrix(ell.asDiagonal()) + ell * ell.transpose() -
                    m.p.cwiseProduct(m.p);
  const Matrix second_expected = p2.cwiseProduct(k.entries);

  Theorem1Check out;
  out.dev_inverse = (se.inv_embed - inv_expected).cwiseAbs().maxCoeff();
  out.dev_submatrix = (se.sub_embed - second_expected).cwiseAbs().maxCoeff();

  Eigen::SelfAdjointEigenSolver<Matrix> es(se.sub_embed);
  const double lmax = es.eigenvalues().maxCoeff();
  out.eq5_slack = ell.lpNorm<Eigen::Infinity>() + ell.squaredNorm() - lmax;
  return out;
}

Corollary3Check check_corollary3(const KernelMatrix& k, double alpha) {
  const DppEnumeration e = enumerate_dpp(k, alpha);
  const SubsetExpectations se = subset_expectations(k, e);
  const MarginalKernel m = marginal_kernel(k, alpha);

  Corollary3Check out;
  out.dev_nystrom = (se.nystrom_gap - alpha * m.p).cwiseAbs().maxCoeff();
  out.dev_projector = (se.projector - m.p).cwiseAbs().maxCoeff();
  out.dev_trace = std::abs(se.trace_gap - alpha * m.p.trace());
  return out;
}

Lemma5Corollary6Check check_lemma5_corollary6(const KernelMatrix& k,
                                              double alpha, const Vector& v,
                                              const Vector& w) {
  const int n = k.size();
  if (v.size() != n || w.size() != n)
    throw std::invalid_argument("check_lemma5_corollary6: vector size mismatch");
  const DppEnumeration e = enumerate_dpp(k, alpha);
  const MarginalKernel m = marginal_kernel(k, alpha);
  const Vector ell = m.p.diagonal();

  double mean = 0.0, second = 0.0;
  Matrix k2_acc = Matrix::Zero(n, n);
  const int total = 1 << n;
  for (int mask = 1; mask < total; ++mask) {
    const auto subset = mask_to_subset(mask, n);
    double dot = 0.0;
    for (int i : subset) dot += v[i] * w[i];
    const double p = e.probabilities[mask];
    mean += p * dot;
    second += p * dot * dot;
    for (int i : subset)
      k2_acc.noalias() +=
          (p / ell[i]) * (k.entries.col(i) * k.entries.col(i).transpose());
  }

  const double mean_expected = v.dot(ell.asDiagonal() * w);
  const Vector vw = v.cwiseProduct(w);
  const Matrix cov = Matrix(ell.asDiagonal()) - m.p.cwiseProduct(m.p);
  const double var_expected = vw.dot(cov * vw);

  Lemma5Corollary6Check out;
  out.dev_mean = std::abs(mean - mean_expected);
  out.dev_variance = std::abs((second - mean * mean) - var_expected);
  out.dev_k2 = (k2_acc - k.entries * k.entries).cwiseAbs().maxCoeff();
  return out;
}

Theorem3Check check_theorem3(const KernelMatrix& k, double alpha,
                             const Matrix& projector) {
  const int n = k.size();
  if (projector.rows() != n || projector.cols() != n)
    throw std::invalid_argument("check_theorem3: projector size mismatch");
  const int rank = static_cast<int>(std::llround(projector.trace()));
  if (rank < 1) throw std::invalid_argument("check_theorem3: rank must be >= 1");

  const DppEnumeration e = enumerate_dpp(k, alpha);
  const double d_eff = rls_exact(k, alpha).scores.sum();
  const double c_alpha = alpha * d_eff;

  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  double expected = 0.0;  // E[Tr(L - X L X)]; empty subset has L = 0
  const int total = 1 << n;
  for (int mask = 1; mask < total; ++mask) {
    const auto subset = mask_to_subset(mask, n);
    const Matrix kc = gather(k.entries, all, subset);
    const Matrix kcc_inv = gather(k.entries, subset, subset).inverse();
    const Matrix l = kc * kcc_inv * kc.transpose();
    expected += e.probabilities[mask] * (l.trace() - (projector * l).trace());
  }

  const double base = k.entries.trace() - (projector * k.entries).trace();
  Theorem3Check out;
  out.lower_slack = expected + c_alpha - base;
  out.upper_slack = base + std::min(alpha * rank, c_alpha) - (expected + c_alpha);
  return out;
}

Theorem4Check check_theorem4(const KernelMatrix& k, double alpha,
                             const Vector& z, double gamma, double noise_var) {
  const int n = k.size();
  if (z.size() != n)
    throw std::invalid_argument("check_theorem4: target size mismatch");
  const DppEnumeration e = enumerate_dpp(k, alpha);
  const double d_eff = rls_exact(k, alpha).scores.sum();

  const auto risk_of = [&](const Matrix& k_hat) {
    const auto [bias, variance] = risk_components(k_hat, z, gamma, noise_var);
    return bias * bias + variance;
  };
  const double risk_full = risk_of(k.entries);

  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  double lhs = e.probabilities[0] * std::sqrt(risk_of(Matrix::Zero(n, n)) / risk_full);
  const int total = 1 << n;
  for (int mask = 1; mask < total; ++mask) {
    const auto subset = mask_to_subset(mask, n);
    const Matrix kc = gather(k.entries, all, subset);
    const Matrix kcc_inv = gather(k.entries, subset, subset).inverse();
    const Matrix l = kc * kcc_inv * kc.transpose();
    lhs += e.probabilities[mask] * std::sqrt(risk_of(l) / risk_full);
  }

  Theorem4Check out;
  out.lhs = lhs;
  out.rhs = 1.0 + alpha * d_eff / (n * gamma);
  return out;
}

Corollary2Check check_corollary2(const KernelMatrix& k, double alpha,
                                 const Vector& w, int n_samples, double delta,
                                 std::uint64_t seed) {
  const int n = k.size();
  if (w.size() != n)
    throw std::invalid_argument("check_corollary2: vector size mismatch");

  Matrix shifted = k.entries;
  shifted.diagonal().array() += alpha;
  const double reference = w.dot(shifted.inverse() * w);

  Eigen::SelfAdjointEigenSolver<Matrix> es(k.entries);
  const double lmin = es.eigenvalues().minCoeff();
  const double bound = std::sqrt(48.0 * n * std::log(5.0 / delta)) / lmin;

  int exceed = 0;
  for (int s = 0; s < n_samples; ++s) {
    const LandmarkSet c = sample_dpp(k, alpha, seed + static_cast<std::uint64_t>(s));
    double value = 0.0;  // empty sample: the quadratic form is 0
    if (!c.empty()) {
      const Matrix kcc = submatrix(k, c);
      Vector wc(c.size());
      for (int i = 0; i < c.size(); ++i) wc[i] = w[c.indices[i]];
      value = wc.dot(kcc.inverse() * wc);
    }
    if (std::abs(value - reference) > bound) ++exceed;
  }

  Corollary2Check out;
  out.exceed_rate = static_cast<double>(exceed) / n_samples;
  out.bound = bound;
  out.samples = n_samples;
  return out;
}

KernelMatrix random_test_kernel(int n, std::uint64_t seed) {
  Rng rng(seed);
  DataMatrix data;
  data.values.resize(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) data.values(i, j) = rng.uniform();
  return gram(data, 1.0);
}

bool run_verify_checks(std::ostream& out, std::uint64_t seed) {
  constexpr double kTol = 1e-9;
  const double alphas[3] = {0.1, 1.0, 10.0};
  bool all_pass = true;
  double worst_identity = 0.0, worst_slack = 0.0;

  const auto report = [&](const char* name, double value, bool ok) {
    out << name << ": " << value << (ok ? "  pass" : "  FAIL") << "\n";
    if (!ok) all_pass = false;
  };

  for (int inst = 0; inst < 20; ++inst) {
    const int n = 4 + inst % 5;
    const double alpha = alphas[inst % 3];
    const KernelMatrix k = random_test_kernel(n, seed + inst);
    Rng rng(seed + 1000 + inst);

    const Theorem1Check t1 = check_theorem1(k, alpha);
    worst_identity = std::max({worst_identity, t1.dev_inverse, t1.dev_submatrix});
    worst_slack = std::min(worst_slack, t1.eq5_slack);

    const Corollary3Check c3 = check_corollary3(k, alpha);
    worst_identity = std::max({worst_identity, c3.dev_nystrom, c3.dev_projector,
                               c3.dev_trace});

    Vector v(n), w(n);
    for (int i = 0; i < n; ++i) {
      v[i] = rng.normal();
      w[i] = rng.normal();
    }
    const Lemma5Corollary6Check l5 = check_lemma5_corollary6(k, alpha, v, w);
    worst_identity = std::max({worst_identity, l5.dev_mean, l5.dev_variance,
                               l5.dev_k2});

    Eigen::SelfAdjointEigenSolver<Matrix> es(k.entries);
    const int rank = 1 + rng.uniform_int(n - 1);
    const Matrix basis = es.eigenvectors().rightCols(rank);
    const Theorem3Check t3 = check_theorem3(k, alpha, basis * basis.transpose());
    worst_slack = std::min({worst_slack, t3.lower_slack, t3.upper_slack});

    Vector z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    const Theorem4Check t4 = check_theorem4(k, alpha, z, 0.1, 0.25);
    worst_slack = std::min(worst_slack, t4.rhs - t4.lhs);
  }

  report("theorem1/corollary3/lemma5/corollary6 max deviation", worst_identity,
         worst_identity <= kTol);
  report("eq5/theorem3/theorem4 min slack", worst_slack, worst_slack >= -kTol);

  const KernelMatrix k8 = random_test_kernel(8, seed + 77);
  Vector w8(8);
  Rng rng(seed + 78);
  for (int i = 0; i < 8; ++i) w8[i] = rng.normal();
  w8.normalize();
  const Corollary2Check c2 = check_corollary2(k8, 1.0, w8, 10000, 0.1, seed + 79);
  report("corollary2 exceedance rate", c2.exceed_rate, c2.exceed_rate <= 0.1);

  return all_pass;
}

}  // namespace dnys

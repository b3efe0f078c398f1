#include <doctest.h>

#include <cmath>

#include "dnys/krr.hpp"
#include "dnys/nystrom.hpp"
#include "dnys/rng.hpp"
#include "dnys/sampling.hpp"
#include "dnys/verify.hpp"

using namespace dnys;

namespace {

DataMatrix random_points(int n, int d, double scale, std::uint64_t seed) {
  Rng rng(seed);
  DataMatrix data;
  data.values.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) data.values(i, j) = scale * rng.normal();
  return data;
}

Vector random_vector(int n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("scalar normal equations") {
  // n=1, k=1, K=[1], y=[2], n*gamma=1: alpha = 2/(1+1) = 1
  Matrix k_cross(1, 1);
  k_cross << 1.0;
  const CholeskyFactor cc = cholesky(Matrix::Identity(1, 1));
  Vector y(1);
  y << 2.0;
  const KrrModel model = fit_direct(k_cross, cc, y, 1.0);
  CHECK(model.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_direct(k_cross, cc, y, 0.0), std::invalid_argument);
}

TEST_CASE("stronger regularization shrinks the coefficients") {
  const KernelMatrix k = random_test_kernel(20, 1);
  const NystromFactor f = build(k, sample_uniform(20, 6, 2));
  const Vector y = random_vector(20, 3);
  const double g = 0.01;
  const KrrModel a = fit_direct(f.k_cross, f.chol_cc, y, g);
  const KrrModel b = fit_direct(f.k_cross, f.chol_cc, y, 10 * g);
  CHECK(b.coefficients.norm() < a.coefficients.norm());
}

TEST_CASE("full landmark set reproduces exact KRR") {
  const KernelMatrix k = random_test_kernel(15, 4);
  const NystromFactor f = build(k, LandmarkSet::full(15));
  const Vector y = random_vector(15, 5);
  const double gamma = 0.05;
  const KrrModel model = fit_direct(f.k_cross, f.chol_cc, y, gamma);
  const Vector pred = k.entries * model.coefficients;

  Matrix shifted = k.entries;
  shifted.diagonal().array() += 15 * gamma;
  const Vector expected = k.entries * shifted.llt().solve(y);
  CHECK((pred - expected).norm() <= 1e-6 * expected.norm());
}

TEST_CASE("normal-equation residual contract") {
  const KernelMatrix k = random_test_kernel(25, 6);
  const NystromFactor f = build(k, sample_uniform(25, 8, 3));
  const Vector y = random_vector(25, 7);
  const double gamma = 1e-3;
  const KrrModel model = fit_direct(f.k_cross, f.chol_cc, y, gamma);

  const Matrix kcc = submatrix(k, f.landmarks);
  const Vector rhs = f.k_cross.transpose() * y;
  const Vector residual =
      (f.k_cross.transpose() * f.k_cross + 25 * gamma * kcc) *
          model.coefficients -
      rhs;
  CHECK(residual.norm() <= 1e-6 * rhs.norm());
}

TEST_CASE("predict: zero coefficients and near-interpolation") {
  KrrModel zero;
  zero.coefficients = Vector::Zero(3);
  zero.sigma = 1.0;
  const Matrix pts = random_points(3, 2, 1.0, 8).values;
  CHECK(predict(zero, pts, pts).cwiseAbs().maxCoeff() == 0.0);

  // far-apart points: K ~ I, gamma -> 0 interpolates the targets
  const DataMatrix d = random_points(10, 2, 30.0, 9);
  const KernelMatrix k = gram(d, 1.0);
  const NystromFactor f = build(k, LandmarkSet::full(10));
  const Vector y = random_vector(10, 10);
  KrrModel model = fit_direct(f.k_cross, f.chol_cc, y, 1e-12);
  model.sigma = 1.0;
  const Vector pred = predict(model, d.values, d.values);
  CHECK((pred - y).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("preconditioner: scalar closed form and inverse identity") {
  // k = 1: B = 1/sqrt(K11^2 d + n gamma K11)
  const CholeskyFactor cc = cholesky(Matrix::Identity(1, 1));
  const int n = 50;
  const double gamma = 0.1;
  const Preconditioner p =
      build_preconditioner(cc, nullptr, n, gamma, DChoice::kUniform);
  const double d = static_cast<double>(n) / 1;
  CHECK(p.b(0, 0) == doctest::Approx(1.0 / std::sqrt(d + n * gamma)));

  const KernelMatrix k = random_test_kernel(20, 11);
  const NystromFactor f = build(k, sample_uniform(20, 6, 4));
  const Vector scores = rls_exact(k, 0.1).scores;
  Vector at_landmarks(6);
  for (int i = 0; i < 6; ++i) at_landmarks[i] = scores[f.landmarks.indices[i]];
  const Preconditioner inv = build_preconditioner(f.chol_cc, &at_landmarks, 20,
                                                  0.01, DChoice::kInverseLeverage);
  const Matrix kcc = submatrix(k, f.landmarks);
  const Matrix inner =
      kcc * at_landmarks.cwiseInverse().asDiagonal() * kcc + 20 * 0.01 * kcc;
  CHECK((inv.b * inv.b.transpose() * inner - Matrix::Identity(6, 6))
            .cwiseAbs()
            .maxCoeff() < 1e-6);
  CHECK_THROWS_AS(
      build_preconditioner(f.chol_cc, nullptr, 20, 0.01, DChoice::kInverseLeverage),
      std::invalid_argument);
}

TEST_CASE("preconditioning lowers the condition number on average") {
  Rng rng(1);
  double plain_mean = 0, precond_mean = 0;
  for (int t = 0; t < 10; ++t) {
    const KernelMatrix k = random_test_kernel(40, 100 + t);
    const int n = 40;
    const double gamma = 1e-10;
    const NystromFactor f = build(k, sample_uniform(n, 10, t));
    const Matrix kcc = submatrix(k, f.landmarks);
    const Matrix a = f.k_cross.transpose() * f.k_cross + n * gamma * kcc;
    const Preconditioner p =
        build_preconditioner(f.chol_cc, nullptr, n, gamma, DChoice::kUniform);
    const Matrix at = p.b.transpose() * a * p.b;
    const auto kappa = [](const Matrix& m) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(m);
      return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    };
    plain_mean += kappa(a);
    precond_mean += kappa(at);
  }
  CHECK(precond_mean < plain_mean);
}

TEST_CASE("pcg matches the direct solve on well-conditioned systems") {
  const DataMatrix d = random_points(30, 2, 20.0, 12);  // K ~ I
  const KernelMatrix k = gram(d, 1.0);
  const NystromFactor f = build(k, sample_uniform(30, 8, 5));
  const Vector y = random_vector(30, 13);
  const double gamma = 0.01;

  const KrrModel direct = fit_direct(f.k_cross, f.chol_cc, y, gamma);
  const PcgResult pcg = fit_pcg(f.k_cross, f.chol_cc, y, gamma,
                                Preconditioner::identity(8));
  CHECK(pcg.converged);
  CHECK(pcg.iterations <= 8);  // CG is exact in k steps on a kappa~1 system
  CHECK((pcg.model.coefficients - direct.coefficients).norm() <=
        1e-8 * (1.0 + direct.coefficients.norm()));
}

TEST_CASE("preconditioned CG needs fewer iterations when ill-conditioned") {
  double with = 0, without = 0;
  for (int t = 0; t < 10; ++t) {
    const KernelMatrix k = random_test_kernel(40, 300 + t);
    const NystromFactor f = build(k, sample_uniform(40, 12, t));
    const Vector y = random_vector(40, 500 + t);
    const double gamma = 1e-10;
    const Preconditioner p =
        build_preconditioner(f.chol_cc, nullptr, 40, gamma, DChoice::kUniform);
    without += fit_pcg(f.k_cross, f.chol_cc, y, gamma,
                       Preconditioner::identity(12), 1e-10, 2000)
                   .iterations;
    with += fit_pcg(f.k_cross, f.chol_cc, y, gamma, p, 1e-10, 2000).iterations;
  }
  CHECK(with < without);
}

TEST_CASE("risk components: closed forms and monotonicity") {
  const int n = 12;
  const KernelMatrix k = random_test_kernel(n, 14);
  const Vector z = random_vector(n, 15);

  const auto [bias0, var0] = risk_components(k.entries, Vector::Zero(n), 0.1, 0.3);
  CHECK(bias0 == 0.0);

  const auto [biasz, varz] = risk_components(Matrix::Zero(n, n), z, 0.1, 0.3);
  CHECK(varz == doctest::Approx(0.0));
  CHECK(biasz == doctest::Approx(z.norm() / std::sqrt(n)).epsilon(1e-10));

  double prev_bias = -1.0, prev_var = 1e300;
  for (double gamma : {0.01, 0.1, 1.0}) {
    const auto [bias, var] = risk_components(k.entries, z, gamma, 0.3);
    CHECK(bias >= prev_bias);
    CHECK(var <= prev_var);
    prev_bias = bias;
    prev_var = var;
  }
}

TEST_CASE("cross-validation selects sensible ridge weights") {
  DataMatrix train = random_points(60, 2, 1.0, 16);
  // noiseless linear target: no regularization needed
  train.target = train.values.col(0);
  const LandmarkSet c = sample_uniform(60, 20, 6);

  CHECK(cross_validate_gamma(train, c, 1.0, {0.5}, 5, 1) == 0.5);

  const std::vector<double> grid = default_gamma_grid();
  const double chosen = cross_validate_gamma(train, c, 1.0, grid, 5, 1);
  CHECK(chosen == grid.front());

  CHECK(cross_validate_gamma(train, c, 1.0, grid, 5, 2) ==
        cross_validate_gamma(train, c, 1.0, grid, 5, 2));
  CHECK_THROWS_AS(cross_validate_gamma(train, c, 1.0, {}, 5, 1),
                  std::invalid_argument);
}

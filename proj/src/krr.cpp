#include "dnys/krr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dnys/rng.hpp"

namespace dnys {

namespace {

Vector solve_upper_system(const CholeskyFactor& f, const Vector& rhs) {
  // R^T R x = rhs
  Vector y = f.r.transpose().triangularView<Eigen::Lower>().solve(rhs);
  return f.r.triangularView<Eigen::Upper>().solve(y);
}

Matrix normal_matrix(const Matrix& k_cross, const CholeskyFactor& chol_cc,
                     double gamma) {
  const double n = static_cast<double>(k_cross.rows());
  const Matrix kcc = chol_cc.r.transpose() * chol_cc.r;
  Matrix a = k_cross.transpose() * k_cross + (n * gamma) * kcc;
  return 0.5 * (a + a.transpose()).eval();
}

}  // namespace

KrrModel fit_direct(const Matrix& k_cross, const CholeskyFactor& chol_cc,
                    const Vector& y, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("fit_direct: gamma must be > 0");
  if (y.size() != k_cross.rows())
    throw std::invalid_argument("fit_direct: target length mismatch");
  const CholeskyFactor system = cholesky(normal_matrix(k_cross, chol_cc, gamma));
  KrrModel model;
  model.coefficients = solve_upper_system(system, k_cross.transpose() * y);
  model.landmarks = LandmarkSet(chol_cc.order);
  model.gamma = gamma;
  return model;
}

Vector predict(const KrrModel& model, const Matrix& x_new,
               const Matrix& landmark_points) {
  if (landmark_points.rows() != model.coefficients.size())
    throw std::invalid_argument("predict: landmark row count mismatch");
  if (!(model.sigma > 0.0))
    throw std::invalid_argument("predict: model has no bandwidth set");
  const double inv_sigma2 = 1.0 / (model.sigma * model.sigma);
  Vector out(x_new.rows());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < x_new.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < landmark_points.rows(); ++j) {
      const double d2 = (x_new.row(i) - landmark_points.row(j)).squaredNorm();
      acc += model.coefficients[j] * std::exp(-d2 * inv_sigma2);
    }
    out[i] = acc;
  }
  return out;
}

Preconditioner build_preconditioner(const CholeskyFactor& chol_cc,
                                    const Vector* scores_at_landmarks, int n,
                                    double gamma, DChoice d_choice) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("build_preconditioner: gamma must be > 0");
  const int k = chol_cc.size();
  const Matrix kcc = chol_cc.r.transpose() * chol_cc.r;

  Vector d(k);
  if (d_choice == DChoice::kUniform) {
    d.setConstant(static_cast<double>(n) / k);
  } else {
    if (scores_at_landmarks == nullptr || scores_at_landmarks->size() != k)
      throw std::invalid_argument(
          "build_preconditioner: inverse-leverage choice needs landmark scores");
    d = scores_at_landmarks->cwiseInverse();
  }

  Matrix inner = kcc * d.asDiagonal() * kcc + (static_cast<double>(n) * gamma) * kcc;
  inner = 0.5 * (inner + inner.transpose()).eval();
  const CholeskyFactor f = cholesky(inner);

  Preconditioner p;
  p.d_choice = d_choice;
  p.b = f.r.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
  return p;
}

PcgResult fit_pcg(const Matrix& k_cross, const CholeskyFactor& chol_cc,
                  const Vector& y, double gamma, const Preconditioner& precond,
                  double tol, int max_iter) {
  if (!(gamma > 0.0)) throw std::invalid_argument("fit_pcg: gamma must be > 0");
  const int k = chol_cc.size();
  if (max_iter <= 0) max_iter = 10 * k;

  const Matrix a = normal_matrix(k_cross, chol_cc, gamma);
  const Matrix& b = precond.b;
  const Matrix a_tilde = b.transpose() * a * b;
  const Vector rhs = b.transpose() * (k_cross.transpose() * y);

  Vector x = Vector::Zero(k);
  Vector r = rhs;
  Vector p = r;
  const double rhs_norm = rhs.norm();
  double r2 = r.squaredNorm();
  int it = 0;
  bool converged = rhs_norm == 0.0 || std::sqrt(r2) <= tol * rhs_norm;
  while (!converged && it < max_iter) {
    const Vector ap = a_tilde * p;
    const double denom = p.dot(ap);
    if (!(denom > 0.0)) break;  // loss of positive definiteness in fp
    const double step = r2 / denom;
    x += step * p;
    r -= step * ap;
    const double r2_new = r.squaredNorm();
    ++it;
    if (std::sqrt(r2_new) <= tol * rhs_norm) {
      converged = true;
      r2 = r2_new;
      break;
    }
    p = r + (r2_new / r2) * p;
    r2 = r2_new;
  }

  PcgResult out;
  out.model.coefficients = b * x;
  out.model.landmarks = LandmarkSet(chol_cc.order);
  out.model.gamma = gamma;
  out.iterations = it;
  out.converged = converged;
  return out;
}

std::pair<double, double> risk_components(const Matrix& k_hat, const Vector& z,
                                          double gamma, double noise_var) {
  const int n = static_cast<int>(k_hat.rows());
  if (z.size() != n)
    throw std::invalid_argument("risk_components: target length mismatch");
  Matrix m = k_hat;
  m.diagonal().array() += n * gamma;
  const Eigen::LDLT<Matrix> ldlt(m);
  const Vector u = ldlt.solve(z);
  const double bias = std::sqrt(static_cast<double>(n)) * gamma * u.norm();
  const Matrix x = ldlt.solve(k_hat);  // K_hat and m commute, tr(X^T X) = tr(K^2 M^-2)
  const double variance = noise_var / n * x.squaredNorm();
  return {bias, variance};
}

std::vector<double> default_gamma_grid() {
  std::vector<double> grid(8);
  for (int i = 0; i < 8; ++i) grid[i] = std::pow(10.0, -8.0 + 8.0 * i / 7.0);
  return grid;
}

double cross_validate_gamma(const DataMatrix& train, const LandmarkSet& landmarks,
                            double sigma, const std::vector<double>& grid,
                            int folds, std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("cross_validate_gamma: empty grid");
  if (!train.target) throw std::invalid_argument("cross_validate_gamma: no target");
  const int n = train.rows();
  if (folds < 2 || folds > n)
    throw std::invalid_argument("cross_validate_gamma: bad fold count");

  Rng rng(seed);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[rng.uniform_int(static_cast<int>(i))]);

  const Matrix k_cross_all = cross_gram(train, landmarks, sigma);
  const DataMatrix landmark_points = select_rows(
      train, landmarks.indices);

  // K_CC comes from the landmark points themselves; only the fitted rows
  // change across folds.
  Matrix kcc(landmarks.size(), landmarks.size());
  for (int i = 0; i < landmarks.size(); ++i)
    kcc.row(i) = k_cross_all.row(landmarks.indices[i]);
  kcc = 0.5 * (kcc + kcc.transpose()).eval();
  const CholeskyFactor kcc_factor = cholesky(kcc, landmarks.indices);

  std::vector<double> sorted_grid = grid;
  std::sort(sorted_grid.begin(), sorted_grid.end());

  double best_gamma = sorted_grid.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (double gamma : sorted_grid) {
    double sse = 0.0;
    int counted = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<int> fit_rows, val_rows;
      for (int i = 0; i < n; ++i)
        (i % folds == f ? val_rows : fit_rows).push_back(perm[i]);
      Matrix k_fit(fit_rows.size(), landmarks.size());
      Vector y_fit(fit_rows.size());
      for (std::size_t i = 0; i < fit_rows.size(); ++i) {
        k_fit.row(static_cast<int>(i)) = k_cross_all.row(fit_rows[i]);
        y_fit[static_cast<int>(i)] = (*train.target)[fit_rows[i]];
      }
      try {
        KrrModel model = fit_direct(k_fit, kcc_factor, y_fit, gamma);
        model.sigma = sigma;
        Matrix x_val(val_rows.size(), train.cols());
        Vector y_val(val_rows.size());
        for (std::size_t i = 0; i < val_rows.size(); ++i) {
          x_val.row(static_cast<int>(i)) = train.values.row(val_rows[i]);
          y_val[static_cast<int>(i)] = (*train.target)[val_rows[i]];
        }
        const Vector pred = predict(model, x_val, landmark_points.values);
        sse += (pred - y_val).squaredNorm();
        counted += static_cast<int>(val_rows.size());
      } catch (const NotPositiveDefinite&) {
        sse = std::numeric_limits<double>::infinity();
        break;
      }
    }
    const double mse = counted > 0 ? sse / counted
                                   : std::numeric_limits<double>::infinity();
    if (mse < best_mse) {
      best_mse = mse;
      best_gamma = gamma;
    }
  }
  return best_gamma;
}

}  // namespace dnys

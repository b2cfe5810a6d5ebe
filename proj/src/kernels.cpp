#include "covrec/kernels.hpp"

#include "covrec/cov_estimators.hpp"
#include "covrec/rng.hpp"

namespace covrec::kernels {

namespace {

inline void kl_row(const Eigen::MatrixXd& B, std::uint64_t seed, Eigen::Index m,
                   Eigen::MatrixXd& X) {
  const Eigen::Index n = B.rows(), L = B.cols();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  for (Eigen::Index l = 0; l < L; ++l) {
    const double z = rng::normal(seed, static_cast<std::uint64_t>(m),
                                 static_cast<std::uint64_t>(l + 1));
    acc.noalias() += z * B.col(l);
  }
  X.row(m) = acc.transpose();
}

inline void chol_row(const Eigen::MatrixXd& A, std::uint64_t seed, Eigen::Index m,
                     Eigen::MatrixXd& X) {
  const Eigen::Index n = A.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index j = 0; j < n; ++j)
    z[j] = rng::normal(seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(j + 1));
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) acc.noalias() += z[j] * A.col(j);
  X.row(m) = acc.transpose();
}

inline void cov_row(const Eigen::MatrixXd& X, const Eigen::VectorXd& mu, Eigen::Index i,
                    Eigen::MatrixXd& C) {
  const Eigen::Index M = X.rows(), n = X.cols();
  const double inv = 1.0 / static_cast<double>(M);
  for (Eigen::Index j = i; j < n; ++j) {
    double s = 0.0;
    for (Eigen::Index m = 0; m < M; ++m) s += (X(m, i) - mu[i]) * (X(m, j) - mu[j]);
    C(i, j) = s * inv;
    C(j, i) = C(i, j);
  }
}

}  // namespace

void kl_sample_rows(const Eigen::MatrixXd& B, std::uint64_t seed, Eigen::MatrixXd& X) {
  const Eigen::Index M = X.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index m = 0; m < M; ++m) kl_row(B, seed, m, X);
}

void kl_sample_rows_serial(const Eigen::MatrixXd& B, std::uint64_t seed, Eigen::MatrixXd& X) {
  for (Eigen::Index m = 0; m < X.rows(); ++m) kl_row(B, seed, m, X);
}

void chol_sample_rows(const Eigen::MatrixXd& A, std::uint64_t seed, Eigen::MatrixXd& X) {
  const Eigen::Index M = X.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index m = 0; m < M; ++m) chol_row(A, seed, m, X);
}

void chol_sample_rows_serial(const Eigen::MatrixXd& A, std::uint64_t seed, Eigen::MatrixXd& X) {
  for (Eigen::Index m = 0; m < X.rows(); ++m) chol_row(A, seed, m, X);
}

Eigen::VectorXd row_mean(const Eigen::MatrixXd& X) {
  const Eigen::Index M = X.rows(), n = X.cols();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double s = 0.0;
    for (Eigen::Index m = 0; m < M; ++m) s += X(m, j);
    mu[j] = s / static_cast<double>(M);
  }
  return mu;
}

void covariance_mle(const Eigen::MatrixXd& X, const Eigen::VectorXd& mu, Eigen::MatrixXd& C) {
  const Eigen::Index n = X.cols();
  C.resize(n, n);
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index i = 0; i < n; ++i) cov_row(X, mu, i, C);
}

void covariance_mle_serial(const Eigen::MatrixXd& X, const Eigen::VectorXd& mu,
                           Eigen::MatrixXd& C) {
  const Eigen::Index n = X.cols();
  C.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) cov_row(X, mu, i, C);
}

void taper_apply(const Eigen::MatrixXd& C, int tau, Eigen::MatrixXd& out) {
  taper_weight(0, 0, tau);  // validate tau before entering the parallel region
  const Eigen::Index n = C.rows();
  out.resize(n, C.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < C.cols(); ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      out(i, j) = taper_weight(static_cast<int>(i), static_cast<int>(j), tau) * C(i, j);
}

void taper_apply_serial(const Eigen::MatrixXd& C, int tau, Eigen::MatrixXd& out) {
  const Eigen::Index n = C.rows();
  out.resize(n, C.cols());
  for (Eigen::Index j = 0; j < C.cols(); ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      out(i, j) = taper_weight(static_cast<int>(i), static_cast<int>(j), tau) * C(i, j);
}

}  // namespace covrec::kernels

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include "covrec/cov_estimators.hpp"
#include "covrec/errors.hpp"
#include "covrec/kernels.hpp"
#include "covrec/rng.hpp"

using namespace covrec;

namespace {

Eigen::MatrixXd random_dense(int r, int c, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A(r, c);
  for (int i = 0; i < A.size(); ++i) A.data()[i] = nd(gen);
  return A;
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(),
                     sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("parallel kernels are bit-identical to their serial twins") {
  // shapes chosen to hit remainders around typical chunk sizes, plus
  // single-row and single-column edges
  const int shapes[][2] = {{1, 1}, {1, 7}, {5, 1}, {17, 3}, {64, 9}, {33, 33}, {200, 12}};
  for (auto [m, n] : shapes) {
    for (std::uint64_t seed : {0ull, 42ull, 0xdeadbeefull}) {
      const Eigen::MatrixXd B = random_dense(n, std::max(1, n / 2), seed + 1);
      Eigen::MatrixXd xp(m, n), xs(m, n);
      kernels::kl_sample_rows(B, seed, xp);
      kernels::kl_sample_rows_serial(B, seed, xs);
      CHECK(bitwise_equal(xp, xs));

      const Eigen::MatrixXd A = random_dense(n, n, seed + 2);
      Eigen::MatrixXd yp(m, n), ys(m, n);
      kernels::chol_sample_rows(A, seed, yp);
      kernels::chol_sample_rows_serial(A, seed, ys);
      CHECK(bitwise_equal(yp, ys));

      const Eigen::VectorXd mu = kernels::row_mean(xp);
      Eigen::MatrixXd cp(n, n), cs(n, n);
      kernels::covariance_mle(xp, mu, cp);
      kernels::covariance_mle_serial(xp, mu, cs);
      CHECK(bitwise_equal(cp, cs));

      Eigen::MatrixXd tp(n, n), ts(n, n);
      const int tau = 2 * (1 + n / 3);
      kernels::taper_apply(cp, tau, tp);
      kernels::taper_apply_serial(cp, tau, ts);
      CHECK(bitwise_equal(tp, ts));
    }
  }
}

TEST_CASE("kl rows reproduce the counter-stream formula") {
  const int n = 6, L = 3, M = 4;
  const Eigen::MatrixXd B = random_dense(n, L, 9);
  Eigen::MatrixXd X(M, n);
  const std::uint64_t seed = 1234;
  kernels::kl_sample_rows(B, seed, X);
  for (int m = 0; m < M; ++m) {
    // modes are 1-based in the counter stream
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
    for (int l = 0; l < L; ++l)
      row += rng::normal(seed, static_cast<std::uint64_t>(m),
                         static_cast<std::uint64_t>(l + 1)) *
             B.col(l);
    CHECK((X.row(m).transpose() - row).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("chol rows reproduce A z with the per-row stream") {
  const int n = 5, M = 3;
  const Eigen::MatrixXd A = random_dense(n, n, 11);
  Eigen::MatrixXd X(M, n);
  const std::uint64_t seed = 77;
  kernels::chol_sample_rows(A, seed, X);
  for (int m = 0; m < M; ++m) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j)
      acc += rng::normal(seed, static_cast<std::uint64_t>(m),
                         static_cast<std::uint64_t>(j + 1)) *
             A.col(j);
    CHECK((X.row(m).transpose() - acc).cwiseAbs().maxCoeff() == 0.0);
  }

  // the sampled second moment actually approaches A A^T
  const int big = 20000;
  Eigen::MatrixXd Y(big, n);
  kernels::chol_sample_rows(A, 5150, Y);
  const Eigen::MatrixXd target = A * A.transpose();
  const Eigen::MatrixXd emp = Y.transpose() * Y / big;
  CHECK((emp - target).cwiseAbs().maxCoeff() <
        0.1 * target.diagonal().maxCoeff());
}

TEST_CASE("mean and mle covariance match a two-pass reference") {
  const Eigen::MatrixXd X = random_dense(40, 7, 2024);
  const Eigen::VectorXd mu = kernels::row_mean(X);
  CHECK((mu - X.colwise().mean().transpose()).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd C(7, 7);
  kernels::covariance_mle(X, mu, C);
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(7, 7);
  for (int m = 0; m < X.rows(); ++m) {
    const Eigen::VectorXd d = X.row(m).transpose() - mu;
    ref += d * d.transpose();
  }
  ref /= X.rows();
  CHECK((C - ref).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((C - C.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("taper kernel multiplies by the ramp profile") {
  const int n = 9;
  const Eigen::MatrixXd C = random_dense(n, n, 33);
  Eigen::MatrixXd T(n, n);
  kernels::taper_apply(C, 4, T);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(T(i, j) == taper_weight(i, j, 4) * C(i, j));

  // invalid widths are rejected before any parallel work starts
  CHECK_THROWS_AS(kernels::taper_apply(C, 3, T), ConfigError);
  CHECK_THROWS_AS(kernels::taper_apply(C, -2, T), ConfigError);
  CHECK_THROWS_AS(kernels::taper_apply_serial(C, 5, T), ConfigError);
}

#pragma once

#include <Eigen/Dense>
#include <cstdint>

// Data-parallel hot loops, each with a serial twin used as the reference in
// equivalence tests and in the kernel benchmark. Parallel variants split only
// across independent outputs and keep every per-output reduction in a fixed
// order, so results are bit-identical to the serial twins at any thread count.

namespace covrec::kernels {

// X: M x n. Row m = sum_l z(seed, m, l) * B.col(l) with z from the counter
// stream (one normal per (seed, row, mode)).
void kl_sample_rows(const Eigen::MatrixXd& B, std::uint64_t seed, Eigen::MatrixXd& X);
void kl_sample_rows_serial(const Eigen::MatrixXd& B, std::uint64_t seed, Eigen::MatrixXd& X);

// X: M x n rows of N(0, A A^T) vectors: row m = A z_m, z_m keyed (seed, m, j).
void chol_sample_rows(const Eigen::MatrixXd& A, std::uint64_t seed, Eigen::MatrixXd& X);
void chol_sample_rows_serial(const Eigen::MatrixXd& A, std::uint64_t seed, Eigen::MatrixXd& X);

Eigen::VectorXd row_mean(const Eigen::MatrixXd& X);

// C = (1/M) sum_m (x_m - mu)(x_m - mu)^T  (maximum-likelihood divisor M)
void covariance_mle(const Eigen::MatrixXd& X, const Eigen::VectorXd& mu, Eigen::MatrixXd& C);
void covariance_mle_serial(const Eigen::MatrixXd& X, const Eigen::VectorXd& mu,
                           Eigen::MatrixXd& C);

// entrywise taper: out_{kk'} = w_tau(|k - k'|) C_{kk'}
void taper_apply(const Eigen::MatrixXd& C, int tau, Eigen::MatrixXd& out);
void taper_apply_serial(const Eigen::MatrixXd& C, int tau, Eigen::MatrixXd& out);

}  // namespace covrec::kernels

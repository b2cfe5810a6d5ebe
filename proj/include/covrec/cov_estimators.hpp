#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "covrec/field_models.hpp"

namespace covrec {

struct CovarianceEstimate {
  enum class Kind { Sample, Tapered };
  Eigen::MatrixXd matrix;
  Kind kind = Kind::Sample;
  int tau = 0;  // tapered only
  int M = 0;
  double alpha = std::numeric_limits<double>::quiet_NaN();  // assumed decay, never estimated
};

Eigen::VectorXd sample_mean(const Eigen::MatrixXd& rows);
inline Eigen::VectorXd sample_mean(const SampleMatrix& s) { return sample_mean(s.rows); }

// maximum-likelihood covariance of the rows: divisor M, deviations from the
// sample mean
CovarianceEstimate sample_covariance(const Eigen::MatrixXd& rows);
inline CovarianceEstimate sample_covariance(const SampleMatrix& s) {
  return sample_covariance(s.rows);
}

// taper weight at lag |k - k'| for even tau: 1 inside tau/2, linear ramp to
// zero at tau
double taper_weight(int k, int kp, int tau);

CovarianceEstimate taper_estimate(const CovarianceEstimate& cov, int tau,
                                  double alpha = std::numeric_limits<double>::quiet_NaN());

// tau = M^{1/(2 alpha + 1)} rounded to the nearest even integer (ties up),
// clamped to [2, 2 n_h] when n_h > 0 is supplied
int optimal_taper(long long M, double alpha, int n_h = 0);

struct DecayClassReport {
  double alpha = 0.0;
  std::vector<double> tail;  // tail[c-1] = max_k sum_{|k'-k| > c} |S_{kk'}|, c = 1..n_h
  double C1 = 0.0;           // smallest constant with tail(c) <= C1 c^{-alpha} for all c
  double C2 = 0.0;           // largest eigenvalue
  bool member = false;       // C1 finite and below the supplied threshold
  double c1_threshold = std::numeric_limits<double>::infinity();
};

DecayClassReport decay_class_check(const Eigen::MatrixXd& S, double alpha,
                                   double c1_threshold = std::numeric_limits<double>::infinity());

// largest |eigenvalue| of a symmetric matrix; dense eigensolve at desk scale,
// power iteration (tol 1e-10, 1e4 iterations) beyond n = 2000
double operator_norm(const Eigen::MatrixXd& sym);

// sampling-rate functions: n_h >= M^{1/(2a+1)} gives M^{-2a/(2a+1)} plus the
// log term, otherwise the pre-asymptotic n_h / M branch
double rho(double M, double n_h, double alpha);
double rho_tilde(double M, double h, int d, double alpha);

}  // namespace covrec

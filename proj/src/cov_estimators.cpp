#include "covrec/cov_estimators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "covrec/errors.hpp"
#include "covrec/kernels.hpp"
#include "covrec/rng.hpp"

namespace covrec {

Eigen::VectorXd sample_mean(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 1) throw ConfigError("sample_mean: need at least one sample");
  return kernels::row_mean(rows);
}

CovarianceEstimate sample_covariance(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) throw ConfigError("sample_covariance: need at least two samples");
  CovarianceEstimate est;
  est.kind = CovarianceEstimate::Kind::Sample;
  est.M = static_cast<int>(rows.rows());
  const Eigen::VectorXd mu = kernels::row_mean(rows);
  kernels::covariance_mle(rows, mu, est.matrix);
  return est;
}

double taper_weight(int k, int kp, int tau) {
  if (tau < 1 || tau % 2 != 0)
    throw ConfigError("taper_weight: tau must be a positive even integer, got " +
                      std::to_string(tau));
  const double lag = std::abs(k - kp);
  if (lag <= tau / 2.0) return 1.0;
  if (lag >= tau) return 0.0;
  return 2.0 * (1.0 - lag / tau);
}

CovarianceEstimate taper_estimate(const CovarianceEstimate& cov, int tau, double alpha) {
  CovarianceEstimate est;
  est.kind = CovarianceEstimate::Kind::Tapered;
  est.tau = tau;
  est.M = cov.M;
  est.alpha = alpha;
  kernels::taper_apply(cov.matrix, tau, est.matrix);
  return est;
}

int optimal_taper(long long M, double alpha, int n_h) {
  if (M < 1 || alpha <= 0.0) throw ConfigError("optimal_taper: need M >= 1 and alpha > 0");
  const double raw = std::pow(static_cast<double>(M), 1.0 / (2.0 * alpha + 1.0));
  long long lo = 2 * static_cast<long long>(std::floor(raw / 2.0));
  long long hi = lo + 2;
  long long tau = (raw - lo < hi - raw) ? lo : hi;  // ties round up
  tau = std::max<long long>(tau, 2);
  if (n_h > 0) tau = std::min<long long>(tau, 2LL * n_h);
  return static_cast<int>(tau);
}

DecayClassReport decay_class_check(const Eigen::MatrixXd& S, double alpha,
                                   double c1_threshold) {
  const int n = static_cast<int>(S.rows());
  DecayClassReport rep;
  rep.alpha = alpha;
  rep.c1_threshold = c1_threshold;
  rep.tail.resize(n);
  // row tails: for each cutoff c, the worst absolute row sum beyond lag c
  for (int c = 1; c <= n; ++c) {
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int kp = 0; kp < n; ++kp)
        if (std::abs(kp - k) > c) s += std::abs(S(k, kp));
      worst = std::max(worst, s);
    }
    rep.tail[c - 1] = worst;
  }
  double c1 = 0.0;
  for (int c = 1; c <= n; ++c) c1 = std::max(c1, rep.tail[c - 1] * std::pow(c, alpha));
  rep.C1 = c1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  rep.C2 = es.eigenvalues().maxCoeff();
  rep.member = std::isfinite(rep.C1) && rep.C1 <= c1_threshold;
  return rep;
}

double operator_norm(const Eigen::MatrixXd& sym) {
  const int n = static_cast<int>(sym.rows());
  if (n == 0) return 0.0;
  if (n <= 2000) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  // power iteration on the symmetric matrix; |Rayleigh quotient| converges to
  // the spectral radius
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng::normal(0x9e3779b9, 0, i + 1);
  v.normalize();
  double prev = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd w = sym * v;
    const double r = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (std::abs(std::abs(r) - std::abs(prev)) <= 1e-10 * std::max(1.0, std::abs(r)) && it > 2)
      return std::abs(r);
    prev = r;
  }
  return std::abs(prev);
}

double rho(double M, double n_h, double alpha) {
  if (M <= 0.0 || n_h <= 0.0 || alpha <= 0.0)
    throw ConfigError("rho: all arguments must be positive");
  if (n_h >= std::pow(M, 1.0 / (2.0 * alpha + 1.0)))
    return std::pow(M, -2.0 * alpha / (2.0 * alpha + 1.0)) + std::log(n_h) / M;
  return n_h / M;
}

double rho_tilde(double M, double h, int d, double alpha) {
  if (M <= 0.0 || h <= 0.0 || d < 1 || alpha <= 0.0)
    throw ConfigError("rho_tilde: all arguments must be positive");
  const double n_h = std::pow(h, -static_cast<double>(d));
  if (n_h >= std::pow(M, 1.0 / (2.0 * alpha + 1.0)))
    return std::pow(M, -2.0 * alpha / (2.0 * alpha + 1.0)) + d * std::log(1.0 / h) / M;
  return n_h / M;
}

}  // namespace covrec

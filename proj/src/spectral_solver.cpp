#include "covrec/spectral_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "covrec/cov_estimators.hpp"
#include "covrec/errors.hpp"

namespace covrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_square_symmetric(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols())
    throw InvariantError("generalized_eigendecomposition: covariance must be square, got " +
                         std::to_string(sigma.rows()) + "x" + std::to_string(sigma.cols()));
  const double scale = sigma.size() ? sigma.cwiseAbs().maxCoeff() : 0.0;
  const double asym =
      sigma.size() ? (sigma - sigma.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-10 * scale)
    throw InvariantError("generalized_eigendecomposition: input asymmetry " +
                         std::to_string(asym) + " exceeds 1e-10 * max|Sigma|");
}

// a and b count as one numerical cluster when their distance is below the
// relative width threshold.
bool clustered(double a, double b) {
  return std::abs(a - b) <=
         kDegenerateClusterWidth * std::max(std::abs(a), std::abs(b));
}

EigenSystem decompose(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& L,
                      const FemSpace* space, bool exact, bool clip_negative) {
  check_square_symmetric(sigma);
  if (L.rows() != sigma.rows() || L.cols() != sigma.cols())
    throw InvariantError(
        "generalized_eigendecomposition: mass factor size does not match covariance");

  // Atilde = L^T Sigma L is symmetric up to rounding; the solver only reads
  // the lower triangle, so no explicit symmetrization is needed.
  const Eigen::MatrixXd atilde = L.transpose() * sigma * L;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(atilde);
  if (es.info() != Eigen::Success)
    throw NumericError("generalized_eigendecomposition: eigensolver did not converge");

  EigenSystem sys;
  sys.exact = exact;
  sys.space = space;
  sys.values = es.eigenvalues().reverse();  // ascending -> non-increasing
  if (clip_negative) sys.values = sys.values.cwiseMax(0.0);
  // Phi = L^{-T} Phitilde, columns stay in descending-eigenvalue order
  sys.vectors = L.transpose()
                    .triangularView<Eigen::Upper>()
                    .solve(es.eigenvectors().rowwise().reverse().eval());
  return sys;
}

}  // namespace

EigenSystem generalized_eigendecomposition(const Eigen::MatrixXd& sigma,
                                           const FemSpace& space, bool exact,
                                           bool clip_negative) {
  if (sigma.rows() != space.dofs())
    throw InvariantError("generalized_eigendecomposition: covariance size " +
                         std::to_string(sigma.rows()) + " does not match " +
                         std::to_string(space.dofs()) + " dofs");
  return decompose(sigma, space.mass_chol(), &space, exact, clip_negative);
}

EigenSystem generalized_eigendecomposition(const Eigen::MatrixXd& sigma,
                                           const Eigen::MatrixXd& mass_cholL,
                                           bool exact, bool clip_negative) {
  return decompose(sigma, mass_cholL, nullptr, exact, clip_negative);
}

EigenSystem fix_signs(const EigenSystem& reference, EigenSystem target) {
  if (reference.vectors.rows() != target.vectors.rows() ||
      reference.vectors.cols() != target.vectors.cols())
    throw InvariantError("fix_signs: systems differ in size");
  for (int l = 0; l < target.vectors.cols(); ++l) {
    const double ip =
        reference.space
            ? reference.vectors.col(l).dot(reference.space->mass() *
                                           target.vectors.col(l))
            : reference.vectors.col(l).dot(target.vectors.col(l));
    if (ip < 0.0) target.vectors.col(l) *= -1.0;
  }
  return target;
}

double continuous_gap(const Eigen::VectorXd& values, int ell) {
  const int n = static_cast<int>(values.size());
  if (ell < 1 || ell > n - 1)
    throw ConfigError("continuous_gap: need 1 <= ell <= n-1, got ell=" +
                      std::to_string(ell) + " with n=" + std::to_string(n));
  if ((ell > 1 && clustered(values[ell - 2], values[ell - 1])) ||
      clustered(values[ell - 1], values[ell]))
    return 0.0;
  const double left = (ell == 1) ? kInf : values[ell - 2] - values[ell - 1];
  const double right = values[ell - 1] - values[ell];
  return std::min(left, right);
}

double discrete_gap(const Eigen::VectorXd& exact_values,
                    const Eigen::VectorXd& sampled_values, int ell) {
  const int n = static_cast<int>(exact_values.size());
  if (sampled_values.size() != n)
    throw InvariantError("discrete_gap: spectra differ in length");
  if (ell < 1 || ell > n)
    throw ConfigError("discrete_gap: need 1 <= ell <= n, got ell=" +
                      std::to_string(ell));
  if ((ell > 1 && clustered(sampled_values[ell - 2], exact_values[ell - 1])) ||
      (ell < n && clustered(exact_values[ell - 1], sampled_values[ell])))
    return 0.0;
  const double left =
      (ell == 1) ? kInf : std::abs(sampled_values[ell - 2] - exact_values[ell - 1]);
  const double right =
      (ell == n) ? kInf : std::abs(exact_values[ell - 1] - sampled_values[ell]);
  return std::min(left, right);
}

double discrete_gap(const EigenSystem& exact, const EigenSystem& sampled,
                    int ell) {
  return discrete_gap(exact.values, sampled.values, ell);
}

bool degenerate_pair(const Eigen::VectorXd& values, int ell) {
  const int n = static_cast<int>(values.size());
  if (ell < 1 || ell > n)
    throw ConfigError("degenerate_pair: need 1 <= ell <= n, got ell=" +
                      std::to_string(ell));
  return (ell > 1 && clustered(values[ell - 2], values[ell - 1])) ||
         (ell < n && clustered(values[ell - 1], values[ell]));
}

SamplingErrorNorm sampling_error_norm(const Eigen::MatrixXd& sigma,
                                      const Eigen::MatrixXd& sigma_hat,
                                      const FemSpace& space) {
  if (sigma.rows() != sigma_hat.rows() || sigma.cols() != sigma_hat.cols())
    throw InvariantError("sampling_error_norm: matrix sizes differ");
  const Eigen::MatrixXd diff = sigma - sigma_hat;
  const Eigen::MatrixXd& L = space.mass_chol();
  SamplingErrorNorm out;
  out.value = operator_norm(L.transpose() * diff * L);
  const double dn = operator_norm(diff);
  out.lo = space.mass_lambda_min() * dn;
  out.hi = space.mass_lambda_max() * dn;
  return out;
}

SamplingErrorNorm sampling_error_norm(const Eigen::MatrixXd& sigma,
                                      const Eigen::MatrixXd& sigma_hat) {
  if (sigma.rows() != sigma_hat.rows() || sigma.cols() != sigma_hat.cols())
    throw InvariantError("sampling_error_norm: matrix sizes differ");
  SamplingErrorNorm out;
  out.value = operator_norm(sigma - sigma_hat);
  out.lo = out.value;
  out.hi = out.value;
  return out;
}

WeylReport weyl_check(const EigenSystem& exact, const EigenSystem& sampled,
                      double E) {
  if (exact.size() != sampled.size())
    throw InvariantError("weyl_check: spectra differ in length");
  WeylReport rep;
  rep.residuals = (exact.values - sampled.values).cwiseAbs();
  rep.max_residual = rep.residuals.size() ? rep.residuals.maxCoeff() : 0.0;
  rep.bound = E * (1.0 + 1e-10);
  rep.pass = rep.max_residual <= rep.bound;
  return rep;
}

std::vector<DavisKahanRow> davis_kahan_diagnostic(
    const EigenSystem& exact, const EigenSystem& sampled, double E,
    const Eigen::VectorXd& continuous_gaps, int max_ell, double c_dk) {
  const int n = exact.size();
  if (sampled.size() != n)
    throw InvariantError("davis_kahan_diagnostic: systems differ in size");
  if (max_ell <= 0 || max_ell > n) max_ell = n;

  const EigenSystem aligned = fix_signs(exact, sampled);
  Eigen::MatrixXd diff = exact.vectors - aligned.vectors;
  if (exact.space)
    diff = (exact.space->mass_chol().transpose() * diff).eval();

  std::vector<DavisKahanRow> rows(max_ell);
  for (int ell = 1; ell <= max_ell; ++ell) {
    DavisKahanRow& r = rows[ell - 1];
    r.measured = diff.col(ell - 1).norm();
    r.gap = discrete_gap(exact.values, sampled.values, ell);
    r.degenerate = (r.gap <= 0.0) || degenerate_pair(exact.values, ell);
    r.bound = r.degenerate ? kInf : c_dk * E / r.gap;
    if (continuous_gaps.size() >= ell) {
      const double cg = continuous_gaps[ell - 1];
      r.relaxed_bound = (cg > 0.0) ? 4.0 * c_dk * E / cg : kInf;
    } else {
      r.relaxed_bound = std::numeric_limits<double>::quiet_NaN();
    }
    r.ok = r.degenerate || r.measured <= r.bound;
  }
  return rows;
}

}  // namespace covrec

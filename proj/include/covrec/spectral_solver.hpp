#pragma once

// Generalized eigenproblem A Phi = lambda M Phi for a coefficient covariance
// against the FEM mass matrix, reduced to a symmetric problem through the
// Cholesky factor of M:  Atilde = L^T Sigma L,  Phi = L^{-T} Phitilde.
// Also the spectral diagnostics built on top of it: spectral gaps, Weyl
// residuals, the sampling-error norm E_{(h;M)}, and Davis-Kahan eigenvector
// perturbation bounds.

#include <Eigen/Dense>
#include <vector>

#include "covrec/fem_space.hpp"

namespace covrec {

// Relative width below which neighbouring eigenvalues count as one cluster.
// Clustered pairs get gap 0 and vacuous Davis-Kahan bounds.
inline constexpr double kDegenerateClusterWidth = 1e-10;

// Explicit constant of the Yu-Wang-Samworth sin-theta corollary.
inline constexpr double kDavisKahanConstant = 2.8284271247461903;  // 2^{3/2}

struct EigenSystem {
  Eigen::VectorXd values;   // non-increasing
  Eigen::MatrixXd vectors;  // column l: nodal coefficients of the l-th
                            // eigenfunction, mass-orthonormal
  bool exact = true;        // built from the exact Sigma (vs a sampled estimate)
  const FemSpace* space = nullptr;

  int size() const { return static_cast<int>(values.size()); }
};

struct SamplingErrorNorm {
  double value = 0.0;  // ||L^T (Sigma - Sigmahat) L||_2
  double lo = 0.0;     // lambda_min(M) * ||Sigma - Sigmahat||_2
  double hi = 0.0;     // lambda_max(M) * ||Sigma - Sigmahat||_2
};

struct WeylReport {
  Eigen::VectorXd residuals;  // |lambda_l^{(h)} - lambda_l^{(h;M)}|
  double max_residual = 0.0;
  double bound = 0.0;  // E * (1 + 1e-10)
  bool pass = true;
};

struct DavisKahanRow {
  double measured = 0.0;  // ||Phitilde_l - Phitilde_l^{(M)}||_2, signs fixed
  double gap = 0.0;       // delta_l^{(h;M)}
  double bound = 0.0;       // C_DK * E / gap
  double relaxed_bound = 0.0;  // 4 * C_DK * E / delta_l (continuous gap)
  bool degenerate = false;  // clustered eigenvalue: bound vacuous
  bool ok = true;           // measured <= bound, or vacuously true
};

// Eigendecomposition of Atilde = L^T Sigma L, eigenvalues sorted
// non-increasing, eigenvectors mapped back to mass-orthonormal nodal
// coefficients. Rejects input with asymmetry above 1e-10 * max|Sigma|.
// clip_negative repairs indefiniteness (tapering can break PSD) by clamping
// eigenvalues at zero; default keeps them so callers can see the damage.
EigenSystem generalized_eigendecomposition(const Eigen::MatrixXd& sigma,
                                           const FemSpace& space,
                                           bool exact = true,
                                           bool clip_negative = false);

// Same reduction against an explicit lower-triangular Cholesky factor of the
// mass matrix (identity for an already orthonormal basis). No space attached.
EigenSystem generalized_eigendecomposition(const Eigen::MatrixXd& sigma,
                                           const Eigen::MatrixXd& mass_cholL,
                                           bool exact = true,
                                           bool clip_negative = false);

// Flip each target column so its M-inner product with the matching reference
// column is nonnegative. Idempotent.
EigenSystem fix_signs(const EigenSystem& reference, EigenSystem target);

// delta_l = min{lambda_{l-1} - lambda_l, lambda_l - lambda_{l+1}} with the
// convention lambda_0 = +inf. l is 1-based and needs lambda_{l+1}, so
// 1 <= l <= n-1. Gaps inside a degenerate cluster come back as exactly 0.
double continuous_gap(const Eigen::VectorXd& values, int ell);

// Mixed gap between the exact discrete spectrum and the sampled one:
// min{|lambda_{l-1}^{(h;M)} - lambda_l^{(h)}|, |lambda_l^{(h)} - lambda_{l+1}^{(h;M)}|}
// with lambda_0^{(h;M)} = +inf and lambda_{n+1}^{(h;M)} = -inf; 1 <= l <= n.
double discrete_gap(const Eigen::VectorXd& exact_values,
                    const Eigen::VectorXd& sampled_values, int ell);
double discrete_gap(const EigenSystem& exact, const EigenSystem& sampled,
                    int ell);

// True when lambda_l sits in a cluster of relative width
// kDegenerateClusterWidth with either neighbour (1-based l).
bool degenerate_pair(const Eigen::VectorXd& values, int ell);

// E_{(h;M)} = ||L^T (Sigma - Sigmahat) L||_2 plus the two-sided bracket
// lambda_min(M)*||Sigma - Sigmahat||_2 <= E <= lambda_max(M)*||...||_2.
SamplingErrorNorm sampling_error_norm(const Eigen::MatrixXd& sigma,
                                      const Eigen::MatrixXd& sigma_hat,
                                      const FemSpace& space);
// Identity mass: E collapses to ||Sigma - Sigmahat||_2 and the bracket is tight.
SamplingErrorNorm sampling_error_norm(const Eigen::MatrixXd& sigma,
                                      const Eigen::MatrixXd& sigma_hat);

// Weyl's inequality |lambda_l^{(h)} - lambda_l^{(h;M)}| <= E for all l,
// asserted with a 1e-10 relative slack for rounding. Failure is reported in
// the flag, never thrown.
WeylReport weyl_check(const EigenSystem& exact, const EigenSystem& sampled,
                      double E);

// Per-l eigenvector perturbation diagnostic. measured is the Euclidean norm
// of the difference in the orthonormal (tilde) frame, equal to the M-norm of
// the nodal coefficient difference; signs are fixed internally against the
// exact system. continuous_gaps, when provided (length >= the number of rows
// requested), also fills the relaxed bound 4*C_DK*E/delta_l; otherwise that
// field is NaN. Rows are produced for l = 1..max_ell (default: full system).
std::vector<DavisKahanRow> davis_kahan_diagnostic(
    const EigenSystem& exact, const EigenSystem& sampled, double E,
    const Eigen::VectorXd& continuous_gaps = Eigen::VectorXd(),
    int max_ell = 0, double c_dk = kDavisKahanConstant);

}  // namespace covrec

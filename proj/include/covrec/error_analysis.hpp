#pragma once

// Mercer-form kernels, L2(DxD) distances between them through Gram matrices,
// the E1/E2/E3 error decomposition of a reconstruction, the spectral
// functionals G(L) and H(L), the gap-condition checker, and the success
// probability p0.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "covrec/fem_space.hpp"
#include "covrec/field_models.hpp"
#include "covrec/spectral_solver.hpp"

namespace covrec {

// Rank-L kernel sum_l w_l f_l(x) f_l(y). The factors are either the leading
// analytic eigenfunctions of a SpectrumModel (optionally the full spectrum)
// or coefficient columns in a FemSpace. Default-constructed: the zero kernel.
struct MercerKernel {
  Eigen::VectorXd weights;  // non-increasing; empty for full or zero kernels
  const SpectrumModel* model = nullptr;
  bool full = false;  // analytic only: all modes, weights implied by the model
  const FemSpace* space = nullptr;  // may be null for identity-mass coefficients
  Eigen::MatrixXd coeffs;           // columns: factor coefficients

  int L() const { return static_cast<int>(weights.size()); }
  bool analytic() const { return model != nullptr; }
  bool fem() const { return coeffs.cols() > 0; }
  bool empty() const { return !full && !analytic() && !fem(); }
};

// First L eigenpairs of the model (1 <= L <= available modes).
MercerKernel mercer_truncate(const SpectrumModel& model, int L);
// First L eigenpairs of a decomposition; the factors are its coefficient
// columns (1 <= L <= n_h).
MercerKernel mercer_truncate(const EigenSystem& system, int L);
// The untruncated kernel of the model.
MercerKernel mercer_full(const SpectrumModel& model);

// ||R_a - R_b||_{L2(DxD)} via the Gram identity
//   ||sum a_i f_i x f_i - sum b_j g_j x g_j||^2
//     = sum a_i a_i' <f_i,f_i'>^2 + sum b_j b_j' <g_j,g_j'>^2
//       - 2 sum a_i b_j <f_i,g_j>^2.
// Inner products are exact (mass matrix) between FEM factors, orthonormality
// for same-model analytic factors, and per-element Gauss quadrature of order
// quad_pts for analytic-vs-FEM. A full analytic kernel pairs only with
// kernels of the same model (or the zero kernel); truncate it first otherwise.
double kernel_l2_distance(const MercerKernel& a, const MercerKernel& b,
                          int quad_pts = 10);

// E1(L) = (sum_{l>L} lambda_l^2)^{1/2}, from the model's analytic tail when
// it has one, else summed over the available modes.
double truncation_error_E1(const SpectrumModel& model, int L);

struct GFunctional {
  double g2 = 0.0;  // G^2(L) = sum_{l<=L} (lambda_l / delta_l)^2
  bool degenerate = false;  // some gap vanished; g2 is +inf
};
struct HFunctional {
  double value = 0.0;  // H(L) = (min_{l<=L} delta_l / 48)^2
  bool degenerate = false;  // some gap vanished; value is 0
};

// Both need lambda_{L+1}; the sequence callback is 1-based. For spectra with
// multiplicities (tensor products) pass the distinct-value sequence.
GFunctional g_functional(const std::function<double(int)>& lambda, int L);
GFunctional g_functional(const Eigen::VectorXd& lambda, int L);
HFunctional h_functional(const std::function<double(int)>& lambda, int L);
HFunctional h_functional(const Eigen::VectorXd& lambda, int L);

// Closed forms for the Brownian spectrum. G^2 is dimension-independent:
// (1/64) sum_{l<=L} (2l+1)^4 / l^2. H picks up (lambda_1^{1D})^{2(d-1)}.
double brownian_g2_closed(int L);
double brownian_h_closed(int L, int d);

// Flags delta_l >= 4*c1*h^{2s}/lambda_{l+1} + 4*E_hM for l = 1..L. gaps needs
// length >= L, lambda length >= L+1. c1 is a surrogate for the symbolic
// Galerkin constant; callers should report the value they used.
std::vector<bool> gap_condition_check(const Eigen::VectorXd& gaps,
                                      const Eigen::VectorXd& lambda, double h,
                                      double s, double c1, double E_hM, int L);

struct SuccessProbability {
  double p0 = 0.0;
  bool clamped = false;  // raw value was negative (bound vacuous)
};

// p0 = 1 - 2 n_h 5^tau exp(-M rho1 H_L / lambda_max_mass^2), evaluated in log
// space so huge tau cannot overflow, clamped to [0,1].
SuccessProbability success_probability(double M, int n_h, int tau, double rho1,
                                       double H_L, double lambda_max_mass);

struct ErrorReport {
  // L2(DxD) error split: analytic truncation tail, projection error of the
  // truncated kernel, sampling error of the truncated reconstruction, and the
  // distance between the generator-truncated kernel and the reconstruction.
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double total = 0.0;
  // analytic tail beyond the generator truncation L_ref; bounds the gap
  // between `total` and the distance to the untruncated kernel
  double gen_residual = 0.0;
  double E_hM = std::numeric_limits<double>::quiet_NaN();
  double g2 = std::numeric_limits<double>::quiet_NaN();
  double H = std::numeric_limits<double>::quiet_NaN();
  bool g_degenerate = false;
  bool h_degenerate = false;
  double p0 = std::numeric_limits<double>::quiet_NaN();
  bool p0_clamped = false;
  std::vector<bool> gap_ok;  // filled by gap_condition_check when requested

  // parameter record
  int L = 0;
  int L_ref = 0;
  double h = 0.0;
  long long M = 0;
  int tau = 0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
};

// E1 from the analytic tail at L; E2 = distance(analytic truncation, exact
// FEM truncation); E3 = distance(exact FEM truncation, sampled truncation);
// total = distance(analytic truncation at L_ref, sampled truncation), so the
// triangle inequality total <= E1 + E2 + E3 holds exactly. L_ref = 0 picks
// default_generator_truncation(L) clamped to the model's available modes;
// it should match the truncation the samples were generated with. Caller
// metadata (M, tau, alpha, seed, E_hM surrogate fields) is left untouched
// except for the E_hM argument, which is stored as given.
ErrorReport error_decomposition(
    const SpectrumModel& model, const EigenSystem& exact_fem,
    const EigenSystem& sampled, int L, int L_ref = 0,
    double E_hM = std::numeric_limits<double>::quiet_NaN());

}  // namespace covrec

#pragma once

// Epsilon-driven sufficient parameter choices: the truncation level L_eps,
// the sample-count lower bound M_eps, and the admissible mesh interval
// [h_lo, h_hi] in each of the three estimation regimes, plus the Lambert-W
// shortcut for the Brownian-motion specialization.
//
// All asymptotic ">~" relations are realized as ">= with constant 1"; the
// constant is exposed as the c_slack knob so its effect can be explored.

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace covrec {

// integer searches refuse to go past this; larger requirements are reported
// as doubles with the capped flag set
inline constexpr double kPlannerSearchCap = 4611686018427387904.0;  // 2^62

enum class Regime {
  Case1 = 1,  // n_h < M^{1/(2a+1)}: taper wider than the mesh resolves
  Case2 = 2,  // n_h >= M^{1/(2a+1)}, log term dominates the estimation rate
  Case3 = 3,  // n_h >= M^{1/(2a+1)}, polynomial rate dominates
};

struct PlanInputs {
  double eps = 0.1;  // target accuracy, in (0,1)
  double s = 0.5;    // spatial smoothness
  int d = 1;
  double alpha = 1.0;   // decay class of the covariance
  double gamma = 1.5;   // max{1/2, gamma~} from the G(L) growth
  double beta = 1.0;    // slack exponent absorbing the log factor (case 2)
  double rho1 = 1.0;    // concentration constant surrogate
  double h0 = 1.0;      // mesh threshold of the Galerkin estimate
  double lambda_max_mass = 1.0;
  double c_slack = 1.0;  // multiplies the final M requirement

  std::function<double(int)> lambda;  // 1-based, strictly decreasing
  std::function<double(int)> H;       // spectral functional H(L)
};

struct Plan {
  Regime regime = Regime::Case2;
  int L = 1;
  double M = 1.0;  // integer-valued whenever representable
  double h_lo = 0.0;
  double h_hi = 0.0;
  bool vacuous = false;  // no admissible mesh size even after raising M
  bool capped = false;   // a requirement exceeded the integer-search cap
  bool h_ceiling_flagged = false;  // sub-unit ceiling read as a scale bound
  bool regime_consistent = true;   // branch condition holds for some
                                   // admissible h at the returned M
  bool self_check = true;  // defining inequalities verified at (L, M)
  std::vector<std::pair<std::string, double>> terms;  // named intermediates
};

// L_eps = ceil(eps^{-2d/(4s+d)}), with near-integer powers snapped before the
// ceiling so representation noise cannot inflate the level.
int truncation_level(double eps, double s, int d);

// Principal branch W_0: w e^w = x for x >= -1/e, residual
// |w e^w - x| <= 1e-12 max(1,|x|) via Halley iteration (<= 50 steps).
double lambert_w(double x);
// Lower branch W_{-1} on [-1/e, 0): the other real root, the one that grows
// as x -> 0^-. This is the branch the sample-count fixed point needs.
double lambert_w_m1(double x);

struct Thresholds {
  double bar = 1.0;    // case-1 sampling fixed point
  double tilde = 1.0;  // case-2 fixed point (same inequality as bar)
  double hat = 1.0;    // case-3 branch-feasibility fixed point
  double prime = 1.0;  // case-3 interval-ordering fixed point
  bool capped = false;
};

// Least integer M satisfying each defining inequality, by doubling search
// plus bisection; every result is verified at M and refuted at M-1.
Thresholds fixed_point_thresholds(const PlanInputs& in);

// The sufficient choices of the requested regime: L_eps, the max-of-terms
// M_eps (self-verified and raised to the least M making every defining
// inequality and the h interval hold simultaneously, when the search cap
// permits), and the admissible mesh interval at that M. All intermediate
// terms are reported in Plan::terms.
Plan plan_parameters(const PlanInputs& in, Regime regime);

// Brownian-motion specialization (s = 1/2, d = 1, gamma = 3/2): the
// case-2 plan with the sampling fixed point solved through W_{-1} and the
// mesh bound eps^{10/3} (the sub-unit ceiling is read as a scale and
// flagged via h_ceiling_flagged).
Plan brownian_plan(double eps, double beta = 1.0, double rho1 = 1.0,
                   double h0 = 1.0, double c_slack = 1.0);

}  // namespace covrec

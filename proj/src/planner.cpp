#include "covrec/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "covrec/error_analysis.hpp"
#include "covrec/errors.hpp"

namespace covrec {

namespace {

constexpr double kBranchPoint = -0.36787944117144233;  // -1/e
constexpr double kExactInt = 9007199254740992.0;       // 2^53

// snap near-integer values before the ceiling so representation noise in an
// analytically integer power cannot inflate the requirement by one
double ceil_snap(double x) {
  if (!(x > 1.0)) return 1.0;
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return r;
  return std::ceil(x);
}

double halley_lambert(double x, double w) {
  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    // relative stopper: an absolute one would quit early for tiny |x|,
    // leaving W (and the sample-size roots derived from it) hundreds of
    // integers off
    if (std::abs(f) <= 1e-14 * std::max(std::abs(x), 1e-300)) break;
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * (w + 1.0));
    if (denom == 0.0 || !std::isfinite(denom)) break;
    w -= f / denom;
  }
  return w;
}

double checked_branch_domain(double x, const char* who) {
  if (x < kBranchPoint) {
    if (x > kBranchPoint * (1.0 + 1e-14))
      return kBranchPoint;  // representation noise at the branch point
    throw ConfigError(std::string(who) + ": x below -1/e has no real solution");
  }
  return x;
}

// Least integer-valued double >= lo satisfying pred, by doubling search plus
// bisection; verified at the result and refuted one below it. Sets capped
// and returns the cap when the doubling phase runs off the search range.
double least_m(const std::function<bool(double)>& pred, double lo,
               bool& capped) {
  if (lo < 1.0) lo = 1.0;
  if (lo > kPlannerSearchCap) {
    capped = true;
    return lo;
  }
  if (pred(lo)) return lo;
  double f = lo;
  double t = lo;
  for (;;) {
    if (t >= kPlannerSearchCap) {
      capped = true;
      return kPlannerSearchCap;
    }
    f = t;
    t = std::min(t * 2.0, kPlannerSearchCap);
    if (pred(t)) break;
  }
  while (t - f > 1.0) {
    const double mid = std::floor(f + (t - f) / 2.0);
    if (mid <= f || mid >= t) break;  // past double integer resolution
    (pred(mid) ? t : f) = mid;
  }
  if (t <= kExactInt && (!pred(t) || (t - 1.0 >= lo && pred(t - 1.0))))
    throw NumericError("planner: fixed-point search lost its bracket");
  return t;
}

struct Ctx {
  double eps, s, alpha, gamma, beta, rho1, h0, c_slack;
  int d, L;
  double H_L, lam_L, lam_L1;
  double a1;         // 2 alpha + 1
  double rhoH;       // rho1 H(L) / lambda_max^2
  double lgap;       // ln(sqrt(L)/eps)
  double chain_cap;  // min{H^{1/(4s)} lam_{L+1}^{1/(2s)}, lam_L^{1/s}}
};

Ctx make_ctx(const PlanInputs& in) {
  if (!(in.eps > 0.0 && in.eps < 1.0))
    throw ConfigError("plan: eps must be in (0,1)");
  if (!(in.s > 0.0)) throw ConfigError("plan: smoothness s must be positive");
  if (in.d < 1) throw ConfigError("plan: dimension must be >= 1");
  if (!(in.alpha > 0.0)) throw ConfigError("plan: alpha must be positive");
  if (!(in.gamma >= 0.5)) throw ConfigError("plan: gamma must be >= 1/2");
  if (!(in.beta > 0.0)) throw ConfigError("plan: beta must be positive");
  if (!(in.rho1 > 0.0) || !(in.h0 > 0.0) || !(in.lambda_max_mass > 0.0) ||
      !(in.c_slack > 0.0))
    throw ConfigError("plan: rho1, h0, lambda_max_mass, c_slack must be positive");
  if (!in.lambda)
    throw ConfigError("plan: eigenvalue functional `lambda` is not set");
  if (!in.H) throw ConfigError("plan: spectral functional `H` is not set");

  Ctx c;
  c.eps = in.eps;
  c.s = in.s;
  c.alpha = in.alpha;
  c.gamma = in.gamma;
  c.beta = in.beta;
  c.rho1 = in.rho1;
  c.h0 = in.h0;
  c.c_slack = in.c_slack;
  c.d = in.d;
  c.L = truncation_level(in.eps, in.s, in.d);
  c.H_L = in.H(c.L);
  c.lam_L = in.lambda(c.L);
  c.lam_L1 = in.lambda(c.L + 1);
  if (!(c.H_L > 0.0))
    throw ConfigError("plan: H(L) must be positive at L=" + std::to_string(c.L));
  if (!(c.lam_L > c.lam_L1) || !(c.lam_L1 > 0.0))
    throw ConfigError("plan: eigenvalues must be strictly decreasing and "
                      "positive at L, L+1");
  c.a1 = 2.0 * in.alpha + 1.0;
  c.rhoH = in.rho1 * c.H_L / (in.lambda_max_mass * in.lambda_max_mass);
  c.lgap = 0.5 * std::log(static_cast<double>(c.L)) - std::log(in.eps);
  c.chain_cap = std::min(std::pow(c.H_L, 1.0 / (4.0 * c.s)) *
                             std::pow(c.lam_L1, 1.0 / (2.0 * c.s)),
                         std::pow(c.lam_L, 1.0 / c.s));
  return c;
}

// sqrt(L)/eps * exp(-M rhoH) <= M^{-1/(2a+1)}, in log space
bool sampling_fixed_point(const Ctx& c, double m) {
  return m * c.rhoH >= c.lgap + std::log(m) / c.a1;
}
// exp(-M^{1/(2a+1)}/d) <= M^{-1/(d(2a+1))}
bool branch_fixed_point(const Ctx& c, double m) {
  return std::pow(m, 1.0 / c.a1) >= std::log(m) / c.a1;
}
// (sqrt(L)/eps exp(-M rhoH))^{1/d} <= exp(-M^{1/(2a+1)}/d)
bool ordering_fixed_point(const Ctx& c, double m) {
  return m * c.rhoH - std::pow(m, 1.0 / c.a1) >= c.lgap;
}

// (sqrt(L)/eps exp(-M rhoH))^{1/d}, clipped at the exp underflow edge
double h_lower_sampling(const Ctx& c, double m) {
  const double lg = (c.lgap - m * c.rhoH) / c.d;
  return lg < -745.0 ? 0.0 : std::exp(lg);
}
// exp(-M^{1/(2a+1)}/d): the mesh at which log- and rate-dominance swap
double h_branch_split(const Ctx& c, double m) {
  const double e = -std::pow(m, 1.0 / c.a1) / c.d;
  return e < -745.0 ? 0.0 : std::exp(e);
}
double h_rate_cap(const Ctx& c, double m) {
  return std::pow(m, -1.0 / (c.d * c.a1));
}
double h_upper_shared(const Ctx& c, double m) {
  return std::min(std::min(c.chain_cap, h_rate_cap(c, m)), c.h0);
}

}  // namespace

int truncation_level(double eps, double s, int d) {
  if (!(eps > 0.0 && eps < 1.0))
    throw ConfigError("truncation_level: eps must be in (0,1)");
  if (!(s > 0.0) || d < 1)
    throw ConfigError("truncation_level: need s > 0 and d >= 1");
  const double L = ceil_snap(std::pow(eps, -2.0 * d / (4.0 * s + d)));
  if (L > 2147483000.0)
    throw ConfigError("truncation_level: level overflows int at this accuracy");
  return static_cast<int>(L);
}

double lambert_w(double x) {
  x = checked_branch_domain(x, "lambert_w");
  if (x == 0.0) return 0.0;
  double w;
  if (x < -0.25) {
    const double p = std::sqrt(2.0 * (1.0 + 2.718281828459045 * x));
    w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0;
  } else if (x < 1.0) {
    w = x * (1.0 - x + 1.5 * x * x);
  } else {
    const double l = std::log(x);
    w = l - std::log(std::max(l, 1.0));
  }
  w = halley_lambert(x, w);
  if (std::abs(w * std::exp(w) - x) > 1e-12 * std::max(std::abs(x), 1e-300))
    throw NumericError("lambert_w: residual tolerance not reached");
  return w;
}

double lambert_w_m1(double x) {
  x = checked_branch_domain(x, "lambert_w_m1");
  if (!(x < 0.0))
    throw ConfigError("lambert_w_m1: the lower branch lives on [-1/e, 0)");
  double w;
  if (x > -0.27) {
    const double l1 = std::log(-x);  // < -1.3 here
    w = l1 - std::log(-l1);
  } else {
    const double p = std::sqrt(2.0 * (1.0 + 2.718281828459045 * x));
    w = -1.0 - p - p * p / 3.0;
  }
  w = halley_lambert(x, w);
  if (std::abs(w * std::exp(w) - x) > 1e-12 * std::max(std::abs(x), 1e-300))
    throw NumericError("lambert_w_m1: residual tolerance not reached");
  return w;
}

Thresholds fixed_point_thresholds(const PlanInputs& in) {
  const Ctx c = make_ctx(in);
  Thresholds t;
  bool capped = false;
  t.bar = least_m([&c](double m) { return sampling_fixed_point(c, m); }, 1.0,
                  capped);
  t.tilde = t.bar;  // same defining inequality, two names in two regimes
  t.hat = least_m([&c](double m) { return branch_fixed_point(c, m); }, 1.0,
                  capped);
  t.prime = least_m([&c](double m) { return ordering_fixed_point(c, m); }, 1.0,
                    capped);
  t.capped = capped;
  return t;
}

Plan plan_parameters(const PlanInputs& in, Regime regime) {
  const Ctx c = make_ctx(in);
  Plan plan;
  plan.regime = regime;
  plan.L = c.L;
  bool capped = false;

  const double t_rate = std::pow(c.eps, -c.a1 / c.alpha) *
                        std::pow(static_cast<double>(c.L), c.gamma * c.a1 / c.alpha);
  const double t_chain = std::pow(c.chain_cap, -static_cast<double>(c.d) * c.a1);
  const double log_expo =
      (2.0 * (2.0 * c.s + c.d) * c.beta + 2.0 * c.s * c.d * c.gamma) /
      (c.s * c.d);
  const double t_log =
      std::pow(static_cast<double>(c.L), log_expo) * std::pow(c.eps, -2.0);

  plan.terms.emplace_back("H_L", c.H_L);
  plan.terms.emplace_back("lambda_L", c.lam_L);
  plan.terms.emplace_back("lambda_L_plus_1", c.lam_L1);
  plan.terms.emplace_back("chain_cap", c.chain_cap);

  double m = 1.0;
  std::function<bool(double)> pred;
  switch (regime) {
    case Regime::Case1: {
      const double bar = least_m(
          [c](double v) { return sampling_fixed_point(c, v); }, 1.0, capped);
      plan.terms.emplace_back("bar_n", bar);
      plan.terms.emplace_back("rate_term", t_rate);
      plan.terms.emplace_back("chain_term", t_chain);
      m = std::max(bar, std::max(t_rate, t_chain));
      pred = [c, t_rate, t_chain](double v) {
        return sampling_fixed_point(c, v) && v >= t_rate && v >= t_chain;
      };
      break;
    }
    case Regime::Case2: {
      const double tilde = least_m(
          [c](double v) { return sampling_fixed_point(c, v); }, 1.0, capped);
      plan.terms.emplace_back("tilde_n", tilde);
      plan.terms.emplace_back("log_term", t_log);
      m = std::max(tilde, t_log);
      pred = [c, t_log](double v) {
        const double hi = h_upper_shared(c, v);
        return sampling_fixed_point(c, v) && v >= t_log &&
               hi > 0.0 && h_lower_sampling(c, v) <= hi;
      };
      break;
    }
    case Regime::Case3: {
      const double hat = least_m(
          [c](double v) { return branch_fixed_point(c, v); }, 1.0, capped);
      const double prime = least_m(
          [c](double v) { return ordering_fixed_point(c, v); }, 1.0, capped);
      plan.terms.emplace_back("hat_n", hat);
      plan.terms.emplace_back("prime_n", prime);
      plan.terms.emplace_back("rate_term", t_rate);
      plan.terms.emplace_back("chain_term", t_chain);
      m = std::max(std::max(hat, prime), std::max(t_rate, t_chain));
      pred = [c, t_rate, t_chain](double v) {
        const double hi = h_upper_shared(c, v);
        const double lo = std::max(h_lower_sampling(c, v), h_branch_split(c, v));
        return branch_fixed_point(c, v) && ordering_fixed_point(c, v) &&
               v >= t_rate && v >= t_chain && hi > 0.0 && lo <= hi;
      };
      break;
    }
  }

  m = ceil_snap(m * c.c_slack);
  if (m <= kPlannerSearchCap) {
    if (!pred(m)) {
      // raise M to the least value making every condition hold at once;
      // the exponential terms guarantee this closes for large M
      bool bump_capped = false;
      const double m2 = least_m(pred, m, bump_capped);
      if (bump_capped)
        capped = true;
      else
        m = m2;
    }
  } else {
    capped = true;
  }
  plan.M = m;
  plan.capped = capped;
  plan.self_check = pred(m);

  switch (regime) {
    case Regime::Case1:
      plan.h_lo = 0.0;
      plan.h_hi = std::min(h_rate_cap(c, m), c.h0);
      plan.vacuous = !(plan.h_hi > 0.0);
      // the branch wants n_h strictly below M^{1/(2a+1)}; that needs room
      // above the rate cap, which only h0 <= cap provides
      plan.regime_consistent = h_rate_cap(c, m) <= c.h0;
      break;
    case Regime::Case2:
      plan.h_lo = h_lower_sampling(c, m);
      plan.h_hi = h_upper_shared(c, m);
      plan.vacuous = !(plan.h_hi > 0.0) || plan.h_lo > plan.h_hi;
      // log-dominance needs some admissible h at or below the split point
      plan.regime_consistent =
          !plan.vacuous && plan.h_lo <= h_branch_split(c, m);
      break;
    case Regime::Case3:
      plan.h_lo = std::max(h_lower_sampling(c, m), h_branch_split(c, m));
      plan.h_hi = h_upper_shared(c, m);
      plan.vacuous = !(plan.h_hi > 0.0) || plan.h_lo > plan.h_hi;
      // every admissible h sits above the split point by construction
      plan.regime_consistent = !plan.vacuous;
      break;
  }
  return plan;
}

Plan brownian_plan(double eps, double beta, double rho1, double h0,
                   double c_slack) {
  if (!(eps > 0.0 && eps < 1.0))
    throw ConfigError("brownian_plan: eps must be in (0,1)");
  if (!(beta > 0.0) || !(rho1 > 0.0) || !(h0 > 0.0) || !(c_slack > 0.0))
    throw ConfigError("brownian_plan: beta, rho1, h0, c_slack must be positive");

  Plan plan;
  plan.regime = Regime::Case2;
  plan.h_ceiling_flagged = true;  // eps^{10/3} read as a scale, not a ceiling
  plan.L = truncation_level(eps, 0.5, 1);
  const double H_L = brownian_h_closed(plan.L, 1);
  const double rhoH = rho1 * H_L;
  const double lgap = 0.5 * std::log(static_cast<double>(plan.L)) - std::log(eps);

  // alpha = 0 specialization of the sampling fixed point:
  // M exp(-M rhoH) = eps / sqrt(L), solved on the lower Lambert branch (the
  // principal branch gives the small root below 1)
  const auto pred_tilde = [rhoH, lgap](double m) {
    return m * rhoH >= lgap + std::log(m);
  };
  const double arg = -rhoH * std::exp(-lgap);
  double tilde = 1.0;
  double root = std::numeric_limits<double>::quiet_NaN();
  if (arg < kBranchPoint) {
    tilde = 1.0;  // no real crossing: the inequality holds for every M
  } else {
    root = -lambert_w_m1(arg) / rhoH;
    tilde = std::max(1.0, ceil_snap(root));
    // align the analytic root with the integer arg-min semantics
    for (int i = 0; i < 64 && tilde > 1.0 && pred_tilde(tilde - 1.0); ++i)
      tilde -= 1.0;
    for (int i = 0; i < 64 && !pred_tilde(tilde); ++i) tilde += 1.0;
  }

  const double power = std::pow(static_cast<double>(plan.L), 8.0 * beta + 3.0) /
                       (eps * eps);
  double m = ceil_snap(c_slack * std::max(tilde, power));

  const double h_scale = std::pow(eps, 10.0 / 3.0);
  const auto h_hi_at = [h_scale, h0](double v) {
    return std::min(std::min(h_scale, 1.0 / v), h0);
  };
  const auto h_lo_at = [lgap, rhoH](double v) {
    const double lg = lgap - v * rhoH;
    return lg < -745.0 ? 0.0 : std::exp(lg);
  };
  const auto pred = [&](double v) {
    return pred_tilde(v) && v >= power && h_lo_at(v) <= h_hi_at(v);
  };

  bool capped = false;
  if (m <= kPlannerSearchCap) {
    if (!pred(m)) {
      bool bump_capped = false;
      const double m2 = least_m(pred, m, bump_capped);
      if (bump_capped)
        capped = true;
      else
        m = m2;
    }
  } else {
    capped = true;
  }

  plan.M = m;
  plan.capped = capped;
  plan.self_check = pred(m);
  plan.h_lo = h_lo_at(m);
  plan.h_hi = h_hi_at(m);
  plan.vacuous = !(plan.h_hi > 0.0) || plan.h_lo > plan.h_hi;
  // log-dominance split at alpha = 0 is exp(-M), zero at any realistic M;
  // consistency then means the lower mesh bound has underflowed as well
  const double split = m > 745.0 ? 0.0 : std::exp(-m);
  plan.regime_consistent = !plan.vacuous && plan.h_lo <= split;
  plan.terms.emplace_back("H_L", H_L);
  plan.terms.emplace_back("tilde_n_lambert_root", root);
  plan.terms.emplace_back("tilde_n", tilde);
  plan.terms.emplace_back("power_term", power);
  plan.terms.emplace_back("eps_pow_10_3", h_scale);
  return plan;
}

}  // namespace covrec

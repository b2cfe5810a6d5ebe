#include "covrec/error_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "covrec/errors.hpp"

namespace covrec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_model(const SpectrumModel& a, const SpectrumModel& b) {
  return a.name == b.name && a.dim == b.dim;
}

// sum_{ij} wa_i wb_j G_ij^2
double pair_sum(const Eigen::VectorXd& wa, const Eigen::VectorXd& wb,
                const Eigen::MatrixXd& gram) {
  double s = 0.0;
  for (int i = 0; i < wa.size(); ++i)
    for (int j = 0; j < wb.size(); ++j)
      s += wa[i] * wb[j] * gram(i, j) * gram(i, j);
  return s;
}

Eigen::MatrixXd fem_gram(const MercerKernel& a, const MercerKernel& b) {
  if (a.coeffs.rows() != b.coeffs.rows())
    throw InvariantError("kernel_l2_distance: FEM factor lengths differ");
  if (a.space && b.space) {
    if (a.space->dim() != b.space->dim() || a.space->elems() != b.space->elems() ||
        a.space->basis() != b.space->basis())
      throw InvariantError("kernel_l2_distance: FEM factors live in different spaces");
  } else if (a.space != b.space) {
    throw InvariantError(
        "kernel_l2_distance: cannot mix identity-mass and FEM-space factors");
  }
  const FemSpace* sp = a.space ? a.space : b.space;
  if (sp) return a.coeffs.transpose() * sp->mass() * b.coeffs;
  return a.coeffs.transpose() * b.coeffs;
}

// sum_{l,j} a_l b_j <phi_l, g_j>^2 with the analytic factors integrated
// against the space by quadrature
double cross_analytic_fem(const MercerKernel& an, const MercerKernel& fe,
                          int quad_pts) {
  if (an.full)
    throw ConfigError(
        "kernel_l2_distance: truncate the full analytic kernel before "
        "comparing it with FEM factors");
  if (!fe.space)
    throw ConfigError(
        "kernel_l2_distance: FEM factors need a space for quadrature against "
        "analytic factors");
  const SpectrumModel& m = *an.model;
  if (m.dim != fe.space->dim())
    throw InvariantError("kernel_l2_distance: dimension mismatch between model and space");
  Eigen::MatrixXd w(fe.space->dofs(), an.L());
  for (int l = 1; l <= an.L(); ++l)
    w.col(l - 1) = fe.space->load_vector(
        [&m, l](double x, double y) { return m.eigenfunction(l, x, y); },
        quad_pts);
  return pair_sum(an.weights, fe.weights, w.transpose() * fe.coeffs);
}

double self_sq(const MercerKernel& k) {
  if (k.empty()) return 0.0;
  if (k.analytic()) {
    if (k.full) {
      const double t = truncation_error_E1(*k.model, 0);
      return t * t;
    }
    return k.weights.squaredNorm();
  }
  return pair_sum(k.weights, k.weights, fem_gram(k, k));
}

double cross_sq(const MercerKernel& a, const MercerKernel& b, int quad_pts) {
  if (a.empty() || b.empty()) return 0.0;
  if (a.analytic() && b.analytic()) {
    if (!same_model(*a.model, *b.model))
      throw ConfigError(
          "kernel_l2_distance: analytic factors from different spectra are "
          "not supported");
    if (a.full && b.full) {
      const double t = truncation_error_E1(*a.model, 0);
      return t * t;
    }
    if (a.full || b.full) {
      const MercerKernel& trunc = a.full ? b : a;
      double s = 0.0;
      for (int l = 1; l <= trunc.L(); ++l)
        s += trunc.model->eigenvalue(l) * trunc.weights[l - 1];
      return s;
    }
    const int m = std::min(a.L(), b.L());
    return a.weights.head(m).dot(b.weights.head(m));
  }
  if (a.analytic()) return cross_analytic_fem(a, b, quad_pts);
  if (b.analytic()) return cross_analytic_fem(b, a, quad_pts);
  return pair_sum(a.weights, b.weights, fem_gram(a, b));
}

}  // namespace

MercerKernel mercer_truncate(const SpectrumModel& model, int L) {
  if (L < 1 || L > model.available)
    throw ConfigError("mercer_truncate: L=" + std::to_string(L) +
                      " outside the model's 1.." + std::to_string(model.available));
  MercerKernel k;
  k.model = &model;
  k.weights.resize(L);
  for (int l = 1; l <= L; ++l) k.weights[l - 1] = model.eigenvalue(l);
  return k;
}

MercerKernel mercer_truncate(const EigenSystem& system, int L) {
  if (L < 1 || L > system.size())
    throw ConfigError("mercer_truncate: L=" + std::to_string(L) +
                      " outside the system's 1.." + std::to_string(system.size()));
  MercerKernel k;
  k.space = system.space;
  k.weights = system.values.head(L);
  k.coeffs = system.vectors.leftCols(L);
  return k;
}

MercerKernel mercer_full(const SpectrumModel& model) {
  MercerKernel k;
  k.model = &model;
  k.full = true;
  return k;
}

double kernel_l2_distance(const MercerKernel& a, const MercerKernel& b,
                          int quad_pts) {
  const double d2 = self_sq(a) + self_sq(b) - 2.0 * cross_sq(a, b, quad_pts);
  return std::sqrt(std::max(0.0, d2));
}

double truncation_error_E1(const SpectrumModel& model, int L) {
  if (L < 0) throw ConfigError("truncation_error_E1: L must be >= 0");
  if (model.tail_sq) return std::sqrt(std::max(0.0, model.tail_sq(L)));
  // no analytic tail: sum what the model can enumerate, smallest terms first
  double s = 0.0, c = 0.0;
  for (int l = model.available; l > L; --l) {
    const double lam = model.eigenvalue(l);
    const double y = lam * lam - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return std::sqrt(std::max(0.0, s));
}

GFunctional g_functional(const std::function<double(int)>& lambda, int L) {
  if (L < 0) throw ConfigError("g_functional: L must be >= 0");
  GFunctional out;
  double lam = L >= 1 ? lambda(1) : 0.0;
  double prev = kInf;
  for (int l = 1; l <= L; ++l) {
    const double next = lambda(l + 1);
    const double gap = std::min(prev - lam, lam - next);
    if (!(gap > 0.0)) {
      out.degenerate = true;
      out.g2 = kInf;
      return out;
    }
    const double r = lam / gap;
    out.g2 += r * r;
    prev = lam;
    lam = next;
  }
  return out;
}

GFunctional g_functional(const Eigen::VectorXd& lambda, int L) {
  if (lambda.size() < L + 1)
    throw ConfigError("g_functional: need lambda up to L+1");
  return g_functional([&lambda](int l) { return lambda[l - 1]; }, L);
}

HFunctional h_functional(const std::function<double(int)>& lambda, int L) {
  if (L < 1) throw ConfigError("h_functional: L must be >= 1");
  HFunctional out;
  double min_gap = kInf;
  double lam = lambda(1);
  double prev = kInf;
  for (int l = 1; l <= L; ++l) {
    const double next = lambda(l + 1);
    min_gap = std::min(min_gap, std::min(prev - lam, lam - next));
    prev = lam;
    lam = next;
  }
  if (!(min_gap > 0.0)) {
    out.degenerate = true;
    out.value = 0.0;
    return out;
  }
  out.value = (min_gap / 48.0) * (min_gap / 48.0);
  return out;
}

HFunctional h_functional(const Eigen::VectorXd& lambda, int L) {
  if (lambda.size() < L + 1)
    throw ConfigError("h_functional: need lambda up to L+1");
  return h_functional([&lambda](int l) { return lambda[l - 1]; }, L);
}

double brownian_g2_closed(int L) {
  if (L < 0) throw ConfigError("brownian_g2_closed: L must be >= 0");
  double s = 0.0;
  for (int l = 1; l <= L; ++l) {
    const double q = 2.0 * l + 1.0;
    s += q * q * q * q / (static_cast<double>(l) * l);
  }
  return s / 64.0;
}

double brownian_h_closed(int L, int d) {
  if (L < 1) throw ConfigError("brownian_h_closed: L must be >= 1");
  if (d != 1 && d != 2) throw ConfigError("brownian_h_closed: d must be 1 or 2");
  // 1D gaps 32 l / (pi^2 (4l^2-1)^2) decrease in l, so the minimum over
  // l <= L is attained at L; tensor products scale every gap by lambda_1^{d-1}
  const double q = 4.0 * static_cast<double>(L) * L - 1.0;
  double gap = 32.0 * L / (kPi * kPi * q * q);
  if (d == 2) gap *= 4.0 / (kPi * kPi);
  return (gap / 48.0) * (gap / 48.0);
}

std::vector<bool> gap_condition_check(const Eigen::VectorXd& gaps,
                                      const Eigen::VectorXd& lambda, double h,
                                      double s, double c1, double E_hM,
                                      int L) {
  if (L < 0) throw ConfigError("gap_condition_check: L must be >= 0");
  if (gaps.size() < L || lambda.size() < L + 1)
    throw ConfigError("gap_condition_check: need gaps up to L and lambda up to L+1");
  std::vector<bool> ok(L);
  const double hs = std::pow(h, 2.0 * s);
  for (int l = 1; l <= L; ++l)
    ok[l - 1] = gaps[l - 1] >= 4.0 * c1 * hs / lambda[l] + 4.0 * E_hM;
  return ok;
}

SuccessProbability success_probability(double M, int n_h, int tau, double rho1,
                                       double H_L, double lambda_max_mass) {
  if (M < 0.0 || n_h < 1 || tau < 0 || rho1 <= 0.0 || H_L < 0.0 ||
      lambda_max_mass <= 0.0)
    throw ConfigError("success_probability: arguments out of domain");
  const double log_term = std::log(2.0 * n_h) + tau * std::log(5.0) -
                          M * rho1 * H_L / (lambda_max_mass * lambda_max_mass);
  SuccessProbability out;
  if (log_term > 0.0) {  // failure term exceeds 1: the bound is vacuous
    out.p0 = 0.0;
    out.clamped = true;
    return out;
  }
  out.p0 = 1.0 - std::exp(log_term);
  return out;
}

ErrorReport error_decomposition(const SpectrumModel& model,
                                const EigenSystem& exact_fem,
                                const EigenSystem& sampled, int L, int L_ref,
                                double E_hM) {
  if (!exact_fem.space || !sampled.space)
    throw InvariantError("error_decomposition: both systems need a space");
  if (exact_fem.space != sampled.space &&
      (exact_fem.space->dim() != sampled.space->dim() ||
       exact_fem.space->elems() != sampled.space->elems() ||
       exact_fem.space->basis() != sampled.space->basis()))
    throw InvariantError("error_decomposition: systems live in different spaces");
  const int n_h = exact_fem.size();
  if (sampled.size() != n_h)
    throw InvariantError("error_decomposition: systems differ in size");
  if (L < 1 || L > n_h)
    throw ConfigError("error_decomposition: L=" + std::to_string(L) +
                      " outside 1.." + std::to_string(n_h));
  if (L_ref == 0) L_ref = default_generator_truncation(L);
  L_ref = std::min(L_ref, model.available);
  if (L_ref < L)
    throw ConfigError("error_decomposition: L_ref must be at least L");

  ErrorReport rep;
  rep.L = L;
  rep.L_ref = L_ref;
  rep.h = exact_fem.space->h();
  rep.E_hM = E_hM;
  rep.e1 = truncation_error_E1(model, L);
  rep.gen_residual = truncation_error_E1(model, L_ref);

  const MercerKernel analytic_L = mercer_truncate(model, L);
  const MercerKernel fem_L = mercer_truncate(exact_fem, L);
  const MercerKernel sampled_L = mercer_truncate(sampled, L);
  rep.e2 = kernel_l2_distance(analytic_L, fem_L);
  rep.e3 = kernel_l2_distance(fem_L, sampled_L);
  rep.total = kernel_l2_distance(mercer_truncate(model, L_ref), sampled_L);

  const std::function<double(int)>& lam =
      model.distinct_eigenvalue ? model.distinct_eigenvalue : model.eigenvalue;
  const GFunctional g = g_functional(lam, L);
  rep.g2 = g.g2;
  rep.g_degenerate = g.degenerate;
  const HFunctional hf = h_functional(lam, L);
  rep.H = hf.value;
  rep.h_degenerate = hf.degenerate;
  return rep;
}

}  // namespace covrec

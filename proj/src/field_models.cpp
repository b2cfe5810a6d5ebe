#include "covrec/field_models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "covrec/errors.hpp"
#include "covrec/kernels.hpp"

namespace covrec {

namespace {

constexpr double kPi = 3.14159265358979323846;

double lam1d(int l) {
  const double u = (l - 0.5) * kPi;
  return 1.0 / (u * u);
}

double phi1d(int l, double x) {
  return std::sqrt(2.0) * std::sin((l - 0.5) * kPi * x);
}

// sum_{l > L} (2l-1)^{-4}: 64 explicit terms, then Euler-Maclaurin through
// the b^{-7} term (next correction ~ 7 b^{-9}, far below double precision)
double odd_quartic_tail(int L) {
  const double a = 2.0 * L + 1.0;
  double s = 0.0;
  const int explicit_terms = 64;
  for (int j = explicit_terms - 1; j >= 0; --j) {
    const double t = a + 2.0 * j;
    s += 1.0 / (t * t * t * t);
  }
  const double b = a + 2.0 * explicit_terms;
  const double b2 = b * b;
  const double b3 = b2 * b, b4 = b2 * b2, b5 = b4 * b, b7 = b5 * b2;
  s += 1.0 / (6.0 * b3) + 0.5 / b4 + (2.0 / 3.0) / b5 - (4.0 / 3.0) / b7;
  return s;
}

struct TensorTable {
  std::vector<double> vals;
  std::vector<int> l1, l2;
};

std::shared_ptr<const TensorTable> build_tensor_table(int max_modes) {
  struct Entry {
    std::int64_t p;  // (2 l1 - 1)(2 l2 - 1); exact sort key, larger p = smaller value
    int l1, l2;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(max_modes) * max_modes);
  for (int i = 1; i <= max_modes; ++i)
    for (int j = 1; j <= max_modes; ++j)
      entries.push_back({static_cast<std::int64_t>(2 * i - 1) * (2 * j - 1), i, j});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.p != b.p) return a.p < b.p;
    if (a.l1 != b.l1) return a.l1 < b.l1;
    return a.l2 < b.l2;
  });
  auto t = std::make_shared<TensorTable>();
  t->vals.resize(max_modes);
  t->l1.resize(max_modes);
  t->l2.resize(max_modes);
  for (int k = 0; k < max_modes; ++k) {
    t->vals[k] = lam1d(entries[k].l1) * lam1d(entries[k].l2);
    t->l1[k] = entries[k].l1;
    t->l2[k] = entries[k].l2;
  }
  return t;
}

}  // namespace

SpectrumModel brownian_spectrum_1d() {
  SpectrumModel m;
  m.name = "brownian1d";
  m.dim = 1;
  m.smoothness = 0.5;
  m.eigenvalue = [](int l) { return lam1d(l); };
  m.eigenfunction = [](int l, double x, double) { return phi1d(l, x); };
  m.kernel = [](double x, double, double xp, double) { return std::min(x, xp); };
  m.distinct_eigenvalue = m.eigenvalue;
  m.tail_sq = [](int L) {
    const double c = 16.0 / (kPi * kPi * kPi * kPi);
    return c * odd_quartic_tail(L);
  };
  return m;
}

SpectrumModel brownian_spectrum_tensor(int d, int max_modes) {
  if (d != 2) throw ConfigError("brownian_spectrum_tensor: only d = 2 is implemented");
  if (max_modes < 1 || max_modes > 4096)
    throw ConfigError("brownian_spectrum_tensor: max_modes out of range [1, 4096]");
  auto table = build_tensor_table(max_modes);
  SpectrumModel m;
  m.name = "brownian2d";
  m.dim = 2;
  m.smoothness = 0.5;
  m.available = max_modes;
  m.eigenvalue = [table](int l) {
    if (l < 1 || l > static_cast<int>(table->vals.size()))
      throw ConfigError("brownian2d eigenvalue: mode index exceeds the expanded table");
    return table->vals[l - 1];
  };
  m.eigenfunction = [table](int l, double x, double y) {
    if (l < 1 || l > static_cast<int>(table->l1.size()))
      throw ConfigError("brownian2d eigenfunction: mode index exceeds the expanded table");
    return phi1d(table->l1[l - 1], x) * phi1d(table->l2[l - 1], y);
  };
  m.kernel = [](double x, double y, double xp, double yp) {
    return std::min(x, xp) * std::min(y, yp);
  };
  // distinct values: products (2l1-1)(2l2-1) cover exactly the odd integers,
  // so the j-th distinct value is lambda_1 * lambda_j of the 1D spectrum
  m.distinct_eigenvalue = [](int j) { return lam1d(1) * lam1d(j); };
  m.tail_sq = [table](int L) {
    if (L < 0 || L > static_cast<int>(table->vals.size()))
      throw ConfigError("brownian2d tail: level exceeds the expanded table");
    // total sum over all pairs is (1/6)^2; subtract the kept prefix
    double s = 1.0 / 36.0, comp = 0.0;
    for (int i = 0; i < L; ++i) {
      const double y = -table->vals[i] * table->vals[i] - comp;
      const double t = s + y;
      comp = (t - s) - y;
      s = t;
    }
    return std::max(s, 0.0);
  };
  m.flatten_index = [](int l1, int l2) {
    return (l1 > 0 && l2 > 0) ? ((2 * l1 - 1) * (2 * l2 - 1) + 1) / 2 : 0;
  };
  m.multi_index = [table](int l) -> std::array<int, 2> {
    if (l < 1 || l > static_cast<int>(table->l1.size()))
      throw ConfigError("brownian2d multi_index: mode index exceeds the expanded table");
    return {table->l1[l - 1], table->l2[l - 1]};
  };
  return m;
}

double kernel_eval(const SpectrumModel& model, double x, double xp, int* trunc_level) {
  return kernel_eval(model, x, 0.0, xp, 0.0, trunc_level);
}

double kernel_eval(const SpectrumModel& model, double x, double y, double xp, double yp,
                   int* trunc_level) {
  if (model.kernel) {
    if (trunc_level) *trunc_level = 0;
    return model.kernel(x, y, xp, yp);
  }
  const int L = std::min(model.available, 4096);
  if (trunc_level) *trunc_level = L;
  double s = 0.0;
  for (int l = 1; l <= L; ++l)
    s += model.eigenvalue(l) * model.eigenfunction(l, x, y) * model.eigenfunction(l, xp, yp);
  return s;
}

Eigen::MatrixXd projected_eigenfunctions(const SpectrumModel& model, const FemSpace& space,
                                         int L, int quad_pts) {
  if (L < 1) throw ConfigError("projected_eigenfunctions: need L >= 1");
  if (L > model.available)
    throw ConfigError("projected_eigenfunctions: truncation level " + std::to_string(L) +
                      " exceeds the model's available modes");
  Eigen::MatrixXd P(space.dofs(), L);
  for (int l = 1; l <= L; ++l) {
    P.col(l - 1) = space.project(
        [&](double x, double y) { return model.eigenfunction(l, x, y); }, quad_pts);
  }
  return P;
}

Eigen::MatrixXd true_coefficient_covariance(const SpectrumModel& model, const FemSpace& space,
                                            int L_gen, int quad_pts) {
  const Eigen::MatrixXd P = projected_eigenfunctions(model, space, L_gen, quad_pts);
  Eigen::VectorXd sqrt_lam(L_gen);
  for (int l = 1; l <= L_gen; ++l) sqrt_lam[l - 1] = std::sqrt(model.eigenvalue(l));
  const Eigen::MatrixXd W = P * sqrt_lam.asDiagonal();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(space.dofs(), space.dofs());
  S.selfadjointView<Eigen::Lower>().rankUpdate(W);
  S.triangularView<Eigen::StrictlyUpper>() = S.transpose();
  return S;
}

SampleMatrix sample_field(const SpectrumModel& model, const FemSpace& space, int L_gen,
                          int M, std::uint64_t seed, int quad_pts) {
  if (M < 1) throw ConfigError("sample_field: need M >= 1");
  const Eigen::MatrixXd P = projected_eigenfunctions(model, space, L_gen, quad_pts);
  Eigen::VectorXd sqrt_lam(L_gen);
  for (int l = 1; l <= L_gen; ++l) sqrt_lam[l - 1] = std::sqrt(model.eigenvalue(l));
  const Eigen::MatrixXd B = P * sqrt_lam.asDiagonal();
  SampleMatrix out;
  out.rows.resize(M, space.dofs());
  kernels::kl_sample_rows(B, seed, out.rows);
  out.seed = seed;
  out.L_gen = L_gen;
  out.space = &space;
  out.model = &model;
  return out;
}

}  // namespace covrec

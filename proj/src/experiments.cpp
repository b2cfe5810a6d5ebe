#include "covrec/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <string>

#include "covrec/cov_estimators.hpp"
#include "covrec/errors.hpp"
#include "covrec/field_models.hpp"
#include "covrec/gauss.hpp"
#include "covrec/kernels.hpp"
#include "covrec/planner.hpp"
#include "covrec/rng.hpp"

namespace covrec {

namespace {

BasisKind parse_basis(const std::string& name) {
  if (name == "nodal") return BasisKind::NodalP1;
  if (name == "orthonormal") return BasisKind::L2Orthonormal;
  throw ConfigError("config: field 'basis' must be nodal or orthonormal, got '" +
                    name + "'");
}

const char* basis_name(BasisKind b) {
  return b == BasisKind::NodalP1 ? "nodal" : "orthonormal";
}

int as_positive_int(double v, const char* what) {
  const double r = std::round(v);
  if (!(v > 0.0) || std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v)) ||
      r > 2147483000.0)
    throw ConfigError(std::string("converge: ") + what +
                      " sweep values must be positive integers");
  return static_cast<int>(r);
}

// Everything shared across replicates of one reconstruction setup. Owns the
// space the eigen systems point into, so it must never be copied.
struct Pipeline {
  SpectrumModel model;
  FemSpace space;
  Eigen::MatrixXd sigma;  // exact coefficient covariance at L_gen
  EigenSystem exact;
  Eigen::VectorXd cont_lambda;  // distinct model eigenvalues, 1..L+1
  Eigen::VectorXd cont_gaps;    // continuous gaps, 1..L
  int L = 0;
  int L_gen = 0;

  explicit Pipeline(const ExperimentConfig& cfg)
      : model(cfg.d == 1 ? brownian_spectrum_1d() : brownian_spectrum_tensor(2)),
        space(cfg.d, cfg.n, cfg.basis) {
    if (cfg.model != "brownian")
      throw ConfigError("config: field 'model' must be brownian here; the "
                        "synthetic matrix family has no continuum kernel");
    L = cfg.L;
    if (L > space.dofs())
      throw ConfigError("config: field 'L' exceeds the space dimension " +
                        std::to_string(space.dofs()));
    L_gen = cfg.L_gen > 0 ? cfg.L_gen : default_generator_truncation(L);
    L_gen = std::min(L_gen, model.available);
    if (L_gen < L)
      throw ConfigError("config: field 'L_gen' must be >= L once clamped to "
                        "the model's available modes");
    sigma = true_coefficient_covariance(model, space, L_gen, cfg.quad_pts);
    exact = generalized_eigendecomposition(sigma, space, true, false);

    const auto& lam_fn =
        model.distinct_eigenvalue ? model.distinct_eigenvalue : model.eigenvalue;
    cont_lambda.resize(L + 1);
    for (int l = 1; l <= L + 1; ++l) cont_lambda[l - 1] = lam_fn(l);
    cont_gaps.resize(L);
    for (int l = 1; l <= L; ++l) cont_gaps[l - 1] = continuous_gap(cont_lambda, l);
  }
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;
};

// τ depends on M, so every sweep point resolves its own value.
int resolve_taper(const ExperimentConfig& cfg, long long M, int n_h) {
  if (cfg.tau_policy == "optimal") return optimal_taper(M, cfg.alpha, n_h);
  if (cfg.tau_policy == "explicit") return cfg.tau;
  return 0;  // none
}

ErrorReport reconstruct_one(const Pipeline& p, const ExperimentConfig& cfg,
                            long long M, std::uint64_t seed_r) {
  EigenSystem sampled;
  SamplingErrorNorm en;
  int tau_used = resolve_taper(cfg, M, p.space.dofs());
  if (cfg.exact_covariance) {
    // bypass: the estimate IS the exact covariance, so reuse its
    // decomposition and the sampling error is identically zero
    sampled = p.exact;
    sampled.exact = false;
    tau_used = 0;
  } else {
    if (M < 2)
      throw ConfigError("config: field 'M' must be >= 2 to estimate a covariance");
    const SampleMatrix s = sample_field(p.model, p.space, p.L_gen,
                                        static_cast<int>(M), seed_r, cfg.quad_pts);
    CovarianceEstimate cov = sample_covariance(s.rows);
    const Eigen::MatrixXd est =
        tau_used > 0 ? taper_estimate(cov, tau_used, cfg.alpha).matrix
                     : std::move(cov.matrix);
    en = sampling_error_norm(p.sigma, est, p.space);
    sampled = generalized_eigendecomposition(est, p.space, false, false);
  }
  ErrorReport rep =
      error_decomposition(p.model, p.exact, sampled, p.L, p.L_gen, en.value);
  rep.M = M;
  rep.tau = tau_used;
  rep.alpha = cfg.alpha;
  rep.seed = seed_r;
  const SuccessProbability sp =
      success_probability(static_cast<double>(M), p.space.dofs(), tau_used,
                          cfg.rho1, rep.H, p.space.mass_lambda_max());
  rep.p0 = sp.p0;
  rep.p0_clamped = sp.clamped;
  rep.gap_ok = gap_condition_check(p.cont_gaps, p.cont_lambda, p.space.h(),
                                   p.model.smoothness, cfg.c1, en.value, p.L);
  return rep;
}

void write_reconstruct_csv(std::ostream& out, const ExperimentConfig& cfg,
                           const Pipeline& p,
                           const std::vector<ErrorReport>& reps) {
  CsvWriter w(out);
  w.comment("model=" + cfg.model + " d=" + std::to_string(cfg.d) +
            " n=" + std::to_string(cfg.n) + " basis=" + basis_name(cfg.basis) +
            " n_h=" + std::to_string(p.space.dofs()) +
            " tau_policy=" + cfg.tau_policy +
            " exact_covariance=" + (cfg.exact_covariance ? "1" : "0"));
  w.header({"replicate", "seed", "n_h", "h", "L", "L_gen", "M", "tau", "alpha",
            "e1", "e2", "e3", "total", "gen_residual", "E_hM", "g2", "H", "p0",
            "p0_clamped", "gaps_certified"});
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const ErrorReport& r = reps[i];
    int certified = 0;
    for (const bool ok : r.gap_ok) certified += ok ? 1 : 0;
    w.cell(static_cast<int>(i))
        .cell(r.seed)
        .cell(p.space.dofs())
        .cell(r.h)
        .cell(r.L)
        .cell(r.L_ref)
        .cell(static_cast<std::uint64_t>(r.M))
        .cell(r.tau)
        .cell(r.alpha)
        .cell(r.e1)
        .cell(r.e2)
        .cell(r.e3)
        .cell(r.total)
        .cell(r.gen_residual)
        .cell(r.E_hM)
        .cell(r.g2)
        .cell(r.H)
        .cell(r.p0)
        .cell(r.p0_clamped ? 1 : 0)
        .cell(certified);
    w.end_row();
  }
}

void check_sweep(const std::vector<double>& sweep) {
  if (sweep.size() < 4)
    throw ConfigError("converge: sweep needs at least 4 points");
  for (const double v : sweep)
    if (!(v > 0.0)) throw ConfigError("converge: sweep values must be positive");
  const double r0 = std::log(sweep[1] / sweep[0]);
  if (!(r0 > 0.0))
    throw ConfigError("converge: sweep must be strictly increasing");
  for (std::size_t i = 1; i + 1 < sweep.size(); ++i) {
    const double ri = std::log(sweep[i + 1] / sweep[i]);
    if (!(ri > 0.0) || std::abs(ri - r0) > 0.25 * r0)
      throw ConfigError("converge: sweep spacing is not geometric");
  }
}

void finalize_study(StudyResult& res) {
  const int P = static_cast<int>(res.sweep.size());
  const int R = res.replicates;
  const int K = static_cast<int>(res.metric_names.size());
  res.mean.assign(P, std::vector<double>(K, 0.0));
  res.stddev.assign(P, std::vector<double>(K, 0.0));
  for (int p = 0; p < P; ++p) {
    for (int k = 0; k < K; ++k) {
      double s = 0.0;
      for (int r = 0; r < R; ++r) s += res.values[p][r][k];
      const double m = s / R;
      double sq = 0.0;
      for (int r = 0; r < R; ++r) {
        const double d = res.values[p][r][k] - m;
        sq += d * d;
      }
      res.mean[p][k] = m;
      res.stddev[p][k] = R > 1 ? std::sqrt(sq / (R - 1)) : 0.0;
    }
  }
  res.fits.assign(K, SlopeFit{});
  for (int k = 0; k < K; ++k) {
    bool positive = true;
    std::vector<double> y(P);
    for (int p = 0; p < P; ++p) {
      y[p] = res.mean[p][k];
      positive = positive && y[p] > 0.0;
    }
    if (positive) res.fits[k] = fit_loglog(res.sweep, y);
  }
}

// run body(p, r) over the grid with one derived seed per (point, replicate),
// storing metrics in res.values; exceptions are collected, not leaked
template <typename Body>
void sweep_replicates(StudyResult& res, const ExperimentConfig& cfg,
                      const Body& body) {
  const int P = static_cast<int>(res.sweep.size());
  const int R = res.replicates;
  const int K = static_cast<int>(res.metric_names.size());
  res.values.assign(P, std::vector<std::vector<double>>(
                           R, std::vector<double>(K, 0.0)));
  std::exception_ptr err;
  for (int p = 0; p < P; ++p) {
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < R; ++r) {
      try {
        body(p, r, rng::derive(cfg.seed, static_cast<std::uint64_t>(p) * R + r),
             res.values[p][r]);
      } catch (...) {
#pragma omp critical(covrec_sweep_err)
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  }
}

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  Eigen::MatrixXd A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      A(i, j) = rng::normal(seed, static_cast<std::uint64_t>(i), j + 1);
  return A;
}

Eigen::MatrixXd random_spd(int n, std::uint64_t seed, double ridge = 1e-3) {
  const Eigen::MatrixXd R = random_matrix(n, n, seed);
  return (R * R.transpose() / n +
          ridge * Eigen::MatrixXd::Identity(n, n))
      .eval();
}

struct Battery {
  InvariantCheckReport rep;
  void add(const std::string& module, const std::string& name,
           std::uint64_t seed, bool pass, const std::string& detail) {
    rep.items.push_back({module, name, pass, detail, seed});
    rep.all_pass = rep.all_pass && pass;
  }
};

}  // namespace

ExperimentConfig ExperimentConfig::from(KeyValueConfig& cfg) {
  ExperimentConfig c;
  c.model = cfg.get_string("model", c.model);
  c.d = cfg.get_int("d", c.d);
  c.n = cfg.get_int("n", c.n);
  c.basis = parse_basis(cfg.get_string("basis", "nodal"));
  c.L = cfg.get_int("L", c.L);
  c.L_gen = cfg.get_int("L_gen", c.L_gen);
  c.M = static_cast<long long>(
      cfg.get_uint64("M", static_cast<std::uint64_t>(c.M)));
  c.alpha = cfg.get_double("alpha", c.alpha);
  c.tau_policy = cfg.get_string("tau_policy", c.tau_policy);
  c.tau = cfg.get_int("tau", c.tau);
  c.replicates = cfg.get_int("replicates", c.replicates);
  c.seed = cfg.get_uint64("seed", c.seed);
  c.out = cfg.get_string("out", c.out);
  c.exact_covariance = cfg.get_bool("exact_covariance", c.exact_covariance);
  c.quad_pts = cfg.get_int("quad_pts", c.quad_pts);
  c.c1 = cfg.get_double("C1", c.c1);
  c.rho1 = cfg.get_double("rho1", c.rho1);
  c.h0 = cfg.get_double("h0", c.h0);
  c.dk_constant = cfg.get_double("dk_constant", c.dk_constant);
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (model != "brownian" && model != "synthetic")
    throw ConfigError("config: field 'model' must be brownian or synthetic");
  if (d != 1 && d != 2) throw ConfigError("config: field 'd' must be 1 or 2");
  if (n < 2) throw ConfigError("config: field 'n' must be >= 2");
  if (L < 1) throw ConfigError("config: field 'L' must be >= 1");
  if (L_gen < 0 || (L_gen > 0 && L_gen < L))
    throw ConfigError("config: field 'L_gen' must be 0 (auto) or >= L");
  if (M < 1 || M > 2147483647LL)
    throw ConfigError("config: field 'M' must be in [1, 2^31)");
  if (!(alpha > 0.0)) throw ConfigError("config: field 'alpha' must be positive");
  if (tau_policy != "optimal" && tau_policy != "explicit" && tau_policy != "none")
    throw ConfigError("config: field 'tau_policy' must be optimal, explicit, or none");
  if (tau_policy == "explicit" && (tau < 2 || tau % 2 != 0))
    throw ConfigError("config: field 'tau' must be a positive even integer");
  if (replicates < 1)
    throw ConfigError("config: field 'replicates' must be >= 1");
  if (quad_pts < 1 || quad_pts > 64)
    throw ConfigError("config: field 'quad_pts' must be in [1, 64]");
  if (c1 < 0.0) throw ConfigError("config: field 'C1' must be >= 0");
  if (!(rho1 > 0.0)) throw ConfigError("config: field 'rho1' must be positive");
  if (!(h0 > 0.0)) throw ConfigError("config: field 'h0' must be positive");
  if (!(dk_constant > 0.0))
    throw ConfigError("config: field 'dk_constant' must be positive");
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("fit_loglog: need >= 2 matching points");
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw ConfigError("fit_loglog: points must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_loglog: degenerate x values");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0, ss_tot = 0;
  for (int i = 0; i < n; ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += e * e;
    ss_tot += (ly[i] - my) * (ly[i] - my);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

ConvergenceAxis parse_axis(const std::string& name) {
  if (name == "truncation") return ConvergenceAxis::Truncation;
  if (name == "fem") return ConvergenceAxis::Fem;
  if (name == "sampling") return ConvergenceAxis::Sampling;
  if (name == "end2end") return ConvergenceAxis::End2End;
  throw ConfigError(
      "converge: axis must be truncation, fem, sampling, or end2end; got '" +
      name + "'");
}

void StudyResult::write_csv(std::ostream& out) const {
  CsvWriter w(out);
  w.comment("axis=" + axis + " replicates=" + std::to_string(replicates));
  std::vector<std::string> cols{"axis_value", "replicate"};
  for (const auto& name : metric_names) {
    cols.push_back(name);
    cols.push_back(name + "_mean");
    cols.push_back(name + "_std");
  }
  w.header(cols);
  for (std::size_t p = 0; p < sweep.size(); ++p) {
    for (int r = 0; r < replicates; ++r) {
      w.cell(sweep[p]).cell(r);
      for (std::size_t k = 0; k < metric_names.size(); ++k)
        w.cell(values[p][r][k]).cell(mean[p][k]).cell(stddev[p][k]);
      w.end_row();
    }
  }
  for (std::size_t k = 0; k < metric_names.size(); ++k)
    w.comment("fit " + metric_names[k] + ": slope=" + format_g17(fits[k].slope) +
              " intercept=" + format_g17(fits[k].intercept) +
              " r2=" + format_g17(fits[k].r2));
}

std::vector<ErrorReport> run_reconstruct(const ExperimentConfig& config,
                                         std::ostream* csv) {
  config.validate();
  const Pipeline p(config);
  std::vector<ErrorReport> reps(config.replicates);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < config.replicates; ++r) {
    try {
      reps[r] = reconstruct_one(p, config, config.M,
                                rng::derive(config.seed, r));
    } catch (...) {
#pragma omp critical(covrec_reconstruct_err)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  if (csv) write_reconstruct_csv(*csv, config, p, reps);
  return reps;
}

StudyResult run_converge(const ExperimentConfig& config, ConvergenceAxis axis,
                         const std::vector<double>& sweep, std::ostream* csv) {
  config.validate();
  check_sweep(sweep);
  StudyResult res;
  res.sweep = sweep;
  res.replicates = config.replicates;

  switch (axis) {
    case ConvergenceAxis::Truncation: {
      res.axis = "truncation";
      res.metric_names = {"E1"};
      if (config.model != "brownian")
        throw ConfigError("converge: truncation axis needs an analytic model");
      const SpectrumModel model =
          config.d == 1 ? brownian_spectrum_1d() : brownian_spectrum_tensor(2);
      res.values.assign(sweep.size(),
                        std::vector<std::vector<double>>(
                            res.replicates, std::vector<double>(1, 0.0)));
      for (std::size_t p = 0; p < sweep.size(); ++p) {
        const int Lp = as_positive_int(sweep[p], "L");
        const double e1 = truncation_error_E1(model, Lp);
        for (int r = 0; r < res.replicates; ++r) res.values[p][r][0] = e1;
      }
      break;
    }
    case ConvergenceAxis::Fem: {
      res.axis = "fem";
      res.metric_names = {"abs_err_lambda1", "abs_err_lambda2",
                          "abs_err_lambda3", "abs_err_lambda4",
                          "abs_err_lambda5"};
      if (config.model != "brownian")
        throw ConfigError("converge: fem axis needs an analytic model");
      const SpectrumModel model =
          config.d == 1 ? brownian_spectrum_1d() : brownian_spectrum_tensor(2);
      int L_gen = config.L_gen > 0
                      ? config.L_gen
                      : default_generator_truncation(std::max(config.L, 5));
      L_gen = std::min(L_gen, model.available);
      res.values.assign(sweep.size(),
                        std::vector<std::vector<double>>(
                            res.replicates, std::vector<double>(5, 0.0)));
      for (std::size_t p = 0; p < sweep.size(); ++p) {
        const int np = as_positive_int(sweep[p], "n");
        const FemSpace sp(config.d, np, config.basis);
        if (sp.dofs() < 5 || L_gen < 5)
          throw ConfigError("converge: fem axis needs >= 5 modes");
        const Eigen::MatrixXd sigma =
            true_coefficient_covariance(model, sp, L_gen, config.quad_pts);
        const EigenSystem sys = generalized_eigendecomposition(sigma, sp);
        for (int k = 0; k < 5; ++k) {
          const double err = std::abs(model.eigenvalue(k + 1) - sys.values[k]);
          for (int r = 0; r < res.replicates; ++r) res.values[p][r][k] = err;
        }
      }
      break;
    }
    case ConvergenceAxis::Sampling: {
      res.axis = "sampling";
      res.metric_names = {"op_err"};
      if (config.model == "synthetic") {
        const Eigen::MatrixXd sigma =
            synthetic_decay_covariance(config.n, config.alpha);
        const Eigen::MatrixXd A =
            Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
        sweep_replicates(
            res, config,
            [&](int p, int, std::uint64_t seed_r, std::vector<double>& outm) {
              const int Mp = as_positive_int(res.sweep[p], "M");
              if (Mp < 2)
                throw ConfigError("converge: sampling needs M >= 2");
              Eigen::MatrixXd X(Mp, config.n);
              kernels::chol_sample_rows(A, seed_r, X);
              CovarianceEstimate cov = sample_covariance(X);
              const int tau = resolve_taper(config, Mp, config.n);
              const Eigen::MatrixXd est =
                  tau > 0 ? taper_estimate(cov, tau, config.alpha).matrix
                          : std::move(cov.matrix);
              outm[0] = operator_norm(est - sigma);
            });
      } else {
        const SpectrumModel model = config.d == 1
                                        ? brownian_spectrum_1d()
                                        : brownian_spectrum_tensor(2);
        const FemSpace sp(config.d, config.n, config.basis);
        int L_gen = config.L_gen > 0 ? config.L_gen
                                     : default_generator_truncation(config.L);
        L_gen = std::min(L_gen, model.available);
        const Eigen::MatrixXd sigma =
            true_coefficient_covariance(model, sp, L_gen, config.quad_pts);
        sweep_replicates(
            res, config,
            [&](int p, int, std::uint64_t seed_r, std::vector<double>& outm) {
              const int Mp = as_positive_int(res.sweep[p], "M");
              if (Mp < 2)
                throw ConfigError("converge: sampling needs M >= 2");
              const SampleMatrix s =
                  sample_field(model, sp, L_gen, Mp, seed_r, config.quad_pts);
              CovarianceEstimate cov = sample_covariance(s.rows);
              const int tau = resolve_taper(config, Mp, sp.dofs());
              const Eigen::MatrixXd est =
                  tau > 0 ? taper_estimate(cov, tau, config.alpha).matrix
                          : std::move(cov.matrix);
              outm[0] = operator_norm(est - sigma);
            });
      }
      break;
    }
    case ConvergenceAxis::End2End: {
      res.axis = "end2end";
      res.metric_names = {"total"};
      const Pipeline p(config);
      sweep_replicates(
          res, config,
          [&](int pi, int, std::uint64_t seed_r, std::vector<double>& outm) {
            const int Mp = as_positive_int(res.sweep[pi], "M");
            outm[0] = reconstruct_one(p, config, Mp, seed_r).total;
          });
      break;
    }
  }

  finalize_study(res);
  if (csv) res.write_csv(*csv);
  return res;
}

Eigen::MatrixXd synthetic_decay_covariance(int n_h, double alpha) {
  if (n_h < 1)
    throw ConfigError("synthetic_decay_covariance: n_h must be >= 1");
  if (!(alpha > 0.0))
    throw ConfigError("synthetic_decay_covariance: alpha must be positive");
  Eigen::MatrixXd S(n_h, n_h);
  for (int k = 0; k < n_h; ++k)
    for (int kp = 0; kp < n_h; ++kp)
      S(k, kp) = std::pow(1.0 + std::abs(k - kp), -(alpha + 2.0));
  return S;
}

void InvariantCheckReport::write(std::ostream& out) const {
  for (const auto& line : header) out << "# " << line << '\n';
  for (const auto& item : items)
    out << (item.pass ? "[PASS] " : "[FAIL] ") << item.module << '/'
        << item.name << " seed=" << item.seed
        << (item.detail.empty() ? "" : "  " + item.detail) << '\n';
  int passed = 0;
  for (const auto& item : items) passed += item.pass ? 1 : 0;
  out << (all_pass ? "OK" : "FAILED") << ": " << passed << '/' << items.size()
      << " invariants hold\n";
}

InvariantCheckReport run_check_invariants(const ExperimentConfig& config) {
  config.validate();
  Battery b;
  const std::uint64_t seed = config.seed;
  b.rep.header.push_back("invariant battery, small sizes");
  b.rep.header.push_back(
      "effective config: model=" + config.model + " d=" + std::to_string(config.d) +
      " n=" + std::to_string(config.n) + " basis=" + basis_name(config.basis) +
      " L=" + std::to_string(config.L) + " L_gen=" + std::to_string(config.L_gen) +
      " M=" + std::to_string(config.M) + " alpha=" + format_g17(config.alpha) +
      " tau_policy=" + config.tau_policy + " tau=" + std::to_string(config.tau) +
      " replicates=" + std::to_string(config.replicates) +
      " seed=" + std::to_string(config.seed) +
      " quad_pts=" + std::to_string(config.quad_pts) +
      " C1=" + format_g17(config.c1) + " rho1=" + format_g17(config.rho1) +
      " h0=" + format_g17(config.h0) +
      " dk_constant=" + format_g17(config.dk_constant));
  b.rep.header.push_back(
      "unset keys take the defaults shown above (strict parsing rejects "
      "unknown keys)");

  {  // quadrature: exact for degree <= 2n-1
    const QuadRule q = gauss_legendre_01(8);
    double integral = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i)
      integral += q.w[i] * std::pow(q.x[i], 15);
    const double err = std::abs(integral - 1.0 / 16.0);
    b.add("quadrature", "degree_15_exact", seed, err <= 1e-14,
          "|err|=" + format_g17(err));
  }
  {  // mass matrices integrate the partition of unity to |D| = 1
    const FemSpace s1(1, 16);
    const FemSpace s2(2, 8);
    const double e1 = std::abs(s1.mass().sum() - 1.0);
    const double e2 = std::abs(s2.mass().sum() - 1.0);
    b.add("fem_space", "mass_total_one", seed, e1 <= 1e-12 && e2 <= 1e-12,
          "1d=" + format_g17(e1) + " 2d=" + format_g17(e2));
    const double ec =
        (s1.mass_chol() * s1.mass_chol().transpose() - s1.mass())
            .cwiseAbs()
            .maxCoeff();
    b.add("fem_space", "cholesky_consistent", seed, ec <= 1e-13,
          "max|LL^T-M|=" + format_g17(ec));
    b.add("fem_space", "mass_spd", seed, s1.mass_lambda_min() > 0.0,
          "lambda_min=" + format_g17(s1.mass_lambda_min()));
  }
  {  // P1 reproduces affine functions exactly
    const FemSpace s(1, 12);
    const Eigen::VectorXd c =
        s.project([](double x, double) { return 2.0 * x - 0.25; }, 8);
    const double err = std::abs(s.evaluate(c, 0.37) - (2.0 * 0.37 - 0.25));
    b.add("fem_space", "affine_reproduction", seed, err <= 1e-10,
          "|err|=" + format_g17(err));
  }
  {  // counter RNG: pure function of its key
    const double a = rng::normal(seed, 2, 3);
    const double bb = rng::normal(seed, 2, 3);
    const double c = rng::normal(seed + 1, 2, 3);
    b.add("rng", "keyed_determinism", seed, a == bb && a != c,
          "draw=" + format_g17(a));
  }
  {  // parallel kernels match their serial twins bitwise
    const Eigen::MatrixXd B = random_matrix(7, 5, seed ^ 0xb1);
    Eigen::MatrixXd X1(9, 7), X2(9, 7);
    kernels::kl_sample_rows(B, seed, X1);
    kernels::kl_sample_rows_serial(B, seed, X2);
    bool same = (X1 - X2).cwiseAbs().maxCoeff() == 0.0;
    Eigen::MatrixXd C1, C2;
    const Eigen::VectorXd mu = kernels::row_mean(X1);
    kernels::covariance_mle(X1, mu, C1);
    kernels::covariance_mle_serial(X1, mu, C2);
    same = same && (C1 - C2).cwiseAbs().maxCoeff() == 0.0;
    Eigen::MatrixXd T1, T2;
    kernels::taper_apply(C1, 4, T1);
    kernels::taper_apply_serial(C1, 4, T2);
    same = same && (T1 - T2).cwiseAbs().maxCoeff() == 0.0;
    b.add("kernels", "serial_parallel_bitwise", seed, same, "");
  }
  {  // taper weights: plateau, ramp, cutoff
    const bool profile = taper_weight(0, 0, 6) == 1.0 &&
                         taper_weight(0, 3, 6) == 1.0 &&
                         std::abs(taper_weight(0, 4, 6) - 2.0 / 3.0) <= 1e-15 &&
                         taper_weight(0, 6, 6) == 0.0 &&
                         taper_weight(0, 9, 6) == 0.0;
    b.add("cov_estimators", "taper_profile", seed, profile, "tau=6");
    bool even_ok = true;
    for (const long long m : {2LL, 10LL, 100LL, 4096LL}) {
      const int t = optimal_taper(m, config.alpha, 50);
      even_ok = even_ok && t >= 2 && t % 2 == 0 && t <= 100;
    }
    b.add("cov_estimators", "optimal_taper_even", seed, even_ok, "");
  }
  {  // the synthetic family belongs to its decay class
    const Eigen::MatrixXd S = synthetic_decay_covariance(50, 1.0);
    const DecayClassReport r = decay_class_check(S, 1.0, 1.0);
    b.add("cov_estimators", "decay_class_member", seed, r.member,
          "C1=" + format_g17(r.C1) + " C2=" + format_g17(r.C2));
  }
  {  // generalized eigenvectors are mass-orthonormal
    const FemSpace s(1, 19);
    const Eigen::MatrixXd sigma = random_spd(s.dofs(), seed ^ 0x5151);
    const EigenSystem sys = generalized_eigendecomposition(sigma, s);
    const Eigen::MatrixXd G =
        sys.vectors.transpose() * s.mass() * sys.vectors -
        Eigen::MatrixXd::Identity(s.dofs(), s.dofs());
    const double err = G.cwiseAbs().maxCoeff();
    b.add("spectral_solver", "mass_orthonormal", seed, err <= 1e-9,
          "max|V^T M V - I|=" + format_g17(err));
  }
  {  // Weyl residuals bounded by the sampling error norm
    const FemSpace s(1, 15);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const std::uint64_t ts = rng::derive(seed, 100 + trial);
      const Eigen::MatrixXd sigma = random_spd(s.dofs(), ts);
      Eigen::MatrixXd pert = 0.01 * random_matrix(s.dofs(), s.dofs(), ts ^ 0x77);
      pert = ((pert + pert.transpose()) / 2.0).eval();
      const Eigen::MatrixXd sig2 = sigma + pert;
      const SamplingErrorNorm en = sampling_error_norm(sigma, sig2, s);
      const WeylReport w =
          weyl_check(generalized_eigendecomposition(sigma, s),
                     generalized_eigendecomposition(sig2, s, false), en.value);
      ok = ok && w.pass;
      worst = std::max(worst, w.max_residual - w.bound);
    }
    b.add("spectral_solver", "weyl_bound", seed, ok,
          "worst overshoot=" + format_g17(worst));
  }
  {  // Davis-Kahan rows hold on non-degenerate random trials
    const FemSpace s(1, 11);
    bool ok = true;
    int checked = 0;
    for (int trial = 0; trial < 30; ++trial) {
      const std::uint64_t ts = rng::derive(seed, 500 + trial);
      const Eigen::MatrixXd sigma = random_spd(s.dofs(), ts);
      Eigen::MatrixXd pert = 1e-5 * random_matrix(s.dofs(), s.dofs(), ts ^ 0x99);
      pert = ((pert + pert.transpose()) / 2.0).eval();
      const Eigen::MatrixXd sig2 = sigma + pert;
      const SamplingErrorNorm en = sampling_error_norm(sigma, sig2, s);
      const auto rows = davis_kahan_diagnostic(
          generalized_eigendecomposition(sigma, s),
          generalized_eigendecomposition(sig2, s, false), en.value);
      for (const auto& row : rows) {
        if (row.degenerate) continue;
        ++checked;
        ok = ok && row.ok;
      }
    }
    b.add("spectral_solver", "davis_kahan_bound", seed, ok && checked > 0,
          "rows checked=" + std::to_string(checked));
  }
  {  // Gram-identity distance: zero on equal kernels, triangle inequality
    const FemSpace s(1, 13);
    const std::uint64_t ts = seed ^ 0xabc;
    const EigenSystem ea =
        generalized_eigendecomposition(random_spd(s.dofs(), ts), s);
    const EigenSystem eb =
        generalized_eigendecomposition(random_spd(s.dofs(), ts + 1), s);
    const EigenSystem ec =
        generalized_eigendecomposition(random_spd(s.dofs(), ts + 2), s);
    const MercerKernel a = mercer_truncate(ea, 6);
    const MercerKernel bk = mercer_truncate(eb, 6);
    const MercerKernel ck = mercer_truncate(ec, 6);
    const double self = kernel_l2_distance(a, a);
    const double ab = kernel_l2_distance(a, bk);
    const double bc = kernel_l2_distance(bk, ck);
    const double ac = kernel_l2_distance(a, ck);
    b.add("error_analysis", "gram_distance_metric", seed,
          self <= 1e-12 && ac <= ab + bc + 1e-10,
          "d(a,a)=" + format_g17(self) +
              " slack=" + format_g17(ab + bc - ac));
  }
  {  // E1 strictly decreasing in L
    const SpectrumModel m = brownian_spectrum_1d();
    bool mono = true;
    double prev = truncation_error_E1(m, 0);
    for (int L = 1; L <= 20; ++L) {
      const double cur = truncation_error_E1(m, L);
      mono = mono && cur < prev;
      prev = cur;
    }
    b.add("error_analysis", "e1_monotone", seed, mono,
          "E1(20)=" + format_g17(prev));
  }
  {  // spectral functionals match their closed forms
    const SpectrumModel m = brownian_spectrum_1d();
    const GFunctional g = g_functional(m.eigenvalue, 32);
    const HFunctional h = h_functional(m.eigenvalue, 32);
    const double gerr =
        std::abs(g.g2 - brownian_g2_closed(32)) / brownian_g2_closed(32);
    const double herr =
        std::abs(h.value - brownian_h_closed(32, 1)) / brownian_h_closed(32, 1);
    b.add("error_analysis", "gh_closed_forms", seed,
          gerr <= 1e-10 && herr <= 1e-10,
          "g_rel=" + format_g17(gerr) + " h_rel=" + format_g17(herr));
  }
  {  // planner: truncation level and Lambert residuals
    const int L = truncation_level(0.01, 0.5, 1);
    b.add("planner", "truncation_level_22", seed, L == 22,
          "L(0.01)=" + std::to_string(L));
    bool lam_ok = true;
    std::string msg;
    try {
      const double lo = -0.36787944117144233 + 1e-6;
      for (int i = 0; i <= 20; ++i) {
        // log-ish grid from just above the branch point to 1e6
        const double t = static_cast<double>(i) / 20.0;
        const double x = lo + (1e6 - lo) * std::pow(t, 8.0);
        (void)lambert_w(x);  // throws if the residual tolerance is missed
      }
      (void)lambert_w_m1(-0.1);
      (void)lambert_w_m1(-1e-12);
    } catch (const std::exception& e) {
      lam_ok = false;
      msg = e.what();
    }
    b.add("planner", "lambert_residuals", seed, lam_ok, msg);
    const Plan plan = brownian_plan(0.1);
    b.add("planner", "brownian_plan_selfcheck", seed,
          plan.self_check || plan.capped || plan.vacuous,
          "M=" + format_g17(plan.M) + " L=" + std::to_string(plan.L));
  }
  {  // fault injection: a corrupted mass factor must be detected
    const FemSpace s(1, 15);
    const SpectrumModel m = brownian_spectrum_1d();
    const Eigen::MatrixXd sigma = true_coefficient_covariance(m, s, 64);
    Eigen::MatrixXd badL = s.mass_chol();
    badL(0, 0) *= 1.25;
    const EigenSystem good = generalized_eigendecomposition(sigma, s);
    const EigenSystem bad = generalized_eigendecomposition(sigma, badL, false);
    const Eigen::MatrixXd G =
        bad.vectors.transpose() * s.mass() * bad.vectors -
        Eigen::MatrixXd::Identity(s.dofs(), s.dofs());
    const double ortho_residual = G.cwiseAbs().maxCoeff();
    const WeylReport w = weyl_check(good, bad, 0.0);
    const bool detected = ortho_residual > 1e-6 && !w.pass;
    b.add("fixture", "corrupted_mass_detected", seed, detected,
          "orthonormality residual=" + format_g17(ortho_residual) +
              " weyl max residual=" + format_g17(w.max_residual));
  }
  return b.rep;
}

}  // namespace covrec

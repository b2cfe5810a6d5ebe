// Command-line front end: spectrum | sample | estimate | reconstruct |
// converge | plan | check-invariants. Exit codes: 0 ok, 1 config error,
// 2 invariant failure, 3 numeric failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "covrec/config.hpp"
#include "covrec/cov_estimators.hpp"
#include "covrec/errors.hpp"
#include "covrec/experiments.hpp"
#include "covrec/field_models.hpp"
#include "covrec/kernels.hpp"
#include "covrec/planner.hpp"

namespace {

using namespace covrec;

constexpr double kPi = 3.14159265358979323846;

// stdout unless --out (or config `out`) names a file
struct OutStream {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit OutStream(const std::string& path) {
    if (!path.empty()) {
      file.open(path, std::ios::binary);  // byte-deterministic CSV
      if (!file) throw ConfigError("cannot open output file '" + path + "'");
      os = &file;
    }
  }
  std::ostream& get() { return *os; }
};

struct Overrides {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int replicates = 0;  // 0 = keep config value
};

void add_common(CLI::App* sc, Overrides& ov, bool with_replicates = true) {
  sc->add_option("--config", ov.config_path, "key=value config file");
  sc->add_option("--out", ov.out, "output CSV path (default stdout)");
  sc->add_option("--seed", ov.seed, "base seed")->each([&ov](const std::string&) {
    ov.seed_set = true;
  });
  if (with_replicates)
    sc->add_option("--replicates", ov.replicates, "replicate count");
}

// parse config file (empty path = all defaults) and apply flag overrides
ExperimentConfig load_config(const Overrides& ov, KeyValueConfig* keep = nullptr) {
  KeyValueConfig kv = ov.config_path.empty()
                          ? KeyValueConfig()
                          : KeyValueConfig::from_file(ov.config_path);
  ExperimentConfig cfg = ExperimentConfig::from(kv);
  if (ov.seed_set) cfg.seed = ov.seed;
  if (!ov.out.empty()) cfg.out = ov.out;
  if (ov.replicates > 0) cfg.replicates = ov.replicates;
  cfg.validate();
  if (keep)
    *keep = kv;
  else
    kv.reject_unknown();
  return cfg;
}

SpectrumModel model_for(const ExperimentConfig& cfg) {
  return cfg.d == 1 ? brownian_spectrum_1d() : brownian_spectrum_tensor(2);
}

int cmd_spectrum(const Overrides& ov, int count) {
  const ExperimentConfig cfg = load_config(ov);
  const SpectrumModel model = model_for(cfg);
  if (count <= 0) count = std::max(cfg.L, 16);
  count = std::min(count, model.available);
  OutStream out(cfg.out);
  CsvWriter w(out.get());
  if (cfg.d == 2) {
    w.header({"ell", "lambda", "l1", "l2"});
    for (int l = 1; l <= count; ++l) {
      const auto mi = model.multi_index(l);
      w.cell(l).cell(model.eigenvalue(l)).cell(mi[0]).cell(mi[1]);
      w.end_row();
    }
  } else {
    w.header({"ell", "lambda"});
    for (int l = 1; l <= count; ++l) {
      w.cell(l).cell(model.eigenvalue(l));
      w.end_row();
    }
  }
  return 0;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& A,
                  const std::string& prefix) {
  CsvWriter w(os);
  std::vector<std::string> cols;
  cols.reserve(A.cols());
  for (int j = 0; j < A.cols(); ++j) cols.push_back(prefix + std::to_string(j));
  w.header(cols);
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) w.cell(A(i, j));
    w.end_row();
  }
}

int cmd_sample(const Overrides& ov) {
  const ExperimentConfig cfg = load_config(ov);
  if (cfg.model != "brownian")
    throw ConfigError("sample: field 'model' must be brownian");
  const SpectrumModel model = model_for(cfg);
  const FemSpace space(cfg.d, cfg.n, cfg.basis);
  int L_gen = cfg.L_gen > 0 ? cfg.L_gen : default_generator_truncation(cfg.L);
  L_gen = std::min(L_gen, model.available);
  const SampleMatrix s =
      sample_field(model, space, L_gen, static_cast<int>(cfg.M), cfg.seed,
                   cfg.quad_pts);
  OutStream out(cfg.out);
  write_matrix(out.get(), s.rows, "c");
  return 0;
}

int cmd_estimate(const Overrides& ov) {
  const ExperimentConfig cfg = load_config(ov);
  OutStream out(cfg.out);
  if (cfg.model == "synthetic") {
    const Eigen::MatrixXd sigma = synthetic_decay_covariance(cfg.n, cfg.alpha);
    const Eigen::MatrixXd A = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
    Eigen::MatrixXd X(static_cast<int>(cfg.M), cfg.n);
    kernels::chol_sample_rows(A, cfg.seed, X);
    CovarianceEstimate cov = sample_covariance(X);
    const int tau = cfg.tau_policy == "optimal"
                        ? optimal_taper(cfg.M, cfg.alpha, cfg.n)
                    : cfg.tau_policy == "explicit" ? cfg.tau
                                                   : 0;
    const Eigen::MatrixXd est =
        tau > 0 ? taper_estimate(cov, tau, cfg.alpha).matrix : cov.matrix;
    out.get() << "# tau=" << tau
              << " op_err=" << format_g17(operator_norm(est - sigma)) << '\n';
    write_matrix(out.get(), est, "c");
    return 0;
  }
  const SpectrumModel model = model_for(cfg);
  const FemSpace space(cfg.d, cfg.n, cfg.basis);
  int L_gen = cfg.L_gen > 0 ? cfg.L_gen : default_generator_truncation(cfg.L);
  L_gen = std::min(L_gen, model.available);
  const Eigen::MatrixXd sigma =
      true_coefficient_covariance(model, space, L_gen, cfg.quad_pts);
  const SampleMatrix s =
      sample_field(model, space, L_gen, static_cast<int>(cfg.M), cfg.seed,
                   cfg.quad_pts);
  CovarianceEstimate cov = sample_covariance(s.rows);
  const int tau = cfg.tau_policy == "optimal"
                      ? optimal_taper(cfg.M, cfg.alpha, space.dofs())
                  : cfg.tau_policy == "explicit" ? cfg.tau
                                                 : 0;
  const Eigen::MatrixXd est =
      tau > 0 ? taper_estimate(cov, tau, cfg.alpha).matrix : cov.matrix;
  const SamplingErrorNorm en = sampling_error_norm(sigma, est, space);
  out.get() << "# n_h=" << space.dofs() << " tau=" << tau
            << " E_hM=" << format_g17(en.value)
            << " bracket=[" << format_g17(en.lo) << ',' << format_g17(en.hi)
            << "]\n";
  write_matrix(out.get(), est, "c");
  return 0;
}

int cmd_reconstruct(const Overrides& ov) {
  const ExperimentConfig cfg = load_config(ov);
  OutStream out(cfg.out);
  run_reconstruct(cfg, &out.get());
  return 0;
}

int cmd_converge(const Overrides& ov, std::string axis_flag,
                 std::string sweep_flag) {
  KeyValueConfig kv;
  ExperimentConfig cfg = load_config(ov, &kv);
  if (axis_flag.empty()) axis_flag = kv.get_string("axis", "");
  if (sweep_flag.empty()) sweep_flag = kv.get_string("sweep", "");
  kv.reject_unknown();
  if (axis_flag.empty())
    throw ConfigError("converge: --axis (or config key 'axis') is required");
  if (sweep_flag.empty())
    throw ConfigError("converge: --sweep (or config key 'sweep') is required");
  const ConvergenceAxis axis = parse_axis(axis_flag);
  const std::vector<double> sweep = parse_number_list(sweep_flag);
  OutStream out(cfg.out);
  run_converge(cfg, axis, sweep, &out.get());
  return 0;
}

void print_plan_table(std::ostream& os, double eps, const Plan& plan) {
  os << "eps = " << format_g17(eps) << '\n'
     << "regime = " << static_cast<int>(plan.regime) << '\n'
     << "L = " << plan.L << '\n'
     << "M = " << format_g17(plan.M) << '\n'
     << "h_lo = " << format_g17(plan.h_lo) << '\n'
     << "h_hi = " << format_g17(plan.h_hi) << '\n'
     << "vacuous = " << (plan.vacuous ? 1 : 0) << '\n'
     << "capped = " << (plan.capped ? 1 : 0) << '\n'
     << "self_check = " << (plan.self_check ? 1 : 0) << '\n'
     << "regime_consistent = " << (plan.regime_consistent ? 1 : 0) << '\n'
     << "h_ceiling_flagged = " << (plan.h_ceiling_flagged ? 1 : 0) << '\n';
  for (const auto& [name, value] : plan.terms)
    os << "term." << name << " = " << format_g17(value) << '\n';
}

int cmd_plan(const std::vector<double>& eps_list, const std::string& regime,
             double s, int d, double alpha, double gamma, double beta,
             double rho1, double h0, double lambda_max, double c_slack,
             const std::string& out_path) {
  if (eps_list.empty()) throw ConfigError("plan: need at least one --eps");
  OutStream out(out_path);

  const auto plan_at = [&](double eps) -> Plan {
    if (regime == "brownian") return brownian_plan(eps, beta, rho1, h0, c_slack);
    PlanInputs in;
    in.eps = eps;
    in.s = s;
    in.d = d;
    in.alpha = alpha;
    in.gamma = gamma;
    in.beta = beta;
    in.rho1 = rho1;
    in.h0 = h0;
    in.lambda_max_mass = lambda_max;
    in.c_slack = c_slack;
    // Brownian spectrum supplies the functionals; in 2D the distinct values
    // carry the extra lambda_1 factor per dimension
    in.lambda = [d](int l) {
      const double base = 4.0 / (kPi * kPi * (2.0 * l - 1.0) * (2.0 * l - 1.0));
      return d == 2 ? (4.0 / (kPi * kPi)) * base : base;
    };
    in.H = [d](int L) { return brownian_h_closed(L, d); };
    const Regime r = regime == "1"   ? Regime::Case1
                     : regime == "2" ? Regime::Case2
                                     : Regime::Case3;
    return plan_parameters(in, r);
  };

  if (eps_list.size() == 1) {
    print_plan_table(out.get(), eps_list[0], plan_at(eps_list[0]));
    return 0;
  }
  CsvWriter w(out.get());
  w.header({"eps", "regime", "L", "M", "h_lo", "h_hi", "vacuous", "capped",
            "self_check", "regime_consistent", "h_ceiling_flagged"});
  for (const double eps : eps_list) {
    const Plan plan = plan_at(eps);
    w.cell(eps)
        .cell(static_cast<int>(plan.regime))
        .cell(plan.L)
        .cell(plan.M)
        .cell(plan.h_lo)
        .cell(plan.h_hi)
        .cell(plan.vacuous ? 1 : 0)
        .cell(plan.capped ? 1 : 0)
        .cell(plan.self_check ? 1 : 0)
        .cell(plan.regime_consistent ? 1 : 0)
        .cell(plan.h_ceiling_flagged ? 1 : 0);
    w.end_row();
  }
  return 0;
}

int cmd_check_invariants(const Overrides& ov) {
  const ExperimentConfig cfg = load_config(ov);
  const InvariantCheckReport rep = run_check_invariants(cfg);
  OutStream out(cfg.out);
  rep.write(out.get());
  return rep.all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariance operator reconstruction toolkit"};
  app.require_subcommand(1);

  Overrides ov_spectrum, ov_sample, ov_estimate, ov_reconstruct, ov_converge,
      ov_check;
  int spectrum_count = 0;
  std::string converge_axis, converge_sweep;

  auto* sc_spectrum =
      app.add_subcommand("spectrum", "model eigenvalues as CSV");
  add_common(sc_spectrum, ov_spectrum, false);
  sc_spectrum->add_option("--count", spectrum_count,
                          "modes to print (default max(L,16))");

  auto* sc_sample = app.add_subcommand(
      "sample", "draw M truncated-KL coefficient samples as CSV");
  add_common(sc_sample, ov_sample, false);

  auto* sc_estimate = app.add_subcommand(
      "estimate", "tapered covariance estimate from fresh samples");
  add_common(sc_estimate, ov_estimate, false);

  auto* sc_reconstruct = app.add_subcommand(
      "reconstruct", "full pipeline with error decomposition per replicate");
  add_common(sc_reconstruct, ov_reconstruct);

  auto* sc_converge =
      app.add_subcommand("converge", "convergence study along one axis");
  add_common(sc_converge, ov_converge);
  sc_converge->add_option("--axis", converge_axis,
                          "truncation | fem | sampling | end2end");
  sc_converge->add_option("--sweep", converge_sweep,
                          "comma-separated sweep values, e.g. 8,16,32,64");

  std::vector<double> plan_eps;
  std::string plan_regime = "brownian", plan_out;
  double plan_s = 0.5, plan_alpha = 1.0, plan_gamma = 1.5, plan_beta = 1.0;
  double plan_rho1 = 1.0, plan_h0 = 1.0, plan_lambda_max = 1.0,
         plan_c_slack = 1.0;
  int plan_d = 1;
  auto* sc_plan =
      app.add_subcommand("plan", "parameter plan for a target accuracy");
  sc_plan->add_option("--eps", plan_eps, "target accuracies (table for one, CSV for several)")
      ->required();
  sc_plan->add_option("--regime", plan_regime, "1 | 2 | 3 | brownian")
      ->check(CLI::IsMember({"1", "2", "3", "brownian"}));
  sc_plan->add_option("--s", plan_s, "eigenfunction smoothness exponent");
  sc_plan->add_option("--d", plan_d, "spatial dimension")
      ->check(CLI::Range(1, 2));
  sc_plan->add_option("--alpha", plan_alpha, "covariance decay exponent");
  sc_plan->add_option("--gamma", plan_gamma, "eigenvalue decay exponent");
  sc_plan->add_option("--beta", plan_beta, "log factor exponent");
  sc_plan->add_option("--rho1", plan_rho1, "sampling-rate constant surrogate");
  sc_plan->add_option("--h0", plan_h0, "coarsest admissible mesh");
  sc_plan->add_option("--lambda-max", plan_lambda_max,
                      "largest mass-matrix eigenvalue");
  sc_plan->add_option("--c-slack", plan_c_slack,
                      "multiplicative slack on the sample-size bound");
  sc_plan->add_option("--out", plan_out, "output path (default stdout)");

  auto* sc_check = app.add_subcommand("check-invariants",
                                      "cross-module invariant battery");
  add_common(sc_check, ov_check, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // bad flags are config errors in this tool's contract
  }

  try {
    if (sc_spectrum->parsed()) return cmd_spectrum(ov_spectrum, spectrum_count);
    if (sc_sample->parsed()) return cmd_sample(ov_sample);
    if (sc_estimate->parsed()) return cmd_estimate(ov_estimate);
    if (sc_reconstruct->parsed()) return cmd_reconstruct(ov_reconstruct);
    if (sc_converge->parsed())
      return cmd_converge(ov_converge, converge_axis, converge_sweep);
    if (sc_plan->parsed())
      return cmd_plan(plan_eps, plan_regime, plan_s, plan_d, plan_alpha,
                      plan_gamma, plan_beta, plan_rho1, plan_h0,
                      plan_lambda_max, plan_c_slack, plan_out);
    if (sc_check->parsed()) return cmd_check_invariants(ov_check);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

#pragma once

// Experiment harness behind the CLI: strict config parsing, the seeded
// reconstruction pipeline, convergence-study drivers with log-log slope fits,
// and the cross-module invariant battery.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "covrec/config.hpp"
#include "covrec/error_analysis.hpp"
#include "covrec/fem_space.hpp"
#include "covrec/spectral_solver.hpp"

namespace covrec {

// Flat key=value schema; every knob a pipeline run needs. Unknown keys are
// the caller's job to reject (the converge driver reads extra keys from the
// same file).
struct ExperimentConfig {
  std::string model = "brownian";  // brownian | synthetic
  int d = 1;
  int n = 64;  // elements per axis; for `synthetic`, the matrix size n_h
  BasisKind basis = BasisKind::NodalP1;
  int L = 10;
  int L_gen = 0;  // 0 -> default_generator_truncation(L)
  long long M = 4096;
  double alpha = 1.0;
  std::string tau_policy = "optimal";  // optimal | explicit | none
  int tau = 0;                         // explicit policy only
  int replicates = 10;
  std::uint64_t seed = 0x5eedf1e1d;
  std::string out;  // CSV destination; empty means stdout
  bool exact_covariance = false;  // bypass: estimate := exact Sigma, E3 = 0
  int quad_pts = 8;
  // surrogates for the symbolic constants in the bounds
  double c1 = 0.0;
  double rho1 = 1.0;
  double h0 = 1.0;
  double dk_constant = kDavisKahanConstant;

  // Consumes its keys from cfg and validates ranges; errors name the field.
  // Does not call reject_unknown — the caller does, after its own keys.
  static ExperimentConfig from(KeyValueConfig& cfg);
  void validate() const;
};

struct SlopeFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
};

// Least squares of log(y) on log(x); needs >= 2 positive points.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

enum class ConvergenceAxis { Truncation, Fem, Sampling, End2End };
ConvergenceAxis parse_axis(const std::string& name);

struct StudyResult {
  std::string axis;
  std::vector<std::string> metric_names;
  std::vector<double> sweep;  // P swept values
  // values[p][r][m]: sweep point, replicate, metric
  std::vector<std::vector<std::vector<double>>> values;
  std::vector<std::vector<double>> mean;    // [p][m]
  std::vector<std::vector<double>> stddev;  // [p][m], divisor R-1 (0 if R=1)
  std::vector<SlopeFit> fits;               // per metric, on means vs sweep
  int replicates = 1;

  // one row per (point, replicate); means/stds as columns, fits as trailing
  // comment lines
  void write_csv(std::ostream& out) const;
};

// sample -> estimate -> eigendecompose -> error decomposition, one report per
// replicate (replicates run in parallel, output order fixed). When csv is
// non-null the rows are also emitted there, byte-deterministic for a given
// config.
std::vector<ErrorReport> run_reconstruct(const ExperimentConfig& config,
                                         std::ostream* csv = nullptr);

// truncation: E1(L) over sweep of L.  fem: |lambda_l - lambda_l^{(h)}|,
// l <= 5, over sweep of n.  sampling: ||Sigmahat_tau - Sigma||_2 over sweep
// of M.  end2end: total reconstruction error over sweep of M. The sweep must
// have >= 4 points in geometric progression.
StudyResult run_converge(const ExperimentConfig& config, ConvergenceAxis axis,
                         const std::vector<double>& sweep,
                         std::ostream* csv = nullptr);

struct InvariantCheckItem {
  std::string module;
  std::string name;
  bool pass = false;
  std::string detail;
  std::uint64_t seed = 0;
};

struct InvariantCheckReport {
  std::vector<std::string> header;  // effective configuration echo
  std::vector<InvariantCheckItem> items;
  bool all_pass = true;

  void write(std::ostream& out) const;
};

// Small-size invariant battery across every module, including a deliberately
// corrupted mass-factor fixture that must be detected.
InvariantCheckReport run_check_invariants(const ExperimentConfig& config);

// S_{kk'} = (1 + |k-k'|)^{-(alpha+2)}: the standard member of the decay class
// used by the tapering studies; strictly diagonally dominant, hence SPD.
Eigen::MatrixXd synthetic_decay_covariance(int n_h, double alpha);

}  // namespace covrec

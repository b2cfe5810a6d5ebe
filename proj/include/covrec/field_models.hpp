#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "covrec/fem_space.hpp"

namespace covrec {

// A covariance kernel with known Mercer spectrum. Eigenvalues are 1-based,
// sorted non-increasing with multiplicities expanded. `distinct_eigenvalue`
// is the strictly decreasing sequence of distinct values (identical to
// `eigenvalue` in 1D); spectral-gap functionals use it so that tensor-product
// multiplicities do not produce spurious zero gaps.
struct SpectrumModel {
  std::string name;
  int dim = 1;
  double smoothness = 0.5;  // nominal s, metadata only
  int available = std::numeric_limits<int>::max();

  std::function<double(int)> eigenvalue;
  std::function<double(int, double, double)> eigenfunction;  // (ell, x, y)
  // closed-form kernel evaluator; empty when only the series is known
  std::function<double(double, double, double, double)> kernel;
  std::function<double(int)> distinct_eigenvalue;
  // analytic tail sum_{l>L} lambda_l^2; empty -> numeric fallback
  std::function<double(int)> tail_sq;
  // tensor models only: diagnostic flattening index k(l1,l2) and the sorted
  // position -> multi-index map
  std::function<int(int, int)> flatten_index;
  std::function<std::array<int, 2>(int)> multi_index;
};

// Brownian motion on (0,1): lambda_l = pi^{-2} (l - 1/2)^{-2},
// kernel min(x,x'). The eigenfunctions sqrt(2) sin((l-1/2) pi x) are verified
// against the integral equation in the test suite before anything relies on
// them.
SpectrumModel brownian_spectrum_1d();

// Brownian sheet, d = 2: eigenvalues are products of the 1D ones, flattened
// into non-increasing order; ties ordered by the flattening index
// k(l1,l2) = ((2 l1 - 1)(2 l2 - 1) + 1) / 2, then lexicographically.
// `max_modes` bounds the expanded table (model.available).
SpectrumModel brownian_spectrum_tensor(int d, int max_modes = 512);

// closed form when the model has one, else Mercer sum truncated at the
// model's available modes (level used reported through `trunc_level`)
double kernel_eval(const SpectrumModel& model, double x, double xp,
                   int* trunc_level = nullptr);
double kernel_eval(const SpectrumModel& model, double x, double y, double xp,
                   double yp, int* trunc_level = nullptr);

// columns: L2 projections of the first L eigenfunctions onto the space
Eigen::MatrixXd projected_eigenfunctions(const SpectrumModel& model, const FemSpace& space,
                                         int L, int quad_pts = 8);

// exact coefficient covariance of the truncated field: P diag(lambda) P^T
Eigen::MatrixXd true_coefficient_covariance(const SpectrumModel& model, const FemSpace& space,
                                            int L_gen, int quad_pts = 8);

struct SampleMatrix {
  Eigen::MatrixXd rows;  // M x n_h coefficient vectors
  std::uint64_t seed = 0;
  int L_gen = 0;
  const FemSpace* space = nullptr;
  const SpectrumModel* model = nullptr;
};

// M i.i.d. truncated-KL samples projected into the space. Draw for row m,
// mode l comes from the counter stream keyed (seed, m, l): bit-identical
// output for identical inputs, independent of scheduling.
SampleMatrix sample_field(const SpectrumModel& model, const FemSpace& space, int L_gen,
                          int M, std::uint64_t seed, int quad_pts = 8);

// generator truncation default: keeps generator bias below sampling noise
inline int default_generator_truncation(int L_study) {
  return L_study > 64 ? 4 * L_study : 256;
}

}  // namespace covrec

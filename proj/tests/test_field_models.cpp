#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstring>

#include "covrec/errors.hpp"
#include "covrec/field_models.hpp"
#include "covrec/gauss.hpp"
#include "covrec/spectral_solver.hpp"

using namespace covrec;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// composite Gauss over [a,b] split into `cells` equal pieces
double integrate(const std::function<double(double)>& f, double a, double b,
                 int cells, int pts) {
  const QuadRule q = gauss_legendre_01(pts);
  const double w = (b - a) / cells;
  double s = 0.0;
  for (int c = 0; c < cells; ++c)
    for (int k = 0; k < pts; ++k) s += w * q.w[k] * f(a + (c + q.x[k]) * w);
  return s;
}

}  // namespace

// The whole artifact leans on these eigenpairs, so verify them against the
// defining integral equation rather than trusting the closed forms.
TEST_CASE("brownian eigenpairs satisfy the min-kernel integral equation") {
  const SpectrumModel m = brownian_spectrum_1d();
  for (int l : {1, 2, 3, 7}) {
    const double lam = m.eigenvalue(l);
    for (double x : {0.13, 0.5, 0.92}) {
      // the kernel has a kink at y = x: integrate the two sides separately
      const auto f = [&](double y) {
        return std::min(x, y) * m.eigenfunction(l, y, 0);
      };
      const double lhs =
          integrate(f, 0.0, x, 24, 12) + integrate(f, x, 1.0, 24, 12);
      CHECK(lhs == doctest::Approx(lam * m.eigenfunction(l, x, 0))
                       .epsilon(1e-10));
    }
  }
}

TEST_CASE("brownian spectrum values and ordering") {
  const SpectrumModel m = brownian_spectrum_1d();
  CHECK(m.eigenvalue(1) == doctest::Approx(0.4052847345693511).epsilon(1e-15));
  CHECK(m.eigenvalue(2) ==
        doctest::Approx(0.045031637174372342).epsilon(1e-15));
  CHECK(m.eigenvalue(5) ==
        doctest::Approx(0.0050035152415969274).epsilon(1e-15));
  for (int l = 1; l < 40; ++l) CHECK(m.eigenvalue(l) > m.eigenvalue(l + 1));
  for (int l = 1; l <= 8; ++l) {
    CHECK(m.eigenvalue(l) ==
          doctest::Approx(4.0 / (kPi * kPi * (2 * l - 1) * (2 * l - 1)))
              .epsilon(1e-15));
    CHECK(m.distinct_eigenvalue(l) == m.eigenvalue(l));
  }
  // eigenfunctions are unit-norm in L2
  for (int l : {1, 4}) {
    const double n2 = integrate(
        [&](double y) { return std::pow(m.eigenfunction(l, y, 0), 2); }, 0.0,
        1.0, 16, 12);
    CHECK(n2 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("closed-form kernel and its truncated series agree") {
  const SpectrumModel m = brownian_spectrum_1d();
  int trunc = -1;
  CHECK(kernel_eval(m, 0.3, 0.8, &trunc) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(trunc == 0);  // closed form used, no truncation

  SpectrumModel series = m;
  series.kernel = nullptr;  // force the Mercer sum
  CHECK(kernel_eval(series, 0.3, 0.8, &trunc) ==
        doctest::Approx(0.3).epsilon(2e-4));
  CHECK(trunc == 4096);
}

TEST_CASE("squared-eigenvalue tails: closed form vs brute partial sums") {
  const SpectrumModel m = brownian_spectrum_1d();
  // full sum of lambda^2 is 1/6
  CHECK(m.tail_sq(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  for (int L : {1, 6, 128}) {
    double head = 0.0;
    for (int l = 1; l <= L; ++l) head += std::pow(m.eigenvalue(l), 2);
    CHECK(m.tail_sq(L) ==
          doctest::Approx(1.0 / 6.0 - head).epsilon(1e-11));
    CHECK(m.tail_sq(L) > m.tail_sq(L + 1));
  }
}

TEST_CASE("tensor spectrum: products, ordering, and index maps") {
  const SpectrumModel m = brownian_spectrum_tensor(2, 64);
  const SpectrumModel m1 = brownian_spectrum_1d();
  CHECK(m.available == 64);
  CHECK(m.eigenvalue(1) ==
        doctest::Approx(std::pow(m1.eigenvalue(1), 2)).epsilon(1e-15));
  // the (1,2)/(2,1) pair is a genuine multiplicity
  CHECK(m.eigenvalue(2) == m.eigenvalue(3));
  CHECK(m.eigenvalue(2) ==
        doctest::Approx(m1.eigenvalue(1) * m1.eigenvalue(2)).epsilon(1e-15));
  // non-increasing up to rounding: exact ties (equal index products) are
  // computed from different 1D factors and may differ in the last ulp
  for (int k = 1; k < 64; ++k)
    CHECK(m.eigenvalue(k) >= m.eigenvalue(k + 1) * (1.0 - 1e-14));
  for (int k = 1; k <= 64; ++k) {
    const std::array<int, 2> idx = m.multi_index(k);
    CHECK(m.eigenvalue(k) ==
          doctest::Approx(m1.eigenvalue(idx[0]) * m1.eigenvalue(idx[1]))
              .epsilon(1e-15));
  }
  // diagnostic flattening index for the tie order
  CHECK(m.flatten_index(1, 1) == 1);
  CHECK(m.flatten_index(2, 2) == 5);
  // ties sort by flatten index: (1,2) has k=2, (2,1) has k=2 as well, so the
  // lexicographic fallback puts (1,2) first
  CHECK(m.multi_index(2)[0] == 1);
  CHECK(m.multi_index(2)[1] == 2);
  CHECK(m.multi_index(3)[0] == 2);
  CHECK(m.multi_index(3)[1] == 1);
  // distinct sequence is strictly decreasing and starts at the top value
  CHECK(m.distinct_eigenvalue(1) == m.eigenvalue(1));
  for (int j = 1; j <= 6; ++j)
    CHECK(m.distinct_eigenvalue(j) > m.distinct_eigenvalue(j + 1));
  // separable kernel
  CHECK(kernel_eval(m, 0.4, 0.7, 0.9, 0.2) ==
        doctest::Approx(std::min(0.4, 0.9) * std::min(0.7, 0.2))
            .epsilon(1e-15));

  CHECK_THROWS_AS(brownian_spectrum_tensor(3), ConfigError);
  CHECK_THROWS_AS(brownian_spectrum_tensor(2, 0), ConfigError);
}

TEST_CASE("projected eigenfunctions match a test-local projection") {
  const SpectrumModel m = brownian_spectrum_1d();
  const FemSpace sp(1, 8);
  const int L = 4;
  const Eigen::MatrixXd P = projected_eigenfunctions(m, sp, L, 12);
  REQUIRE(P.rows() == sp.dofs());
  REQUIRE(P.cols() == L);
  for (int l = 1; l <= L; ++l) {
    Eigen::VectorXd b(sp.dofs());
    for (int j = 0; j < sp.dofs(); ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(sp.dofs());
      e[j] = 1.0;
      b[j] = integrate(
          [&](double y) { return m.eigenfunction(l, y, 0) * sp.evaluate(e, y); },
          0.0, 1.0, 8, 12);
    }
    const Eigen::VectorXd c = sp.mass().ldlt().solve(b);
    CHECK((P.col(l - 1) - c).cwiseAbs().maxCoeff() < 1e-12);
    // projection error obeys the sharp P1 bound (h/pi)^2 * |phi''|_{L2}
    const double err2 = integrate(
        [&](double y) {
          return std::pow(sp.evaluate(P.col(l - 1), y) -
                              m.eigenfunction(l, y, 0),
                          2);
        },
        0.0, 1.0, 16, 12);
    const double bound = sp.h() * sp.h() * (l - 0.5) * (l - 0.5);
    CHECK(std::sqrt(err2) <= bound * 1.0001);
  }
}

TEST_CASE("coefficient covariance assembles the projected spectral sum") {
  const SpectrumModel m = brownian_spectrum_1d();
  const FemSpace sp(1, 6);
  const int L_gen = 5;
  const Eigen::MatrixXd sigma = true_coefficient_covariance(m, sp, L_gen, 12);
  const Eigen::MatrixXd P = projected_eigenfunctions(m, sp, L_gen, 12);
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(sp.dofs(), sp.dofs());
  for (int l = 1; l <= L_gen; ++l)
    ref += m.eigenvalue(l) * P.col(l - 1) * P.col(l - 1).transpose();
  CHECK((sigma - ref).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rank-one covariance: the discrete eigenvalue is lambda * |P phi|^2") {
  const SpectrumModel m = brownian_spectrum_1d();
  for (int n : {8, 16}) {
    const FemSpace sp(1, n);
    const Eigen::MatrixXd sigma = true_coefficient_covariance(m, sp, 1, 16);
    const Eigen::MatrixXd P = projected_eigenfunctions(m, sp, 1, 16);
    const EigenSystem sys = generalized_eigendecomposition(sigma, sp);
    const double expect = m.eigenvalue(1) * sp.inner(P.col(0), P.col(0));
    CHECK(sys.values[0] == doctest::Approx(expect).epsilon(1e-12));
    // remaining spectrum is numerically zero
    for (int k = 1; k < sys.size(); ++k)
      CHECK(std::abs(sys.values[k]) < 1e-13);
    // Galerkin never overshoots the continuous eigenvalue here
    CHECK(sys.values[0] < m.eigenvalue(1));
    CHECK(sys.values[0] == doctest::Approx(m.eigenvalue(1)).epsilon(1e-4));
  }
}

TEST_CASE("field samples are deterministic in the seed and counter-keyed") {
  const SpectrumModel m = brownian_spectrum_1d();
  const FemSpace sp(1, 8);
  const SampleMatrix a = sample_field(m, sp, 32, 7, 42);
  const SampleMatrix b = sample_field(m, sp, 32, 7, 42);
  REQUIRE(a.rows.rows() == 7);
  REQUIRE(a.rows.cols() == sp.dofs());
  CHECK(std::memcmp(a.rows.data(), b.rows.data(),
                    sizeof(double) * a.rows.size()) == 0);
  const SampleMatrix c = sample_field(m, sp, 32, 7, 43);
  CHECK((a.rows - c.rows).cwiseAbs().maxCoeff() > 0.0);
  // prefix property of the counter stream: more rows, same leading rows
  const SampleMatrix d = sample_field(m, sp, 32, 12, 42);
  CHECK((d.rows.topRows(7) - a.rows).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.seed == 42);
  CHECK(a.L_gen == 32);
  CHECK(a.space == &sp);
}

TEST_CASE("sampled field reproduces the model's second moments") {
  const SpectrumModel m = brownian_spectrum_1d();
  const FemSpace sp(1, 16);
  const int M = 10000, L_gen = 64;
  const SampleMatrix s = sample_field(m, sp, L_gen, M, 20240405);

  // mean is 0 within a few sigma: ||mean||_{L2} has scale sqrt(lambda_1 / M)
  const Eigen::VectorXd mu = s.rows.colwise().mean();
  CHECK(sp.norm(mu) < 4.0 * std::sqrt(m.eigenvalue(1) / M));

  // pointwise variance at x = 1 equals the truncated diagonal kernel value
  double target = 0.0;
  for (int l = 1; l <= L_gen; ++l)
    target += m.eigenvalue(l) * std::pow(m.eigenfunction(l, 1.0, 0), 2);
  double var = 0.0;
  for (int r = 0; r < M; ++r)
    var += std::pow(sp.evaluate(s.rows.row(r), 1.0) - sp.evaluate(mu, 1.0), 2);
  var /= M;
  CHECK(var / target > 0.95);
  CHECK(var / target < 1.05);
}

TEST_CASE("generator truncation default") {
  CHECK(default_generator_truncation(10) == 256);
  CHECK(default_generator_truncation(64) == 256);
  CHECK(default_generator_truncation(65) == 260);
  CHECK(default_generator_truncation(128) == 512);
}

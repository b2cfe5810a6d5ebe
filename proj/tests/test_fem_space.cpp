#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "covrec/errors.hpp"
#include "covrec/fem_space.hpp"
#include "covrec/gauss.hpp"

using namespace covrec;

namespace {

// test-local composite Gauss integral of a function over (0,1)
double integrate_1d(const std::function<double(double)>& f, int elems,
                    int pts) {
  const QuadRule q = gauss_legendre_01(pts);
  const double h = 1.0 / elems;
  double s = 0.0;
  for (int e = 0; e < elems; ++e)
    for (int k = 0; k < pts; ++k) s += h * q.w[k] * f((e + q.x[k]) * h);
  return s;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// closed-form 1D P1 mass on a uniform mesh with boundary dofs kept
Eigen::MatrixXd mass_1d_closed(int n) {
  const double h = 1.0 / n;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int e = 0; e < n; ++e) {
    m(e, e) += h / 3.0;
    m(e + 1, e + 1) += h / 3.0;
    m(e, e + 1) += h / 6.0;
    m(e + 1, e) += h / 6.0;
  }
  return m;
}

}  // namespace

TEST_CASE("gauss rule on (0,1): weights sum to one, exact to degree 2n-1") {
  for (int n : {1, 2, 4, 8, 16}) {
    const QuadRule q = gauss_legendre_01(n);
    REQUIRE(static_cast<int>(q.x.size()) == n);
    double wsum = 0.0;
    for (double w : q.w) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += q.w[k] * std::pow(q.x[k], deg);
      CHECK(s == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("1D mass matrix matches the closed-form assembly") {
  for (int n : {2, 3, 5, 16}) {
    const FemSpace sp(1, n);
    REQUIRE(sp.dofs() == n + 1);
    CHECK(sp.h() == doctest::Approx(1.0 / n).epsilon(1e-15));
    const Eigen::MatrixXd ref = mass_1d_closed(n);
    CHECK((sp.mass() - ref).cwiseAbs().maxCoeff() < 1e-15);
    // partition of unity: total mass is |D|
    CHECK(sp.mass().sum() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("2D mass matrix is the Kronecker square of the 1D one") {
  for (int n : {2, 4}) {
    const FemSpace sp1(1, n);
    const FemSpace sp2(2, n);
    REQUIRE(sp2.dofs() == (n + 1) * (n + 1));
    const Eigen::MatrixXd ref = kron(sp1.mass(), sp1.mass());
    CHECK((sp2.mass() - ref).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(sp2.mass().sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("node coordinates follow the x-fastest dof numbering") {
  const FemSpace sp1(1, 4);
  for (int j = 0; j <= 4; ++j) {
    CHECK(sp1.node(j)[0] == doctest::Approx(j * 0.25).epsilon(1e-15));
    CHECK(sp1.node(j)[1] == 0.0);
  }
  const FemSpace sp2(2, 3);
  for (int iy = 0; iy <= 3; ++iy)
    for (int ix = 0; ix <= 3; ++ix) {
      const Eigen::Vector2d p = sp2.node(iy * 4 + ix);
      CHECK(p[0] == doctest::Approx(ix / 3.0).epsilon(1e-15));
      CHECK(p[1] == doctest::Approx(iy / 3.0).epsilon(1e-15));
    }
}

TEST_CASE("cholesky factor is lower triangular and reproduces the mass") {
  for (int d : {1, 2}) {
    const FemSpace sp(d, 5);
    const Eigen::MatrixXd& L = sp.mass_chol();
    for (int i = 0; i < L.rows(); ++i)
      for (int j = i + 1; j < L.cols(); ++j) CHECK(L(i, j) == 0.0);
    CHECK((L * L.transpose() - sp.mass()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("mass eigenvalue bounds match a direct solve") {
  const FemSpace sp(1, 12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sp.mass());
  CHECK(sp.mass_lambda_min() ==
        doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-12));
  CHECK(sp.mass_lambda_max() ==
        doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-12));
  CHECK(sp.mass_lambda_min() > 0.0);
}

TEST_CASE("projection reproduces affine functions exactly") {
  const auto f1 = [](double x, double) { return 0.75 - 2.0 * x; };
  const FemSpace sp1(1, 7);
  const Eigen::VectorXd c1 = sp1.project(f1);
  for (double x : {0.0, 0.111, 0.5, 0.73, 1.0})
    CHECK(sp1.evaluate(c1, x) == doctest::Approx(f1(x, 0)).epsilon(1e-12));

  const auto f2 = [](double x, double y) { return 1.0 + 0.5 * x - 1.25 * y; };
  const FemSpace sp2(2, 3);
  const Eigen::VectorXd c2 = sp2.project(f2);
  for (double x : {0.0, 0.3, 1.0})
    for (double y : {0.1, 0.66, 1.0})
      CHECK(sp2.evaluate(c2, x, y) == doctest::Approx(f2(x, y)).epsilon(1e-12));
}

TEST_CASE("load vector of f=1 integrates the hat functions") {
  const int n = 6;
  const FemSpace sp(1, n);
  const Eigen::VectorXd b = sp.load_vector([](double, double) { return 1.0; });
  const double h = 1.0 / n;
  for (int j = 0; j <= n; ++j) {
    const double expect = (j == 0 || j == n) ? h / 2 : h;
    CHECK(b[j] == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("inner products agree with quadrature on the evaluated functions") {
  const FemSpace sp(1, 9);
  std::mt19937_64 gen(123);
  std::normal_distribution<double> nd;
  Eigen::VectorXd a(sp.dofs()), b(sp.dofs());
  for (int i = 0; i < sp.dofs(); ++i) {
    a[i] = nd(gen);
    b[i] = nd(gen);
  }
  const double direct = integrate_1d(
      [&](double x) { return sp.evaluate(a, x) * sp.evaluate(b, x); }, 9, 4);
  CHECK(sp.inner(a, b) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(sp.norm(a) == doctest::Approx(std::sqrt(sp.inner(a, a))).epsilon(1e-13));
}

TEST_CASE("evaluate is nodal-interpolatory and piecewise linear") {
  const FemSpace sp(1, 5);
  for (int j = 0; j < sp.dofs(); ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(sp.dofs());
    e[j] = 1.0;
    for (int k = 0; k < sp.dofs(); ++k)
      CHECK(sp.evaluate(e, sp.node(k)[0]) ==
            doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-14));
    // midpoint of an element is the average of its endpoints
    const double mid = sp.evaluate(e, 0.5 * (sp.node(1)[0] + sp.node(2)[0]));
    CHECK(mid == doctest::Approx(0.5 * (e[1] + e[2])).epsilon(1e-14));
  }
}

TEST_CASE("orthonormal basis: identity mass, same function, same geometry") {
  const FemSpace nodal(1, 8);
  const FemSpace orth(1, 8, BasisKind::L2Orthonormal);
  CHECK((orth.mass() - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() <
        1e-13);

  const auto f = [](double x, double) { return std::sin(2.1 * x) + 0.3; };
  const Eigen::VectorXd cn = nodal.project(f);
  const Eigen::VectorXd co = orth.project(f);
  // both bases represent the same L2 projection
  for (double x : {0.05, 0.37, 0.81})
    CHECK(orth.evaluate(co, x) ==
          doctest::Approx(nodal.evaluate(cn, x)).epsilon(1e-11));
  // the coefficient map is the stated triangular change of basis
  CHECK((orth.from_nodal(cn) - co).cwiseAbs().maxCoeff() < 1e-11);
  CHECK((orth.to_nodal(co) - cn).cwiseAbs().maxCoeff() < 1e-11);
  // euclidean coefficient norm in the orthonormal basis is the L2 norm
  CHECK(co.norm() == doctest::Approx(nodal.norm(cn)).epsilon(1e-12));
}

TEST_CASE("to_nodal / from_nodal round-trip in both bases") {
  for (BasisKind b : {BasisKind::NodalP1, BasisKind::L2Orthonormal}) {
    const FemSpace sp(1, 6, b);
    Eigen::VectorXd c(sp.dofs());
    for (int i = 0; i < sp.dofs(); ++i) c[i] = std::cos(1.7 * i);
    CHECK((sp.from_nodal(sp.to_nodal(c)) - c).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("constructor rejects unsupported dimensions and empty meshes") {
  CHECK_THROWS_AS(FemSpace(3, 4), ConfigError);
  CHECK_THROWS_AS(FemSpace(0, 4), ConfigError);
  CHECK_THROWS_AS(FemSpace(1, 0), ConfigError);
  CHECK_THROWS_AS(FemSpace(1, 1), ConfigError);
  CHECK_THROWS_AS(FemSpace(2, -2), ConfigError);
}

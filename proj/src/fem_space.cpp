#include "covrec/fem_space.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "covrec/errors.hpp"
#include "covrec/gauss.hpp"

namespace covrec {

namespace {

// 1D nodal P1 mass on n elements of width h: tridiagonal with interior
// diagonal 2h/3, off-diagonal h/6, boundary diagonal h/3.
Eigen::MatrixXd mass_1d(int n, double h) {
  const int m = n + 1;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const bool boundary = (i == 0 || i == m - 1);
    M(i, i) = boundary ? h / 3.0 : 2.0 * h / 3.0;
    if (i + 1 < m) {
      M(i, i + 1) = h / 6.0;
      M(i + 1, i) = h / 6.0;
    }
  }
  return M;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

}  // namespace

FemSpace::FemSpace(int dim, int elems_per_axis, BasisKind basis)
    : dim_(dim), n_(elems_per_axis), basis_(basis) {
  if (dim != 1 && dim != 2)
    throw ConfigError("FemSpace: dimension must be 1 or 2, got " + std::to_string(dim));
  if (n_ < 2)
    throw ConfigError("FemSpace: need at least 2 elements per axis, got " + std::to_string(n_));
  h_ = 1.0 / n_;
  const int m = n_ + 1;
  dofs_ = (dim_ == 1) ? m : m * m;

  const Eigen::MatrixXd M1 = mass_1d(n_, h_);
  Eigen::MatrixXd nodal_mass = (dim_ == 1) ? M1 : kron(M1, M1);

  // Kronecker structure: chol(M1 (x) M1) = chol(M1) (x) chol(M1)
  Eigen::LLT<Eigen::MatrixXd> llt1(M1);
  if (llt1.info() != Eigen::Success)
    throw NumericError("FemSpace: mass matrix Cholesky failed");
  const Eigen::MatrixXd L1 = llt1.matrixL();
  nodal_chol_ = (dim_ == 1) ? L1 : kron(L1, L1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M1, Eigen::EigenvaluesOnly);
  const double lo1 = es.eigenvalues().minCoeff();
  const double hi1 = es.eigenvalues().maxCoeff();
  if (lo1 <= 0.0) throw NumericError("FemSpace: mass matrix not positive definite");

  if (basis_ == BasisKind::NodalP1) {
    mass_ = std::move(nodal_mass);
    chol_ = nodal_chol_;
    lam_min_ = (dim_ == 1) ? lo1 : lo1 * lo1;
    lam_max_ = (dim_ == 1) ? hi1 : hi1 * hi1;
  } else {
    mass_ = Eigen::MatrixXd::Identity(dofs_, dofs_);
    chol_ = Eigen::MatrixXd::Identity(dofs_, dofs_);
    lam_min_ = lam_max_ = 1.0;
  }
}

Eigen::Vector2d FemSpace::node(int j) const {
  if (j < 0 || j >= dofs_) throw ConfigError("FemSpace::node: index out of range");
  const int m = n_ + 1;
  if (dim_ == 1) return {j * h_, 0.0};
  return {(j % m) * h_, (j / m) * h_};
}

Eigen::VectorXd FemSpace::load_vector(const std::function<double(double, double)>& f,
                                      int quad_pts) const {
  const QuadRule q = gauss_legendre_01(quad_pts);
  const int m = n_ + 1;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dofs_);
  auto check = [&](double v, double x, double y) {
    if (!std::isfinite(v))
      throw NumericError("load_vector: non-finite integrand at (" + std::to_string(x) +
                         ", " + std::to_string(y) + ")");
    return v;
  };
  if (dim_ == 1) {
    for (int e = 0; e < n_; ++e) {
      const double x0 = e * h_;
      for (int k = 0; k < quad_pts; ++k) {
        const double t = q.x[k];
        const double x = x0 + t * h_;
        const double v = check(f(x, 0.0), x, 0.0) * q.w[k] * h_;
        b[e] += v * (1.0 - t);
        b[e + 1] += v * t;
      }
    }
  } else {
    for (int ey = 0; ey < n_; ++ey) {
      for (int ex = 0; ex < n_; ++ex) {
        const double x0 = ex * h_, y0 = ey * h_;
        for (int ky = 0; ky < quad_pts; ++ky) {
          const double ty = q.x[ky];
          const double y = y0 + ty * h_;
          for (int kx = 0; kx < quad_pts; ++kx) {
            const double tx = q.x[kx];
            const double x = x0 + tx * h_;
            const double v = check(f(x, y), x, y) * q.w[kx] * q.w[ky] * h_ * h_;
            b[ey * m + ex] += v * (1.0 - tx) * (1.0 - ty);
            b[ey * m + ex + 1] += v * tx * (1.0 - ty);
            b[(ey + 1) * m + ex] += v * (1.0 - tx) * ty;
            b[(ey + 1) * m + ex + 1] += v * tx * ty;
          }
        }
      }
    }
  }
  if (basis_ == BasisKind::L2Orthonormal) {
    // psi = theta L^{-T}  =>  (psi_j, f) = L^{-1} b
    nodal_chol_.triangularView<Eigen::Lower>().solveInPlace(b);
  }
  return b;
}

Eigen::VectorXd FemSpace::project(const std::function<double(double, double)>& f,
                                  int quad_pts) const {
  Eigen::VectorXd c = load_vector(f, quad_pts);
  if (basis_ == BasisKind::NodalP1) {
    chol_.triangularView<Eigen::Lower>().solveInPlace(c);
    chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(c);
  }
  // orthonormal basis: mass is the identity, load vector is the answer
  return c;
}

double FemSpace::inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  if (a.size() != dofs_ || b.size() != dofs_)
    throw ConfigError("FemSpace::inner: coefficient length does not match space");
  if (basis_ == BasisKind::L2Orthonormal) return a.dot(b);
  return a.dot(mass_ * b);
}

double FemSpace::norm(const Eigen::VectorXd& a) const {
  const double s = inner(a, a);
  return s > 0.0 ? std::sqrt(s) : 0.0;
}

double FemSpace::evaluate(const Eigen::VectorXd& c, double x, double y) const {
  if (c.size() != dofs_)
    throw ConfigError("FemSpace::evaluate: coefficient length does not match space");
  const double eps = 1e-12;
  if (x < -eps || x > 1.0 + eps || (dim_ == 2 && (y < -eps || y > 1.0 + eps)))
    throw ConfigError("FemSpace::evaluate: point outside the closed unit cube");
  const Eigen::VectorXd cn = to_nodal(c);
  auto clamp01 = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
  x = clamp01(x);
  y = clamp01(y);
  const int m = n_ + 1;
  const int ex = std::min(static_cast<int>(x / h_), n_ - 1);
  const double tx = x / h_ - ex;
  if (dim_ == 1) return cn[ex] * (1.0 - tx) + cn[ex + 1] * tx;
  const int ey = std::min(static_cast<int>(y / h_), n_ - 1);
  const double ty = y / h_ - ey;
  return cn[ey * m + ex] * (1.0 - tx) * (1.0 - ty) + cn[ey * m + ex + 1] * tx * (1.0 - ty) +
         cn[(ey + 1) * m + ex] * (1.0 - tx) * ty + cn[(ey + 1) * m + ex + 1] * tx * ty;
}

Eigen::VectorXd FemSpace::to_nodal(const Eigen::VectorXd& c) const {
  if (basis_ == BasisKind::NodalP1) return c;
  // c_nodal = L^{-T} c_orth
  Eigen::VectorXd v = c;
  nodal_chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(v);
  return v;
}

Eigen::VectorXd FemSpace::from_nodal(const Eigen::VectorXd& c) const {
  if (basis_ == BasisKind::NodalP1) return c;
  return nodal_chol_.transpose() * c;
}

}  // namespace covrec

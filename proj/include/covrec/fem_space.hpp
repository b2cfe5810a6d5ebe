#pragma once

#include <Eigen/Dense>
#include <functional>

namespace covrec {

enum class BasisKind { NodalP1, L2Orthonormal };

// Continuous piecewise-linear space on (0,1)^d, d in {1,2}, uniform mesh with
// n elements per axis (h = 1/n). Boundary nodes are kept as degrees of
// freedom. In 2D the basis functions are tensor-product hats (bilinear per
// cell) numbered x-fastest: dof j = iy*(n+1) + ix, so the mass matrix is the
// Kronecker product of the 1D mass matrices.
//
// The L2Orthonormal variant spans the same space in a mass-orthonormal basis:
// with M = L L^T (nodal mass), coefficients transform c_orth = L^T c_nodal
// and the exposed mass matrix is the identity.
//
// Everything is immutable after construction; instances are safe to share
// across threads read-only.
class FemSpace {
 public:
  FemSpace(int dim, int elems_per_axis, BasisKind basis = BasisKind::NodalP1);

  int dim() const { return dim_; }
  int elems() const { return n_; }
  double h() const { return h_; }
  int dofs() const { return dofs_; }
  BasisKind basis() const { return basis_; }

  const Eigen::MatrixXd& mass() const { return mass_; }
  // lower triangular, mass() == mass_chol() * mass_chol()^T
  const Eigen::MatrixXd& mass_chol() const { return chol_; }
  double mass_lambda_min() const { return lam_min_; }
  double mass_lambda_max() const { return lam_max_; }

  // coordinates of dof j of the underlying nodal mesh (y = 0 in 1D)
  Eigen::Vector2d node(int j) const;

  // b_j = \int f theta_j via composite Gauss-Legendre, pts per axis per element
  Eigen::VectorXd load_vector(const std::function<double(double, double)>& f,
                              int quad_pts = 8) const;
  // L2 projection: solves (in the exposed basis) mass * c = load
  Eigen::VectorXd project(const std::function<double(double, double)>& f,
                          int quad_pts = 8) const;

  // (v_a, v_b)_{L2(D)} = a^T mass b
  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double norm(const Eigen::VectorXd& a) const;

  double evaluate(const Eigen::VectorXd& c, double x, double y = 0.0) const;

  // change of basis between the exposed coefficients and nodal coefficients
  Eigen::VectorXd to_nodal(const Eigen::VectorXd& c) const;
  Eigen::VectorXd from_nodal(const Eigen::VectorXd& c) const;

 private:
  int dim_;
  int n_;
  int dofs_;
  double h_;
  BasisKind basis_;
  Eigen::MatrixXd mass_;        // of the exposed basis
  Eigen::MatrixXd chol_;        // of the exposed basis
  Eigen::MatrixXd nodal_chol_;  // of the nodal mass (basis transform)
  double lam_min_, lam_max_;
};

}  // namespace covrec
